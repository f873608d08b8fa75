# This file is part of cakemoist, a regression toolkit for filter-cake
# moisture prediction.
#
# Copyright 2026 the cakemoist contributors
#
# License:  Standard 3-clause BSD; see "license.txt" for full license terms
#           and contributor agreement.

"""
    This subpackage implements the models and data handling of cakemoist.

    Don't manually import things from here; the public API lives directly
    in the top-level package namespace.
"""
