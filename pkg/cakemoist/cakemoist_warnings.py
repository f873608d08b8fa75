# This file is part of cakemoist, a regression toolkit for filter-cake
# moisture prediction.
#
# Copyright 2026 the cakemoist contributors
#
# License:  Standard 3-clause BSD; see "license.txt" for full license terms
#           and contributor agreement.

"""
    This module contains the warning classes for cakemoist. These classes are
    part of the public API of cakemoist, and should be imported from this
    module.
"""


class CakemoistWarning(UserWarning):
    pass


class ConvergenceWarning(CakemoistWarning):
    """ A solver stopped at its iteration limit before meeting its tolerance.
    """
    pass
