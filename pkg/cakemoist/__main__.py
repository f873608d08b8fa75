# This file is part of cakemoist, a regression toolkit for filter-cake
# moisture prediction.
#
# Copyright 2026 the cakemoist contributors
#
# License:  Standard 3-clause BSD; see "license.txt" for full license terms
#           and contributor agreement.

import sys

from .cli import main

sys.exit(main())
