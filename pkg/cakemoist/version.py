# This file is part of cakemoist, a regression toolkit for filter-cake
# moisture prediction.
#
# Copyright 2026 the cakemoist contributors
#
# License:  Standard 3-clause BSD; see "license.txt" for full license terms
#           and contributor agreement.

"""
    Versioning module for cakemoist.
"""

from collections import namedtuple
import sys

import h5py
import joblib
import numpy
import pandas
import scipy

# All should be integers, except pre
_CAKEMOIST_VERSION_CLS = namedtuple("_CAKEMOIST_VERSION_CLS",
                                    "major minor bugfix pre post dev")

version_tuple = _CAKEMOIST_VERSION_CLS(1, 0, 0, None, None, None)

version = "{0.major:d}.{0.minor:d}.{0.bugfix:d}".format(version_tuple)
if version_tuple.pre is not None:
    version += version_tuple.pre
if version_tuple.post is not None:
    version += ".post{0.post:d}".format(version_tuple)
if version_tuple.dev is not None:
    version += ".dev{0.dev:d}".format(version_tuple)

info = """\
Summary of the cakemoist configuration
--------------------------------------

cakemoist   %(cakemoist)s
Python      %(python)s
sys.platform    %(platform)s
numpy       %(numpy)s
scipy       %(scipy)s
pandas      %(pandas)s
joblib      %(joblib)s
h5py        %(h5py)s
HDF5        %(hdf5)s
""" % {
    'cakemoist': version,
    'python': sys.version,
    'platform': sys.platform,
    'numpy': numpy.__version__,
    'scipy': scipy.__version__,
    'pandas': pandas.__version__,
    'joblib': joblib.__version__,
    'h5py': h5py.__version__,
    'hdf5': h5py.version.hdf5_version,
}
