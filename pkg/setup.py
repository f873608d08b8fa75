#!/usr/bin/env python

"""
    This is the main setup script for cakemoist.

    Static metadata lives in pyproject.toml; this file only supplies the
    version and the runtime requirements.
"""

from setuptools import setup


VERSION = '1.0.0'


# these are required to use cakemoist
RUN_REQUIRES = [
    # NumPy 1.22 is the first with the method= argument of np.quantile.
    "numpy >=1.22",
    "scipy >=1.7",
    "pandas >=1.5",
    "joblib >=1.0",
    # Only needed for the HDF5 dataset and run archives
    "h5py >=3.6",
]

setup(
  name = 'cakemoist',
  version = VERSION,
  install_requires = RUN_REQUIRES,
)

# see pyproject.toml for static metadata
