# This file is part of cakemoist, a regression toolkit for filter-cake
# moisture prediction.
#
# Copyright 2026 the cakemoist contributors
#
# License:  Standard 3-clause BSD; see "license.txt" for full license terms
#           and contributor agreement.

import numpy as np
import pytest

from cakemoist import apply_normalizer, fit_normalizer, split, synthesize


def pytest_addoption(parser):
    parser.addoption(
        '--run-slow', action='store_true', default=False,
        help='Run the long statistical acceptance tests'
    )


def pytest_collection_modifyitems(config, items):
    if not config.getoption('--run-slow'):
        skip = pytest.mark.skip(reason='needs --run-slow')
        for item in items:
            if 'slow' in item.keywords:
                item.add_marker(skip)


@pytest.fixture(scope='session')
def s1():
    return synthesize('s1', 144, 0)


@pytest.fixture(scope='session')
def s1_split(s1):
    """ Normalized (train, test) halves of scenario s1, seed 0 """
    train, test = split(s1, 0.7, 0)
    params = fit_normalizer(train)
    return apply_normalizer(params, train), apply_normalizer(params, test)


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
