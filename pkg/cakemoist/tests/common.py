# This file is part of cakemoist, a regression toolkit for filter-cake
# moisture prediction.
#
# Copyright 2026 the cakemoist contributors
#
# License:  Standard 3-clause BSD; see "license.txt" for full license terms
#           and contributor agreement.

import os
import shutil
import tempfile

import numpy as np

import unittest as ut

from cakemoist import Dataset, FeatureSchema, RegressionTree, ScaleTag


def toy_schema(arity):
    """ Schema with features x0..x{arity-1} and target y """
    return FeatureSchema(['x%d' % i for i in range(arity)], 'y')


def toy_dataset(X, y, scale_tag=ScaleTag.NORMALIZED):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    return Dataset(X, y, toy_schema(X.shape[1]), scale_tag)


def leaf_tree(value, n_features=1, mode='regression', n_classes=None):
    """ A tree that is a single leaf predicting value everywhere """
    return RegressionTree(feature=[-1], threshold=[0.0], left=[-1], right=[-1],
                          value=[value], count=[1], impurity=[0.0], gain=[0.0],
                          n_features=n_features, mode=mode, n_classes=n_classes)


class TestCase(ut.TestCase):

    """
        Base class for unit tests.
    """

    @classmethod
    def setUpClass(cls):
        cls.tempdir = tempfile.mkdtemp(prefix='cakemoist-test_')

    @classmethod
    def tearDownClass(cls):
        shutil.rmtree(cls.tempdir)

    def mktemp(self, suffix='.json', prefix='', dir=None):
        if dir is None:
            dir = self.tempdir
        fd, path = tempfile.mkstemp(suffix, prefix, dir=dir)
        os.close(fd)
        os.remove(path)
        return path

    def write_text(self, text, suffix='.csv'):
        path = self.mktemp(suffix)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text)
        return path

    def assertArrayEqual(self, a, b, message=None, precision=None):
        """ Make sure a and b have the same shape and contents, to within
            the given precision (exact if None).
        """
        a = np.asarray(a)
        b = np.asarray(b)
        message = '' if message is None else ' (%s)' % message
        assert a.shape == b.shape, \
            "Shape mismatch (%s vs %s)%s" % (a.shape, b.shape, message)
        if precision is None:
            assert np.array_equal(a, b), \
                "Arrays are not equal%s:\n%r\n%r" % (message, a, b)
        else:
            assert np.all(np.abs(a - b) <= precision), \
                "Arrays differ by more than %g%s:\n%r\n%r" % (precision, message, a, b)
