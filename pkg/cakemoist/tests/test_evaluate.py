# This file is part of cakemoist, a regression toolkit for filter-cake
# moisture prediction.
#
# Copyright 2026 the cakemoist contributors
#
# License:  Standard 3-clause BSD; see "license.txt" for full license terms
#           and contributor agreement.

"""
    Metric, evaluation report and feature importance tests.
"""

import csv
import json

import numpy as np
import pytest

from cakemoist import (EmptyDatasetError, PredictionError, ScaleTag, evaluate,
                       mae, mse, permutation_importance, r2_centered, r2_uncentered)
from cakemoist._hl.evaluate import importance_from_scores

from .common import TestCase, toy_dataset


class TestMetrics(TestCase):

    """
        Feature: R^2 (both variants), MSE and MAE
    """

    y = [1.0, 2.0, 3.0]
    y_hat = [1.0, 2.0, 4.0]

    def test_perfect(self):
        for metric, expected in ((r2_uncentered, 1.0), (r2_centered, 1.0), (mse, 0.0), (mae, 0.0)):
            self.assertEqual(metric(self.y, self.y), expected)

    def test_r2_uncentered(self):
        self.assertAlmostEqual(r2_uncentered(self.y, self.y_hat), 1.0 - 1.0 / 14.0)
        self.assertEqual(r2_uncentered([1.0], [0.0]), 0.0)

    def test_r2_centered(self):
        self.assertAlmostEqual(r2_centered(self.y, self.y_hat), 0.5)
        self.assertAlmostEqual(r2_centered(self.y, [2.0, 2.0, 2.0]), 0.0)

    def test_mse(self):
        self.assertAlmostEqual(mse(self.y, self.y_hat), 1.0 / 3.0)
        self.assertAlmostEqual(mse([0.0], [0.039]), 0.001521)

    def test_mae(self):
        self.assertAlmostEqual(mae(self.y, self.y_hat), 1.0 / 3.0)
        self.assertAlmostEqual(mae([0.0, 0.0], [0.7, -0.7]), 0.7)

    def test_length_mismatch(self):
        for metric in (r2_uncentered, r2_centered, mse, mae):
            with self.assertRaises(ValueError):
                metric([1.0, 2.0], [1.0])

    def test_empty(self):
        for metric in (r2_uncentered, r2_centered, mse, mae):
            with self.assertRaises(EmptyDatasetError):
                metric([], [])

    def test_undefined_r2(self):
        with self.assertRaises(ValueError):
            r2_uncentered([0.0, 0.0], [1.0, 1.0])
        with self.assertRaises(ValueError):
            r2_centered([3.0, 3.0], [1.0, 1.0])
        with self.assertRaises(ValueError):
            r2_centered([3.0], [3.0])


@pytest.mark.parametrize('seed', range(10))
def test_metric_properties(seed):
    rng = np.random.default_rng(seed)
    y = rng.random(20) + 0.1
    y_hat = y + 0.1 * rng.standard_normal(20)
    assert mae(y, y_hat) ** 2 <= mse(y, y_hat) + 1e-15
    assert r2_uncentered(y, y_hat) <= 1.0
    # Larger residuals everywhere never score better
    worse = y + 2.0 * (y_hat - y)
    assert mse(y, worse) >= mse(y, y_hat)
    assert mae(y, worse) >= mae(y, y_hat)
    # Sample order does not matter
    perm = rng.permutation(20)
    assert mse(y[perm], y_hat[perm]) == pytest.approx(mse(y, y_hat))


class TestEvaluate(TestCase):

    """
        Feature: evaluation reports of a model on a dataset
    """

    def test_perfect_model(self):
        d = toy_dataset([0.1, 0.5, 0.9], [0.2, 0.6, 0.4])
        report = evaluate(lambda X: d.targets, d)
        self.assertEqual(report.metrics(), {'r2_uncentered': 1.0, 'r2_centered': 1.0,
                                            'mse': 0.0, 'mae': 0.0})
        self.assertEqual(report.n, 3)
        self.assertEqual(report.scale_tag, 'normalized')

    def test_pairs_in_order(self):
        d = toy_dataset([0.0, 1.0], [0.41, 0.7])
        report = evaluate(lambda X: np.where(X[:, 0] == 0.0, 0.38, 0.7), d)
        self.assertEqual(report.pairs[0], (0.41, 0.38))
        self.assertEqual(report.pairs[1], (0.7, 0.7))

    def test_constant_model(self):
        d = toy_dataset([0.0, 1.0, 2.0], [0.1, 0.5, 0.9])
        report = evaluate(lambda X: np.full(X.shape[0], 0.2), d)
        self.assertLessEqual(report.r2_centered, 0.0)

    def test_model_object(self):
        class Half:
            def predict(self, X):
                return X[:, 0] / 2.0
        d = toy_dataset([0.2, 0.4], [0.1, 0.2])
        self.assertEqual(evaluate(Half(), d).mse, 0.0)

    def test_constant_targets(self):
        d = toy_dataset([0.0, 1.0], [0.5, 0.5])
        report = evaluate(lambda X: np.full(2, 0.4), d)
        self.assertTrue(np.isnan(report.r2_centered))
        self.assertIsNone(report.to_dict()['r2_centered'])
        json.dumps(report.to_dict(), allow_nan=False)

    def test_inverse(self):
        d = toy_dataset([0.0, 1.0], [0.0, 1.0])
        report = evaluate(lambda X: np.array([0.0, 0.5]), d,
                          inverse=lambda v: 20.0 + 20.0 * np.asarray(v))
        self.assertEqual(report.units, 'original')
        self.assertEqual(report.pairs[1], (40.0, 30.0))
        self.assertAlmostEqual(report.mae, 5.0)

    def test_failing_row(self):
        def predict(X):
            if np.any(X[:, 0] > 1.5):
                raise ArithmeticError("overflow")
            return X[:, 0]
        d = toy_dataset([0.0, 1.0, 2.0, 3.0], [0.0, 1.0, 2.0, 3.0])
        with self.assertRaises(PredictionError) as cm:
            evaluate(predict, d)
        self.assertIn("sample 2", str(cm.exception))

    def test_nonfinite_prediction(self):
        d = toy_dataset([0.0, 1.0], [0.0, 1.0])
        with self.assertRaises(PredictionError) as cm:
            evaluate(lambda X: np.array([0.0, np.nan]), d)
        self.assertIn("sample 1", str(cm.exception))

    def test_empty(self):
        with self.assertRaises(EmptyDatasetError):
            evaluate(lambda X: X[:, 0], toy_dataset(np.empty((0, 1)), []))

    def test_pairs_csv(self):
        d = toy_dataset([0.0, 1.0], [0.41, 0.7])
        report = evaluate(lambda X: np.array([0.38, 0.1]), d)
        path = self.mktemp('.csv')
        report.write_pairs_csv(path)
        with open(path, newline='') as f:
            rows = list(csv.reader(f))
        self.assertEqual(rows[0], ['actual', 'predicted'])
        self.assertEqual([float(v) for v in rows[1]], [0.41, 0.38])
        self.assertEqual(len(rows), 3)


class TestPermutationImportance(TestCase):

    """
        Feature: signed permutation importance
    """

    def setUp(self):
        rng = np.random.default_rng(0)
        X = np.column_stack([rng.random(40), rng.random(40), np.full(40, 150.0)])
        self.data = toy_dataset(X, X[:, 0])

    def test_identity_model(self):
        report = permutation_importance(lambda X: X[:, 0], self.data, seed=1)
        self.assertEqual(report.ranked()[0].feature, 'x0')
        self.assertEqual(report['x0'].sign, 1)
        self.assertGreater(report['x0'].magnitude, 0.0)

    def test_ignored_feature(self):
        report = permutation_importance(lambda X: X[:, 0], self.data)
        self.assertEqual(report['x1'].magnitude, 0.0)
        self.assertEqual(report['x1'].std, 0.0)

    def test_constant_column(self):
        report = permutation_importance(lambda X: X[:, 0] + X[:, 2], self.data)
        self.assertEqual(report['x2'].magnitude, 0.0)
        self.assertEqual(report['x2'].sign, 0)

    def test_negative_sign(self):
        report = permutation_importance(lambda X: 1.0 - X[:, 1], self.data)
        self.assertEqual(report['x1'].sign, -1)

    def test_deterministic(self):
        predict = lambda X: X[:, 0] + 0.3 * X[:, 1]
        a = permutation_importance(predict, self.data, seed=4, repeats=3)
        b = permutation_importance(predict, self.data, seed=4, repeats=3)
        self.assertEqual(a.to_dict(), b.to_dict())

    def test_report(self):
        report = permutation_importance(lambda X: X[:, 0], self.data, seed=2, repeats=4)
        doc = json.loads(json.dumps(report.to_dict()))
        self.assertEqual(doc['method'], 'permutation')
        self.assertEqual(doc['repeats'], 4)
        self.assertEqual(doc['features'][0]['feature'], 'x0')
        self.assertEqual(list(report.to_frame()['feature'])[0], 'x0')

    def test_preconditions(self):
        with self.assertRaises(EmptyDatasetError):
            permutation_importance(lambda X: X[:, 0], toy_dataset(np.empty((0, 1)), []))
        with self.assertRaises(ValueError):
            permutation_importance(lambda X: X[:, 0], toy_dataset([0.5], [0.5]))
        with self.assertRaises(ValueError):
            permutation_importance(lambda X: X[:, 0], self.data, repeats=0)

    def test_from_scores(self):
        report = importance_from_scores(['a', 'b'], [0.25, 0.75])
        self.assertEqual(report.method, 'impurity')
        self.assertEqual([f.feature for f in report.ranked()], ['b', 'a'])
        with self.assertRaises(KeyError):
            report['c']
