# This file is part of cakemoist, a regression toolkit for filter-cake
# moisture prediction.
#
# Copyright 2026 the cakemoist contributors
#
# License:  Standard 3-clause BSD; see "license.txt" for full license terms
#           and contributor agreement.

"""
    Support vector regression tests.

    The SMO solver is checked against an accelerated projected-gradient
    solution of the same dual problem on small training sets.
"""

import json
import warnings

import numpy as np
import pytest

from cakemoist import (CakemoistWarning, ConvergenceWarning, FingerprintMismatchError,
                       KernelSpec, ScaleTag, SvrConfig, SvrModel, fit_svr,
                       grid_search, kernel_eval, kkt_report, predict_svr)
from cakemoist._hl.svr import default_gamma, kernel_matrix, kfold_indices

from .common import TestCase, toy_dataset


def _project(v, y, c):
    """ Euclidean projection onto {0 <= a <= c, y'a = 0}.

    The result is clip(v - lam * y, 0, c) for the lam where y'a crosses
    zero; y'a is piecewise linear and nonincreasing in lam, so the root is
    found between two sorted breakpoints.
    """
    breaks = np.sort(np.concatenate([y * v, y * v - y * c]))
    a = np.clip(v[None, :] - breaks[:, None] * y[None, :], 0.0, c)
    g = a @ y
    k = int(np.flatnonzero(g >= 0).max())
    if g[k] == 0 or k == breaks.shape[0] - 1:
        lam = breaks[k]
    else:
        lam = breaks[k] + g[k] * (breaks[k + 1] - breaks[k]) / (g[k] - g[k + 1])
    return np.clip(v - lam * y, 0.0, c)


def dual_oracle(K, z, c, epsilon, iterations=20000):
    """ Maximum of the SVR dual by FISTA (with adaptive restart) """
    n = z.shape[0]
    y = np.concatenate([np.ones(n), -np.ones(n)])
    Q = np.outer(y, y) * np.tile(K, (2, 2))
    p = np.concatenate([epsilon - z, epsilon + z])
    step = 1.0 / max(np.linalg.eigvalsh(Q).max(), 1e-12)
    a = np.zeros(2 * n)
    w = a.copy()
    t = 1.0
    for _ in range(iterations):
        a_next = _project(w - step * (Q @ w + p), y, c)
        if np.dot(w - a_next, a_next - a) > 0:
            t = 1.0
            w = a_next
        else:
            t_next = (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0
            w = a_next + (t - 1.0) / t_next * (a_next - a)
            t = t_next
        a = a_next
    return -(0.5 * a @ Q @ a + p @ a)


def random_normalized(seed, n=30, arity=2):
    rng = np.random.default_rng(seed)
    X = rng.random((n, arity))
    y = np.clip(0.5 + 0.4 * np.sin(3.0 * X[:, 0]) * X[:, -1]
                + 0.05 * rng.standard_normal(n), 0.0, 1.0)
    return toy_dataset(X, y)


class TestKernel(TestCase):

    """
        Feature: kernel functions
    """

    def test_rbf_same_point(self):
        k = KernelSpec('rbf', 0.7)
        self.assertEqual(kernel_eval(k, [0.3, 0.2], [0.3, 0.2]), 1.0)

    def test_rbf_value(self):
        k = KernelSpec('rbf', 1.0)
        self.assertAlmostEqual(kernel_eval(k, [0.0], [1.0]), np.exp(-1.0))
        self.assertAlmostEqual(kernel_eval(k, [0.0, 0.0], [1.0, 1.0]), np.exp(-2.0))

    def test_linear(self):
        self.assertEqual(kernel_eval(KernelSpec('linear'), [1.0, 2.0], [3.0, 4.0]), 11.0)

    def test_unknown_kind(self):
        with self.assertRaises(ValueError):
            KernelSpec('poly')

    def test_bad_gamma(self):
        with self.assertRaises(ValueError):
            KernelSpec('rbf', 0.0)

    def test_unresolved_gamma(self):
        with self.assertRaises(ValueError):
            kernel_eval(KernelSpec('rbf'), [0.0], [1.0])

    def test_arity(self):
        with self.assertRaises(ValueError):
            kernel_eval(KernelSpec('linear'), [1.0, 2.0], [3.0])

    def test_default_gamma(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0]])
        self.assertAlmostEqual(default_gamma(X), 1.0 / (2 * 0.25))
        self.assertEqual(default_gamma(np.ones((3, 2))), 1.0)
        self.assertEqual(KernelSpec().resolve(X).gamma, default_gamma(X))

    def test_matrix_symmetric(self):
        X = np.random.default_rng(0).random((6, 3))
        K = kernel_matrix(KernelSpec('rbf', 2.0), X, X)
        self.assertArrayEqual(K, K.T, precision=1e-15)
        self.assertArrayEqual(np.diag(K), np.ones(6), precision=1e-15)


class TestPredict(TestCase):

    """
        Feature: kernel expansion plus bias
    """

    def test_no_support_vectors(self):
        m = SvrModel(np.empty((0, 2)), [], 0.33, SvrConfig(), 5)
        self.assertEqual(predict_svr(m, [0.1, 0.9]), 0.33)

    def test_single_support_vector(self):
        m = SvrModel([[0.2, 0.4]], [1.0], 0.0,
                     SvrConfig(kernel=KernelSpec('rbf', 1.0)), 1)
        self.assertAlmostEqual(predict_svr(m, [0.2, 0.4]), 1.0)

    def test_two_support_vectors(self):
        m = SvrModel([[0.0], [1.0]], [0.5, -0.25], 0.1,
                     SvrConfig(kernel=KernelSpec('rbf', 1.0)), 2)
        expected = 0.5 * np.exp(-0.25) - 0.25 * np.exp(-0.25) + 0.1
        self.assertAlmostEqual(predict_svr(m, [0.5]), expected)
        expected = 0.5 * np.exp(-1.0) - 0.25 + 0.1
        self.assertAlmostEqual(predict_svr(m, [1.0]), expected)

    def test_coefficients(self):
        m = SvrModel([[0.0], [1.0]], [0.5, -0.25], 0.0, SvrConfig(), 4,
                     support_indices=[1, 3])
        self.assertArrayEqual(m.coefficients(), [0.0, 0.5, 0.0, -0.25])

    def test_arity(self):
        m = SvrModel([[0.0]], [1.0], 0.0, SvrConfig(kernel=KernelSpec('rbf', 1.0)), 1)
        with self.assertRaises(ValueError):
            predict_svr(m, [0.0, 1.0])


class TestFit(TestCase):

    """
        Feature: SMO fitting of the dual problem
    """

    def test_constant_targets(self):
        d = toy_dataset(np.random.default_rng(0).random((8, 2)), np.full(8, 0.4))
        m = fit_svr(d, SvrConfig(epsilon=0.1, kernel=KernelSpec('rbf', 1.0)))
        self.assertEqual(m.n_support, 0)
        self.assertAlmostEqual(m.bias, 0.4)
        self.assertArrayEqual(m.predict(d.features), np.full(8, 0.4), precision=1e-12)
        self.assertTrue(m.converged)

    def test_kkt_after_fit(self):
        d = random_normalized(1)
        m = fit_svr(d, SvrConfig(c=10.0, epsilon=0.05, kernel=KernelSpec('rbf', 2.0)))
        self.assertTrue(m.converged)
        report = kkt_report(m, d)
        self.assertTrue(report.ok, report.to_dict())
        self.assertLessEqual(report.max_violation, m.config.kkt_tolerance)
        self.assertAlmostEqual(report.sum_beta, 0.0, delta=1e-9)

    def test_box(self):
        d = random_normalized(2)
        m = fit_svr(d, SvrConfig(c=0.5, kernel=KernelSpec('rbf', 1.0)))
        self.assertTrue(np.all(np.abs(m.dual_coefficients) <= 0.5 + 1e-12))

    def test_free_vectors_on_tube(self):
        d = random_normalized(3)
        config = SvrConfig(c=5.0, epsilon=0.05, kernel=KernelSpec('rbf', 1.0),
                           kkt_tolerance=1e-6)
        m = fit_svr(d, config)
        beta = m.coefficients()
        free = (np.abs(beta) > 0) & (np.abs(beta) < config.c)
        self.assertTrue(free.any())
        r = m.predict(d.features) - d.targets
        self.assertArrayEqual(np.abs(r[free]), np.full(free.sum(), 0.05), precision=1e-5)

    def test_inside_tube_not_support(self):
        d = random_normalized(4)
        m = fit_svr(d, SvrConfig(c=1.0, epsilon=0.1, kernel=KernelSpec('rbf', 1.0),
                                 kkt_tolerance=1e-6))
        r = m.predict(d.features) - d.targets
        inside = np.abs(r) < 0.1 - 1e-4
        self.assertTrue(np.all(m.coefficients()[inside] == 0))

    def test_monotone_objective(self):
        d = random_normalized(5, n=15)
        fit_svr(d, SvrConfig(c=3.0, kernel=KernelSpec('rbf', 1.0)), check_monotone=True)

    def test_deterministic(self):
        d = random_normalized(6)
        config = SvrConfig(kernel=KernelSpec('rbf', 1.0))
        self.assertEqual(fit_svr(d, config).to_dict(), fit_svr(d, config).to_dict())

    def test_gamma_resolved(self):
        d = random_normalized(7)
        m = fit_svr(d, SvrConfig())
        self.assertAlmostEqual(m.config.kernel.gamma, default_gamma(d.features))

    def test_unnormalized_warns(self):
        d = toy_dataset([0.0, 1.0, 2.0], [26.0, 33.0, 39.0], ScaleTag.PERCENT)
        with self.assertWarns(CakemoistWarning):
            fit_svr(d, SvrConfig(kernel=KernelSpec('rbf', 1.0)))

    def test_iteration_cap(self):
        d = random_normalized(8)
        config = SvrConfig(c=100.0, epsilon=0.001, kernel=KernelSpec('rbf', 5.0),
                           kkt_tolerance=1e-12, max_passes=1)
        with self.assertWarns(ConvergenceWarning):
            m = fit_svr(d, config)
        self.assertFalse(m.converged)
        self.assertGreater(m.max_violation, 1e-12)
        self.assertEqual(m.n_iter, 2 * len(d))

    def test_json_roundtrip(self):
        d = random_normalized(9)
        m = fit_svr(d, SvrConfig(kernel=KernelSpec('rbf', 1.0)))
        back = SvrModel.from_dict(json.loads(json.dumps(m.to_dict(), allow_nan=False)))
        self.assertArrayEqual(back.predict(d.features), m.predict(d.features))
        self.assertEqual(back.config, m.config)

    def test_bad_config(self):
        for kwargs in ({'c': 0.0}, {'epsilon': -0.1}, {'kkt_tolerance': 0.0},
                       {'max_passes': 0}):
            with self.assertRaises(ValueError):
                SvrConfig(**kwargs)


@pytest.mark.parametrize('seed', range(20))
def test_dual_matches_projected_gradient(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    X = rng.random((n, 2))
    z = rng.random(n)
    c = float(rng.choice([0.1, 1.0, 10.0]))
    epsilon = float(rng.choice([0.0, 0.01, 0.1]))
    kernel = KernelSpec('rbf', float(rng.choice([0.5, 1.0, 5.0])))
    config = SvrConfig(c=c, epsilon=epsilon, kernel=kernel, kkt_tolerance=1e-8,
                       max_passes=10000)
    m = fit_svr(toy_dataset(X, z), config)
    K = kernel_matrix(kernel, X, X)
    assert m.dual_objective == pytest.approx(dual_oracle(K, z, c, epsilon), abs=1e-6)


class TestKKTReport(TestCase):

    """
        Feature: certifying a model against the optimality conditions
    """

    def setUp(self):
        self.data = random_normalized(10)
        self.model = fit_svr(self.data, SvrConfig(c=1.0, epsilon=0.05,
                                                  kernel=KernelSpec('rbf', 1.0)))

    def test_corrupted_coefficient(self):
        m = self.model
        beta = m.dual_coefficients.copy()
        beta[0] = 2.0 * m.config.c
        bad = SvrModel(m.support_vectors, beta, m.bias, m.config, m.training_size,
                       m.support_indices, train_fingerprint=m.train_fingerprint)
        report = kkt_report(bad, self.data)
        index = int(m.support_indices[0])
        self.assertAlmostEqual(report.box[index], m.config.c)
        self.assertFalse(report.ok)
        self.assertEqual(np.count_nonzero(report.box), 1)

    def test_other_training_set(self):
        other = random_normalized(11)
        with self.assertRaises(FingerprintMismatchError):
            kkt_report(self.model, other)

    def test_document(self):
        doc = kkt_report(self.model, self.data).to_dict()
        self.assertEqual(doc['kind'], 'kkt_report')
        self.assertEqual(len(doc['violations']), len(self.data))
        self.assertTrue(doc['ok'])
        json.dumps(doc, allow_nan=False)


class TestGridSearch(TestCase):

    """
        Feature: cross-validated hyperparameter search
    """

    def test_single_point(self):
        d = random_normalized(12, n=20)
        best, scores = grid_search(d, [3.0], [0.05], [2.0], folds=4)
        self.assertEqual((best.c, best.epsilon, best.kernel.gamma), (3.0, 0.05, 2.0))
        self.assertEqual(len(scores), 1)
        self.assertEqual(len(scores[0].fold_mse), 4)

    def test_prefers_exact_fit(self):
        rng = np.random.default_rng(13)
        x = rng.random(20)
        d = toy_dataset(x, 0.5 * x)
        base = SvrConfig(kernel=KernelSpec('linear'), kkt_tolerance=1e-6)
        best, scores = grid_search(d, [0.001, 10.0], [0.0], [1.0], folds=4,
                                   base_config=base)
        self.assertEqual(best.c, 10.0)
        self.assertEqual(best.kernel.kind, 'linear')

    def test_grid_order_and_shape(self):
        d = random_normalized(14, n=20)
        best, scores = grid_search(d, [1.0, 10.0], [0.01, 0.1], [0.5, 2.0], folds=3)
        self.assertEqual(len(scores), 8)
        self.assertEqual([(s.c, s.epsilon, s.gamma) for s in scores][:2],
                         [(1.0, 0.01, 0.5), (1.0, 0.01, 2.0)])
        self.assertTrue(all(len(s.fold_mse) == 3 for s in scores))
        self.assertEqual(min(s.mean_mse for s in scores),
                         next(s.mean_mse for s in scores
                              if (s.c, s.epsilon, s.gamma)
                              == (best.c, best.epsilon, best.kernel.gamma)))

    def test_default_gamma_in_grid(self):
        d = random_normalized(16, n=20)
        best, scores = grid_search(d, [1.0], [0.01], [None, 1.0], folds=4)
        self.assertEqual([s.gamma for s in scores], [None, 1.0])
        self.assertTrue(all(np.isfinite(s.mean_mse) for s in scores))
        # gamma left unset fits exactly like an explicit default gamma per fold
        fold = kfold_indices(len(d), 4, 0)[0]
        fit_part = d.subset(np.setdiff1d(np.arange(len(d)), fold))
        explicit = fit_svr(fit_part, SvrConfig(kernel=KernelSpec(
            gamma=default_gamma(fit_part.features))))
        implicit = fit_svr(fit_part, SvrConfig())
        check = d.subset(fold)
        self.assertAlmostEqual(
            scores[0].fold_mse[0],
            float(np.mean((implicit.predict(check.features) - check.targets) ** 2)))
        self.assertArrayEqual(implicit.predict(check.features),
                              explicit.predict(check.features), precision=1e-12)

    def test_empty_grid(self):
        with self.assertRaises(ValueError):
            grid_search(random_normalized(15), [], [0.1], [1.0])

    def test_folds(self):
        folds = kfold_indices(10, 3, 0)
        self.assertEqual(sorted(np.concatenate(folds)), list(range(10)))
        self.assertEqual(sorted(len(f) for f in folds), [3, 3, 4])
        with self.assertRaises(ValueError):
            kfold_indices(2, 3, 0)
        with self.assertRaises(ValueError):
            kfold_indices(10, 1, 0)


def test_scenario_grid(s1_split):
    """ A 2x2x2 grid on scenario data scores 8 combinations on 5 folds """
    train, _ = s1_split
    with warnings.catch_warnings():
        warnings.simplefilter('ignore', ConvergenceWarning)
        best, scores = grid_search(train, [1.0, 10.0], [0.01, 0.1], [0.5, 2.0])
    assert len(scores) == 8
    assert all(len(s.fold_mse) == 5 for s in scores)
    assert best.c in (1.0, 10.0)
