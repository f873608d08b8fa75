# This file is part of cakemoist, a regression toolkit for filter-cake
# moisture prediction.
#
# Copyright 2026 the cakemoist contributors
#
# License:  Standard 3-clause BSD; see "license.txt" for full license terms
#           and contributor agreement.

"""
    Epsilon-insensitive support vector regression.

    The dual problem is solved in the stacked form with 2N variables
    a = (alpha, alpha*) and labels y = (+1, ..., -1, ...):

        minimize    1/2 a'Qa + p'a
        subject to  y'a = 0,  0 <= a <= C

    where Q[s, t] = y_s y_t K(x_s, x_t), p = (eps - z, eps + z).  Each step
    updates the maximal violating pair (the first-order working set
    selection of sequential minimal optimization) and stops when the
    violation gap falls to ``kkt_tolerance``.  The fitted function is

        f(x) = sum_i beta_i K(x_i, x) + b,   beta = alpha - alpha*
"""

from collections import namedtuple
from dataclasses import asdict, dataclass, field, replace
import itertools
import logging
import warnings

import numpy as np
from scipy.spatial.distance import cdist

from .. import _errors
from ..cakemoist_warnings import CakemoistWarning, ConvergenceWarning
from .base import FORMAT_VERSION, as_matrix, as_vector, check_format
from .dataset import ScaleTag

logger = logging.getLogger(__name__)

KERNELS = ('rbf', 'linear')

# Floor for the curvature of a working pair
TAU = 1e-12

DEFAULT_GRID = {
    'c': (0.1, 1.0, 10.0, 100.0),
    'epsilon': (0.01, 0.05, 0.1),
    'gamma': (0.1, 0.5, 1.0, 2.0, 5.0),
}


@dataclass(frozen=True)
class KernelSpec:

    """ Kernel kind and RBF width.

    A ``gamma`` of None is resolved at fit time to 1 / (arity * mean feature
    variance) of the training data.
    """

    kind: str = 'rbf'
    gamma: float = None

    def __post_init__(self):
        if self.kind not in KERNELS:
            raise ValueError("unknown kernel %r (choose from %s)"
                             % (self.kind, ", ".join(KERNELS)))
        if self.gamma is not None and not self.gamma > 0:
            raise ValueError("gamma must be positive, got %r" % (self.gamma,))

    def resolve(self, X):
        """ Copy with gamma fixed from the training matrix if unset """
        if self.kind != 'rbf' or self.gamma is not None:
            return self
        return replace(self, gamma=default_gamma(X))


def default_gamma(X):
    X = as_matrix(X)
    var = float(np.mean(np.var(X, axis=0)))
    if var <= 0:
        return 1.0
    return 1.0 / (X.shape[1] * var)


def kernel_matrix(k, A, B):
    """ Kernel values between every row of A and every row of B """
    A = as_matrix(A)
    B = as_matrix(B, A.shape[1])
    if k.kind == 'linear':
        return A @ B.T
    if k.gamma is None:
        raise ValueError("rbf kernel has no gamma; resolve it first")
    return np.exp(-k.gamma * cdist(A, B, 'sqeuclidean'))


def kernel_eval(k, x, x2):
    """ K(x, x2) for two feature vectors """
    x = as_vector(x)
    x2 = as_vector(x2, x.shape[0])
    return float(kernel_matrix(k, x.reshape(1, -1), x2.reshape(1, -1))[0, 0])


@dataclass(frozen=True)
class SvrConfig:

    """ Penalty C, tube half-width epsilon and solver limits.

    The solver stops after ``max_passes * 2N`` pair updates at the latest.
    """

    c: float = 1.0
    epsilon: float = 0.01
    kernel: KernelSpec = field(default_factory=KernelSpec)
    kkt_tolerance: float = 1e-3
    max_passes: int = 100

    def __post_init__(self):
        if not self.c > 0:
            raise ValueError("C must be positive, got %r" % (self.c,))
        if not self.epsilon >= 0:
            raise ValueError("epsilon must be non-negative, got %r" % (self.epsilon,))
        if not self.kkt_tolerance > 0:
            raise ValueError("kkt_tolerance must be positive")
        if self.max_passes < 1:
            raise ValueError("max_passes must be at least 1")

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        doc['kernel'] = KernelSpec(**doc['kernel'])
        return cls(**doc)


class SvrModel:

    """
        A fitted support vector regressor.

        Only samples with nonzero dual coefficient are kept;
        ``support_indices`` locates them in the training set.  ``converged``
        is False when the solver hit its iteration cap, in which case
        ``max_violation`` tells how far from optimal the model is.
    """

    def __init__(self, support_vectors, dual_coefficients, bias, config,
                 training_size, support_indices=None, converged=True,
                 max_violation=0.0, n_iter=0, dual_objective=None,
                 train_fingerprint=None, schema_fingerprint=None):
        self.support_vectors = np.asarray(support_vectors, dtype=np.float64)
        self.dual_coefficients = np.asarray(dual_coefficients, dtype=np.float64)
        if self.support_vectors.ndim != 2:
            raise ValueError("support vectors must form a matrix")
        if self.support_vectors.shape[0] != self.dual_coefficients.shape[0]:
            raise ValueError("one dual coefficient per support vector required")
        self.bias = float(bias)
        self.config = config
        self.training_size = int(training_size)
        if support_indices is None:
            support_indices = np.arange(self.dual_coefficients.shape[0])
        self.support_indices = np.asarray(support_indices, dtype=np.intp)
        self.converged = bool(converged)
        self.max_violation = float(max_violation)
        self.n_iter = int(n_iter)
        self.dual_objective = None if dual_objective is None else float(dual_objective)
        self.train_fingerprint = train_fingerprint
        self.schema_fingerprint = schema_fingerprint

    @property
    def n_features(self):
        return self.support_vectors.shape[1]

    @property
    def n_support(self):
        return self.dual_coefficients.shape[0]

    def __repr__(self):
        return "<SvrModel: %d support vectors of %d%s>" % (
            self.n_support, self.training_size,
            "" if self.converged else " (not converged)")

    def predict(self, X):
        X = as_matrix(X, self.n_features)
        if self.n_support == 0:
            return np.full(X.shape[0], self.bias)
        K = kernel_matrix(self.config.kernel, X, self.support_vectors)
        return K @ self.dual_coefficients + self.bias

    def coefficients(self):
        """ Dual coefficient of every training sample (zeros included) """
        beta = np.zeros(self.training_size)
        beta[self.support_indices] = self.dual_coefficients
        return beta

    def to_dict(self):
        return {
            'kind': 'svr',
            'format_version': FORMAT_VERSION,
            'config': self.config.to_dict(),
            'n_features': self.n_features,
            'support_vectors': self.support_vectors.tolist(),
            'dual_coefficients': self.dual_coefficients.tolist(),
            'support_indices': self.support_indices.tolist(),
            'bias': self.bias,
            'training_size': self.training_size,
            'converged': self.converged,
            'max_violation': self.max_violation,
            'n_iter': self.n_iter,
            'dual_objective': self.dual_objective,
            'train_fingerprint': self.train_fingerprint,
            'schema_fingerprint': self.schema_fingerprint,
        }

    @classmethod
    def from_dict(cls, doc):
        check_format(doc, 'svr')
        sv = doc['support_vectors']
        return cls(
            support_vectors=np.array(sv, dtype=np.float64).reshape(len(sv), -1)
            if sv else np.empty((0, doc['n_features'])),
            dual_coefficients=doc['dual_coefficients'],
            bias=doc['bias'],
            config=SvrConfig.from_dict(doc['config']),
            training_size=doc['training_size'],
            support_indices=doc['support_indices'],
            converged=doc['converged'],
            max_violation=doc['max_violation'],
            n_iter=doc['n_iter'],
            dual_objective=doc['dual_objective'],
            train_fingerprint=doc.get('train_fingerprint'),
            schema_fingerprint=doc.get('schema_fingerprint'),
        )


SolverResult = namedtuple('SolverResult',
                          ['beta', 'bias', 'converged', 'gap', 'n_iter', 'objective'])


def _objective(a, G, p):
    # Dual objective in maximization form, -(1/2 a'Qa + p'a)
    return -0.5 * np.dot(a, G + p)


def solve_dual(K, z, c, epsilon, tol, max_iter, check_monotone=False):
    """ Run SMO on a precomputed kernel matrix """
    n = z.shape[0]
    y = np.concatenate([np.ones(n), -np.ones(n)])
    a = np.zeros(2 * n)
    p = np.concatenate([epsilon - z, epsilon + z])
    G = p.copy()
    diag = np.diag(K)
    sample = np.arange(2 * n) % n
    objective = 0.0

    converged = False
    gap = 0.0
    it = 0
    while True:
        up = ((y > 0) & (a < c)) | ((y < 0) & (a > 0))
        low = ((y > 0) & (a > 0)) | ((y < 0) & (a < c))
        v = -y * G
        if not (up.any() and low.any()):
            converged = True
            gap = 0.0
            m_up = M_low = 0.0
            break
        i = int(np.argmax(np.where(up, v, -np.inf)))
        j = int(np.argmin(np.where(low, v, np.inf)))
        m_up, M_low = v[i], v[j]
        gap = m_up - M_low
        if gap <= tol:
            converged = True
            break
        if it >= max_iter:
            break

        si, sj = sample[i], sample[j]
        eta = max(diag[si] + diag[sj] - 2.0 * K[si, sj], TAU)
        bound_i = c - a[i] if y[i] > 0 else a[i]
        bound_j = a[j] if y[j] > 0 else c - a[j]
        step = min(gap / eta, bound_i, bound_j)

        a[i] += y[i] * step
        a[j] -= y[j] * step
        if step == bound_i:
            a[i] = c if y[i] > 0 else 0.0
        if step == bound_j:
            a[j] = 0.0 if y[j] > 0 else c

        delta = step * (K[:, si] - K[:, sj])
        G[:n] += delta
        G[n:] -= delta
        it += 1

        if check_monotone:
            new = _objective(a, G, p)
            assert new >= objective - 1e-12 * max(1.0, abs(objective)), \
                "dual objective decreased from %r to %r" % (objective, new)
            objective = new

    v = -y * G
    free = (a > 0) & (a < c)
    if free.any():
        bias = float(np.mean(v[free]))
    else:
        bias = float((m_up + M_low) / 2.0)
    beta = a[:n] - a[n:]
    return SolverResult(beta, bias, converged, max(0.0, float(gap)), it,
                        float(_objective(a, G, p)))


def fit_svr(train, config=None, check_monotone=False):
    """ Fit an epsilon-SVR to a dataset normalized to [0, 1].

    When the solver does not converge within ``max_passes`` a
    ConvergenceWarning is issued and the returned model is flagged.
    ``check_monotone`` asserts that every update increases the dual
    objective.
    """
    if config is None:
        config = SvrConfig()
    train.require_nonempty()
    if train.scale_tag is not ScaleTag.NORMALIZED:
        warnings.warn("fitting SVR on %s data; normalize first"
                      % train.scale_tag.value, CakemoistWarning, stacklevel=2)
    X = train.features
    z = train.targets
    config = replace(config, kernel=config.kernel.resolve(X))

    K = kernel_matrix(config.kernel, X, X)
    max_iter = config.max_passes * 2 * len(train)
    res = solve_dual(K, z, config.c, config.epsilon, config.kkt_tolerance,
                     max_iter, check_monotone)
    if not res.converged:
        warnings.warn("SMO stopped after %d updates with violation %.3g > %.3g"
                      % (res.n_iter, res.gap, config.kkt_tolerance),
                      ConvergenceWarning, stacklevel=2)
    logger.debug("svr fit: %d updates, gap %.3g, C=%g eps=%g gamma=%s",
                 res.n_iter, res.gap, config.c, config.epsilon, config.kernel.gamma)

    support = np.flatnonzero(res.beta != 0)
    return SvrModel(
        support_vectors=X[support],
        dual_coefficients=res.beta[support],
        bias=res.bias,
        config=config,
        training_size=len(train),
        support_indices=support,
        converged=res.converged,
        max_violation=res.gap,
        n_iter=res.n_iter,
        dual_objective=res.objective,
        train_fingerprint=train.fingerprint(),
        schema_fingerprint=train.schema.fingerprint,
    )


def predict_svr(m, x):
    """ Kernel expansion plus bias at feature vector x """
    x = as_vector(x, m.n_features)
    return float(m.predict(x.reshape(1, -1))[0])


# --- KKT certification -------------------------------------------------------

@dataclass(frozen=True)
class KKTReport:

    """ Per-sample optimality violations of a fitted model.

    ``tube`` is the complementary-slackness violation against the epsilon
    tube, ``box`` the amount by which |beta| exceeds C.
    """

    residuals: np.ndarray
    tube: np.ndarray
    box: np.ndarray
    sum_beta: float
    tolerance: float

    @property
    def violations(self):
        return np.maximum(self.tube, self.box)

    @property
    def max_violation(self):
        return float(max(self.violations.max(initial=0.0), abs(self.sum_beta)))

    @property
    def ok(self):
        return self.max_violation <= self.tolerance

    def to_dict(self):
        return {
            'kind': 'kkt_report',
            'format_version': FORMAT_VERSION,
            'max_violation': self.max_violation,
            'max_box_violation': float(self.box.max(initial=0.0)),
            'max_tube_violation': float(self.tube.max(initial=0.0)),
            'sum_beta': self.sum_beta,
            'tolerance': self.tolerance,
            'ok': self.ok,
            'violations': self.violations.tolist(),
        }


def kkt_report(m, train, config=None):
    """ Check a model against the optimality conditions on its training set.

    For residual r = f(x_i) - z_i the conditions are:

        beta = 0         |r| <= eps
        0 < beta < C     r = -eps
        beta = C         r <= -eps
        -C < beta < 0    r = eps
        beta = -C        r >= eps
    """
    if config is None:
        config = m.config
    if m.train_fingerprint is not None and train.fingerprint() != m.train_fingerprint:
        raise _errors.FingerprintMismatchError(
            "training set does not match the one the model was fitted on")
    if len(train) != m.training_size:
        raise _errors.FingerprintMismatchError(
            "model was fitted on %d samples, got %d" % (m.training_size, len(train)))

    c, eps = config.c, config.epsilon
    beta = m.coefficients()
    r = m.predict(train.features) - train.targets
    tube = np.zeros_like(r)

    at_zero = beta == 0
    pos_free = (beta > 0) & (beta < c)
    at_upper = beta >= c
    neg_free = (beta < 0) & (beta > -c)
    at_lower = beta <= -c

    tube[at_zero] = np.maximum(0.0, np.abs(r[at_zero]) - eps)
    tube[pos_free] = np.abs(r[pos_free] + eps)
    tube[at_upper] = np.maximum(0.0, r[at_upper] + eps)
    tube[neg_free] = np.abs(r[neg_free] - eps)
    tube[at_lower] = np.maximum(0.0, eps - r[at_lower])
    box = np.maximum(0.0, np.abs(beta) - c)

    return KKTReport(residuals=r, tube=tube, box=box, sum_beta=float(beta.sum()),
                     tolerance=config.kkt_tolerance)


# --- Hyperparameter search ---------------------------------------------------

GridScore = namedtuple('GridScore', ['c', 'epsilon', 'gamma', 'fold_mse',
                                     'mean_mse', 'converged'])

GridSearchResult = namedtuple('GridSearchResult', ['best', 'scores'])


def kfold_indices(n, folds, seed):
    """ Validation index sets of a seeded k-fold partition of n samples """
    if folds < 2:
        raise ValueError("need at least 2 folds, got %d" % folds)
    if folds > n:
        raise ValueError("%d folds leave some fold empty with %d samples" % (folds, n))
    perm = np.random.default_rng(seed).permutation(n)
    return [np.sort(f) for f in np.array_split(perm, folds)]


def grid_search(train, c_grid=DEFAULT_GRID['c'], epsilon_grid=DEFAULT_GRID['epsilon'],
                gamma_grid=DEFAULT_GRID['gamma'], folds=5, seed=0, base_config=None):
    """ Cross-validated search over (C, epsilon, gamma).

    Returns ``(best_config, scores)``; scores hold the per-fold validation
    MSE of every combination in grid order.  The best combination has the
    lowest mean MSE, ties going to smaller C, then larger epsilon.  A gamma
    of None in the grid is resolved from each fitting fold in turn.
    """
    if not (len(c_grid) and len(epsilon_grid) and len(gamma_grid)):
        raise ValueError("grids must be non-empty")
    if base_config is None:
        base_config = SvrConfig()
    train.require_nonempty()
    validation = kfold_indices(len(train), folds, seed)
    everything = np.arange(len(train))

    scores = []
    for c, eps, gamma in itertools.product(c_grid, epsilon_grid, gamma_grid):
        gamma = None if gamma is None else float(gamma)
        config = replace(base_config, c=float(c), epsilon=float(eps),
                         kernel=replace(base_config.kernel, gamma=gamma))
        fold_mse = []
        converged = True
        for held_out in validation:
            fit_part = train.subset(np.setdiff1d(everything, held_out))
            check = train.subset(held_out)
            with warnings.catch_warnings(record=True) as caught:
                warnings.simplefilter('always')
                model = fit_svr(fit_part, config)
            if any(issubclass(w.category, ConvergenceWarning) for w in caught):
                converged = False
            resid = model.predict(check.features) - check.targets
            fold_mse.append(float(np.mean(resid ** 2)))
        scores.append(GridScore(float(c), float(eps), gamma, tuple(fold_mse),
                                float(np.mean(fold_mse)), converged))

    best = min(scores, key=lambda s: (s.mean_mse, s.c, -s.epsilon))
    logger.debug("grid search: best C=%g eps=%g gamma=%s (mse %.4g)",
                 best.c, best.epsilon, best.gamma, best.mean_mse)
    best_config = replace(base_config, c=best.c, epsilon=best.epsilon,
                          kernel=replace(base_config.kernel, gamma=best.gamma))
    return GridSearchResult(best_config, scores)
