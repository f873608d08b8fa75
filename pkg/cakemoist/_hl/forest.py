# This file is part of cakemoist, a regression toolkit for filter-cake
# moisture prediction.
#
# Copyright 2026 the cakemoist contributors
#
# License:  Standard 3-clause BSD; see "license.txt" for full license terms
#           and contributor agreement.

"""
    Random forests: bagged trees with averaged predictions.

    Tree k of a forest draws its bootstrap sample and its per-node feature
    subsets from ``derive_rng(master_seed, k)``.  Each tree's stream depends
    only on (master_seed, k), so the first n trees of a larger forest are
    exactly an n-tree forest, and fitting in parallel gives the same trees as
    fitting sequentially.

    The margin diagnostics (margin, generalization error estimate, strength,
    mean correlation and the strength/correlation bound) are defined for
    classifiers.  They run on a "binned" forest, grown in classification mode
    on equal-frequency bins of the target; the regression forest itself never
    bins.
"""

from dataclasses import asdict, dataclass, field, replace
import logging
import os

import numpy as np
from joblib import Parallel, delayed

from .. import _errors
from .base import (FORMAT_VERSION, as_matrix, as_vector, check_format,
                   derive_rng, finite_or_none)
from .tree import CLASSIFICATION, REGRESSION, RegressionTree, TreeConfig, fit_tree

logger = logging.getLogger(__name__)

DEFAULT_BINS = 3


def default_n_jobs():
    """ Worker count from $CAKEMOIST_N_JOBS, else 1 """
    value = os.environ.get('CAKEMOIST_N_JOBS')
    if not value:
        return 1
    try:
        return int(value)
    except ValueError:
        raise ValueError("CAKEMOIST_N_JOBS must be an integer, got %r" % value) from None


@dataclass(frozen=True)
class ForestConfig:

    """ Forest size, per-tree growth limits and the master seed.

    A ``tree_config.m_try`` of None resolves to max(1, arity // 3).  The
    template's ``seed`` is not used; tree seeds derive from ``master_seed``.
    """

    n_trees: int = 500
    tree_config: TreeConfig = field(default_factory=TreeConfig)
    bootstrap: bool = True
    master_seed: int = 0

    def __post_init__(self):
        if self.n_trees < 1:
            raise ValueError("n_trees must be at least 1, got %r" % (self.n_trees,))
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")

    def resolve_m_try(self, arity):
        if self.tree_config.m_try is not None:
            return self.tree_config.m_try
        return max(1, arity // 3)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, doc):
        doc = dict(doc)
        doc['tree_config'] = TreeConfig.from_dict(doc['tree_config'])
        return cls(**doc)


def _fit_one(X, y, tree_config, master_seed, k, bootstrap, n_classes):
    rng = derive_rng(master_seed, k)
    n = y.shape[0]
    if bootstrap:
        sample = rng.integers(0, n, n)
    else:
        sample = np.arange(n)
    tree = fit_tree(X[sample], y[sample], tree_config, rng=rng, n_classes=n_classes)
    oob = np.setdiff1d(np.arange(n), sample)
    return tree, sample, oob


class Forest:

    """
        A fitted forest.

        ``bootstrap_indices[k]`` lists the training rows tree k was grown on
        (with repeats) and ``oob_indices[k]`` the rows it never saw.  Binned
        forests also carry the ``bin_edges`` used to label their targets.
    """

    def __init__(self, trees, config, bootstrap_indices, oob_indices,
                 n_samples, bin_edges=None, schema_fingerprint=None,
                 train_fingerprint=None):
        self.trees = tuple(trees)
        self.config = config
        self.bootstrap_indices = tuple(np.asarray(i, dtype=np.intp) for i in bootstrap_indices)
        self.oob_indices = tuple(np.asarray(i, dtype=np.intp) for i in oob_indices)
        self.n_samples = int(n_samples)
        self.bin_edges = None if bin_edges is None else np.asarray(bin_edges, dtype=np.float64)
        self.schema_fingerprint = schema_fingerprint
        self.train_fingerprint = train_fingerprint
        if len(self.trees) != config.n_trees:
            raise ValueError("forest holds %d trees but config says %d"
                             % (len(self.trees), config.n_trees))

    @property
    def n_trees(self):
        return len(self.trees)

    @property
    def n_features(self):
        return self.trees[0].n_features

    @property
    def mode(self):
        return self.trees[0].mode

    @property
    def n_classes(self):
        return self.trees[0].n_classes

    def __repr__(self):
        return "<Forest (%s): %d trees>" % (self.mode, self.n_trees)

    def predict_trees(self, X):
        """ (n_trees, n_rows) matrix of per-tree predictions """
        X = as_matrix(X, self.n_features)
        return np.stack([t.predict(X) for t in self.trees])

    def predict(self, X):
        """ Mean tree prediction per row (majority bin for binned forests) """
        if self.mode == CLASSIFICATION:
            return np.argmax(self.votes(X), axis=1).astype(np.float64)
        return self.predict_trees(X).mean(axis=0)

    def votes(self, X):
        """ (n_rows, n_classes) fraction of trees voting for each bin """
        self._require_binned()
        preds = self.predict_trees(X).astype(np.intp)
        counts = np.zeros((preds.shape[1], self.n_classes))
        for row in preds:
            counts[np.arange(preds.shape[1]), row] += 1
        return counts / self.n_trees

    def _require_binned(self):
        if self.mode != CLASSIFICATION:
            raise _errors.ModeError("margin diagnostics need a binned "
                                    "(classification-mode) forest")

    # --- serialization -------------------------------------------------------

    def to_dict(self):
        return {
            'kind': 'forest',
            'format_version': FORMAT_VERSION,
            'config': self.config.to_dict(),
            'n_samples': self.n_samples,
            'bin_edges': None if self.bin_edges is None else self.bin_edges.tolist(),
            'schema_fingerprint': self.schema_fingerprint,
            'train_fingerprint': self.train_fingerprint,
            'trees': [t.to_dict() for t in self.trees],
            'bootstrap_indices': [i.tolist() for i in self.bootstrap_indices],
            'oob_indices': [i.tolist() for i in self.oob_indices],
        }

    @classmethod
    def from_dict(cls, doc):
        check_format(doc, 'forest')
        return cls(
            trees=[RegressionTree.from_dict(t) for t in doc['trees']],
            config=ForestConfig.from_dict(doc['config']),
            bootstrap_indices=doc['bootstrap_indices'],
            oob_indices=doc['oob_indices'],
            n_samples=doc['n_samples'],
            bin_edges=doc.get('bin_edges'),
            schema_fingerprint=doc.get('schema_fingerprint'),
            train_fingerprint=doc.get('train_fingerprint'),
        )


def _fit_arrays(X, y, config, mode, n_classes, n_jobs):
    X = as_matrix(X)
    y = np.asarray(y, dtype=np.float64)
    if X.shape[0] == 0:
        raise _errors.EmptyDatasetError("empty training set")
    tree_config = replace(config.tree_config, mode=mode,
                          m_try=config.resolve_m_try(X.shape[1]))
    tree_config.validate(X.shape[1])
    if n_jobs is None:
        n_jobs = default_n_jobs()

    logger.debug("fitting %d %s trees on %d samples with %d worker(s)",
                 config.n_trees, mode, X.shape[0], n_jobs)
    results = Parallel(n_jobs=n_jobs)(
        delayed(_fit_one)(X, y, tree_config, config.master_seed, k,
                          config.bootstrap, n_classes)
        for k in range(config.n_trees))
    trees, samples, oobs = zip(*results)
    return trees, samples, oobs


def fit_forest(train, config=None, n_jobs=None):
    """ Grow a regression forest on a dataset.

    The result does not depend on ``n_jobs``, which defaults to
    $CAKEMOIST_N_JOBS or 1.
    """
    if config is None:
        config = ForestConfig()
    train.require_nonempty()
    trees, samples, oobs = _fit_arrays(train.features, train.targets, config,
                                       REGRESSION, None, n_jobs)
    return Forest(trees, config, samples, oobs, len(train),
                  schema_fingerprint=train.schema.fingerprint,
                  train_fingerprint=train.fingerprint())


def predict_forest(f, x):
    """ Mean of the tree predictions for feature vector x """
    x = as_vector(x, f.n_features)
    return float(f.predict(x.reshape(1, -1))[0])


def oob_error(f, train):
    """ Mean squared error of out-of-bag predictions on the training set.

    Every sample is predicted by the mean of the trees that did not see it.
    """
    if not f.config.bootstrap:
        raise ValueError("forest was grown without bootstrap; every tree "
                         "saw every sample")
    if len(train) != f.n_samples:
        raise _errors.FingerprintMismatchError(
            "forest was grown on %d samples, got %d" % (f.n_samples, len(train)))
    preds = f.predict_trees(train.features)
    sums = np.zeros(len(train))
    counts = np.zeros(len(train))
    for k, oob in enumerate(f.oob_indices):
        sums[oob] += preds[k, oob]
        counts[oob] += 1
    uncovered = np.flatnonzero(counts == 0)
    if uncovered.size:
        raise _errors.OOBCoverageError(int(uncovered[0]))
    return float(np.mean((sums / counts - train.targets) ** 2))


# --- Binned forests and margin diagnostics -----------------------------------

def bin_edges(targets, k=DEFAULT_BINS):
    """ Equal-frequency edges: the i/k quantiles of the targets, i = 0..k """
    targets = np.asarray(targets, dtype=np.float64)
    if k < 2:
        raise ValueError("need at least 2 bins, got %d" % k)
    if targets.size == 0:
        raise _errors.EmptyDatasetError()
    if np.ptp(targets) == 0:
        raise ValueError("cannot bin constant targets")
    return np.quantile(targets, np.linspace(0.0, 1.0, k + 1))


def apply_bins(targets, edges):
    """ Bin labels of targets; a value equal to an inner edge goes up """
    return np.searchsorted(np.asarray(edges)[1:-1],
                           np.asarray(targets, dtype=np.float64), side='right')


def bin_targets(targets, k=DEFAULT_BINS):
    """ Equal-frequency bin labels of the targets """
    return apply_bins(targets, bin_edges(targets, k))


def fit_binned_forest(train, config=None, k=DEFAULT_BINS, n_jobs=None):
    """ Grow a classification-mode forest on k equal-frequency target bins """
    if config is None:
        config = ForestConfig()
    train.require_nonempty()
    edges = bin_edges(train.targets, k)
    labels = apply_bins(train.targets, edges)
    trees, samples, oobs = _fit_arrays(train.features, labels, config,
                                       CLASSIFICATION, k, n_jobs)
    return Forest(trees, config, samples, oobs, len(train), bin_edges=edges,
                  schema_fingerprint=train.schema.fingerprint,
                  train_fingerprint=train.fingerprint())


def _margins(f, X, y):
    votes = f.votes(X)
    rows = np.arange(votes.shape[0])
    correct = votes[rows, y]
    wrong = votes.copy()
    wrong[rows, y] = -np.inf
    return correct - wrong.max(axis=1)


def margin(f, x, y):
    """ Vote share of the true bin y minus the largest share of another bin """
    f._require_binned()
    x = as_vector(x, f.n_features)
    return float(_margins(f, x.reshape(1, -1), np.array([int(y)]))[0])


def margins(f, eval):
    """ Margins of every sample of a dataset, binned with the forest's edges """
    f._require_binned()
    eval.require_nonempty()
    return _margins(f, eval.features, apply_bins(eval.targets, f.bin_edges))


def generalization_error_estimate(f, eval):
    """ Fraction of evaluation samples with negative margin """
    return float(np.mean(margins(f, eval) < 0))


def _mean_pairwise_correlation(rmg):
    n_trees = rmg.shape[0]
    centered = rmg - rmg.mean(axis=1, keepdims=True)
    std = np.sqrt(np.mean(centered ** 2, axis=1))
    varying = std > 0
    cov = centered @ centered.T / rmg.shape[1]
    with np.errstate(divide='ignore', invalid='ignore'):
        corr = cov / np.outer(std, std)
    # Pairs involving a constant row: identical rows correlate fully,
    # anything else not at all.
    both_const = ~varying[:, None] & ~varying[None, :]
    same = np.all(rmg[:, None, :] == rmg[None, :, :], axis=2)
    corr = np.where(varying[:, None] & varying[None, :], corr,
                    np.where(both_const & same, 1.0, 0.0))
    upper = np.triu_indices(n_trees, k=1)
    return float(np.mean(corr[upper]))


def raw_margins(f, X, y):
    """ Per-tree raw margins, shape (n_trees, n_rows).

    Tree k scores +1 on a row when it votes the true bin, -1 when it votes the
    strongest wrong bin of the forest, 0 otherwise.
    """
    votes = f.votes(X)
    rows = np.arange(votes.shape[0])
    wrong = votes.copy()
    wrong[rows, y] = -np.inf
    runner_up = np.argmax(wrong, axis=1)
    preds = f.predict_trees(X).astype(np.intp)
    return (preds == y).astype(np.float64) - (preds == runner_up)


def strength_correlation_bound(f, eval):
    """ Return (strength, mean correlation, bound).

    Strength is the mean margin, mean correlation the average Pearson
    correlation over all tree pairs of their raw margins, and the bound
    rho * (1 - s**2) / s**2, or inf when the strength is not positive.
    """
    f._require_binned()
    eval.require_nonempty()
    if f.n_trees < 2:
        raise ValueError("mean correlation needs at least two trees")
    y = apply_bins(eval.targets, f.bin_edges)
    s = float(np.mean(_margins(f, eval.features, y)))
    rho = _mean_pairwise_correlation(raw_margins(f, eval.features, y))
    return s, rho, correlation_bound(s, rho)


def correlation_bound(s, rho):
    if s <= 0:
        return float('inf')
    return rho * (1.0 - s * s) / (s * s)


@dataclass(frozen=True)
class TheoryDiagnostics:

    """ Margin-based diagnostics of a binned forest on an evaluation set """

    margins: tuple
    error_estimate: float
    strength: float
    mean_correlation: float
    bound: float
    bin_edges: tuple
    n_trees: int

    @property
    def bound_finite(self):
        return bool(np.isfinite(self.bound))

    def histogram(self, bins=20):
        counts, edges = np.histogram(self.margins, bins=bins, range=(-1.0, 1.0))
        return counts, edges

    def to_dict(self):
        counts, edges = self.histogram()
        return {
            'kind': 'diagnostics',
            'format_version': FORMAT_VERSION,
            'n_trees': self.n_trees,
            'bin_edges': list(self.bin_edges),
            'error_estimate': self.error_estimate,
            'strength': self.strength,
            'mean_correlation': self.mean_correlation,
            'bound': finite_or_none(self.bound),
            'bound_finite': self.bound_finite,
            'margin_histogram': {'counts': counts.tolist(), 'edges': edges.tolist()},
            'margins': list(self.margins),
        }


def diagnose(f, eval):
    """ Collect all margin diagnostics of a binned forest """
    m = margins(f, eval)
    s, rho, bound = strength_correlation_bound(f, eval)
    return TheoryDiagnostics(
        margins=tuple(float(v) for v in m),
        error_estimate=float(np.mean(m < 0)),
        strength=s,
        mean_correlation=rho,
        bound=bound,
        bin_edges=tuple(float(e) for e in f.bin_edges),
        n_trees=f.n_trees,
    )


# --- Convergence and importance ----------------------------------------------

def convergence_curve(train, eval, tree_counts, config=None, seed=None, n_jobs=None):
    """ Evaluation MSE of the first n trees, for each n in tree_counts.

    One forest of max(tree_counts) trees is grown; smaller forests are its
    prefixes.  Returns a list of (n_trees, mse) pairs.
    """
    counts = [int(c) for c in tree_counts]
    if not counts:
        raise ValueError("tree_counts is empty")
    if counts[0] < 1 or any(b <= a for a, b in zip(counts, counts[1:])):
        raise ValueError("tree_counts must be positive and strictly increasing")
    if config is None:
        config = ForestConfig()
    config = replace(config, n_trees=counts[-1])
    if seed is not None:
        config = replace(config, master_seed=seed)
    eval.require_nonempty()

    forest = fit_forest(train, config, n_jobs=n_jobs)
    preds = forest.predict_trees(eval.features)
    prefix_means = np.cumsum(preds, axis=0) / np.arange(1, preds.shape[0] + 1)[:, None]
    curve = []
    for c in counts:
        mse = float(np.mean((prefix_means[c - 1] - eval.targets) ** 2))
        curve.append((c, mse))
        logger.debug("convergence: %d trees, mse %.6g", c, mse)
    return curve


def impurity_importance(f):
    """ Impurity decrease per feature summed over all splits, normalized to
    sum to 1.  A forest with no splits at all scores every feature 0. """
    totals = np.zeros(f.n_features)
    for t in f.trees:
        internal = t.feature >= 0
        np.add.at(totals, t.feature[internal], t.gain[internal])
    total = totals.sum()
    if total <= 0:
        return totals
    return totals / total
