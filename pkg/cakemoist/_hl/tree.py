# This file is part of cakemoist, a regression toolkit for filter-cake
# moisture prediction.
#
# Copyright 2026 the cakemoist contributors
#
# License:  Standard 3-clause BSD; see "license.txt" for full license terms
#           and contributor agreement.

"""
    CART decision trees.

    Trees are grown greedily, choosing at each node the split with the
    largest impurity decrease among m_try randomly drawn features:

    "regression"
        Impurity is the sum of squared errors around the node mean; leaves
        predict the mean target.

    "classification"
        Targets are integer bin labels; impurity is the number of samples
        not in the node's modal bin, and leaves predict the modal bin.  Only
        the forest's margin diagnostics use this mode.

    Candidate thresholds are midpoints between adjacent distinct sorted
    values; a sample equal to the threshold goes left.  Ties are broken
    toward the lowest feature index, then the lowest threshold.

    A fitted tree is stored as flat preorder node arrays (feature index -1
    marks a leaf).
"""

from collections import namedtuple
from dataclasses import asdict, dataclass
import logging

import numpy as np

from .. import _errors
from .base import FORMAT_VERSION, as_matrix, as_vector, check_format, derive_rng

logger = logging.getLogger(__name__)

REGRESSION = 'regression'
CLASSIFICATION = 'classification'
MODES = (REGRESSION, CLASSIFICATION)

# Impurity decreases closer than this (relative to the parent impurity)
# count as ties.
TIE_RTOL = 1e-10

SplitRule = namedtuple('SplitRule', ['feature_index', 'threshold'])


@dataclass(frozen=True)
class TreeConfig:

    """ Growth limits for a single tree.

    ``m_try`` of None means every feature is a candidate at every node.
    """

    max_depth: int = None
    min_samples_leaf: int = 1
    min_samples_split: int = 2
    m_try: int = None
    seed: int = 0
    mode: str = REGRESSION

    def validate(self, arity):
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be non-negative or None")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be at least 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be at least 2")
        if self.m_try is not None and not 1 <= self.m_try <= arity:
            raise ValueError("m_try must lie in [1, %d], got %d" % (arity, self.m_try))
        if self.mode not in MODES:
            raise ValueError("unknown tree mode %r" % self.mode)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, doc):
        return cls(**doc)


def _regression_gains(xs, ys, min_leaf):
    """ Impurity decrease of every split position along one sorted feature.

    Position i puts rows 0..i on the left.  Invalid positions get -inf.
    """
    n = ys.shape[0]
    ys = ys - ys.mean()
    csum = np.cumsum(ys)[:-1]
    csq = np.cumsum(ys * ys)[:-1]
    total = ys.sum()
    total_sq = np.dot(ys, ys)
    nl = np.arange(1, n, dtype=np.float64)
    nr = n - nl
    child = (csq - csum * csum / nl) + ((total_sq - csq) - (total - csum) ** 2 / nr)
    parent = total_sq - total * total / n
    gains = parent - child
    valid = (xs[1:] > xs[:-1]) & (nl >= min_leaf) & (nr >= min_leaf)
    return np.where(valid, gains, -np.inf), parent


def _classification_gains(xs, ys, min_leaf, n_classes):
    n = ys.shape[0]
    onehot = np.zeros((n, n_classes))
    onehot[np.arange(n), ys.astype(np.intp)] = 1.0
    left = np.cumsum(onehot, axis=0)[:-1]
    totals = onehot.sum(axis=0)
    right = totals - left
    nl = np.arange(1, n, dtype=np.float64)
    nr = n - nl
    child = (nl - left.max(axis=1)) + (nr - right.max(axis=1))
    parent = n - totals.max()
    gains = parent - child
    valid = (xs[1:] > xs[:-1]) & (nl >= min_leaf) & (nr >= min_leaf)
    return np.where(valid, gains, -np.inf), parent


def _midpoint(lo, hi):
    mid = (lo + hi) / 2.0
    # Adjacent floats can round the midpoint up onto hi.
    return lo if mid >= hi else mid


def find_split(X, y, candidate_features, min_samples_leaf=1,
               mode=REGRESSION, n_classes=None):
    """ Best split of a node and its impurity decrease, or None.

    Returns ``(SplitRule, gain)``.
    """
    best = None
    best_gain = 0.0
    tol = None
    for f in sorted(int(c) for c in candidate_features):
        order = np.argsort(X[:, f], kind='stable')
        xs = X[order, f]
        ys = y[order]
        if mode == REGRESSION:
            gains, parent = _regression_gains(xs, ys, min_samples_leaf)
            if tol is None:
                tol = TIE_RTOL * max(parent, np.finfo(np.float64).tiny)
        else:
            gains, parent = _classification_gains(xs, ys, min_samples_leaf,
                                                  n_classes)
            tol = 0.5
        top = gains.max() if gains.size else -np.inf
        if not top > tol:
            continue
        # Lowest threshold among the near-maximal positions
        pos = int(np.flatnonzero(gains >= top - tol)[0])
        gain = float(gains[pos])
        if best is None or gain > best_gain + tol:
            best = SplitRule(f, float(_midpoint(xs[pos], xs[pos + 1])))
            best_gain = gain
    if best is None:
        return None
    return best, best_gain


def best_split(X, y, candidate_features, min_samples_leaf=1,
               mode=REGRESSION, n_classes=None):
    """ The split maximizing the impurity decrease, or None if no split
    decreases impurity. """
    X = as_matrix(X)
    y = np.asarray(y, dtype=np.float64)
    found = find_split(X, y, candidate_features, min_samples_leaf, mode, n_classes)
    return None if found is None else found[0]


class RegressionTree:

    """
        A fitted tree, stored as preorder node arrays.

        ``impurity`` holds the sum of squared errors of each node
        (classification: its misclassification count) and ``gain`` the
        impurity decrease achieved by each internal node's split.
    """

    def __init__(self, feature, threshold, left, right, value, count,
                 impurity, gain, n_features, mode=REGRESSION, n_classes=None):
        self.feature = np.asarray(feature, dtype=np.intp)
        self.threshold = np.asarray(threshold, dtype=np.float64)
        self.left = np.asarray(left, dtype=np.intp)
        self.right = np.asarray(right, dtype=np.intp)
        self.value = np.asarray(value, dtype=np.float64)
        self.count = np.asarray(count, dtype=np.intp)
        self.impurity = np.asarray(impurity, dtype=np.float64)
        self.gain = np.asarray(gain, dtype=np.float64)
        self.n_features = int(n_features)
        self.mode = mode
        self.n_classes = n_classes
        for arr in (self.feature, self.threshold, self.left, self.right,
                    self.value, self.count, self.impurity, self.gain):
            arr.flags.writeable = False

    @property
    def n_nodes(self):
        return self.feature.shape[0]

    @property
    def n_leaves(self):
        return int(np.count_nonzero(self.feature < 0))

    def is_leaf(self, node):
        return self.feature[node] < 0

    def depth(self, node=0):
        if self.is_leaf(node):
            return 0
        return 1 + max(self.depth(self.left[node]), self.depth(self.right[node]))

    def leaves(self):
        return np.flatnonzero(self.feature < 0)

    def predict(self, X):
        """ Leaf values reached by every row of X """
        X = as_matrix(X, self.n_features)
        node = np.zeros(X.shape[0], dtype=np.intp)
        while True:
            feat = self.feature[node]
            active = np.flatnonzero(feat >= 0)
            if active.size == 0:
                break
            current = node[active]
            go_left = X[active, feat[active]] <= self.threshold[current]
            node[active] = np.where(go_left, self.left[current],
                                    self.right[current])
        return self.value[node]

    def __eq__(self, other):
        if not isinstance(other, RegressionTree):
            return NotImplemented
        return (self.mode == other.mode
                and self.n_features == other.n_features
                and all(np.array_equal(getattr(self, a), getattr(other, a))
                        for a in ('feature', 'threshold', 'left', 'right',
                                  'value', 'count')))

    __hash__ = None

    def __repr__(self):
        return "<RegressionTree (%s): %d nodes, %d leaves>" % (
            self.mode, self.n_nodes, self.n_leaves)

    # --- serialization -------------------------------------------------------

    def _node_dict(self, node):
        doc = {
            'value': float(self.value[node]),
            'count': int(self.count[node]),
            'impurity': float(self.impurity[node]),
        }
        if self.is_leaf(node):
            doc['kind'] = 'leaf'
        else:
            doc.update(
                kind='split',
                feature=int(self.feature[node]),
                threshold=float(self.threshold[node]),
                gain=float(self.gain[node]),
                left=self._node_dict(self.left[node]),
                right=self._node_dict(self.right[node]),
            )
        return doc

    def to_dict(self):
        return {
            'kind': 'tree',
            'format_version': FORMAT_VERSION,
            'mode': self.mode,
            'n_features': self.n_features,
            'n_classes': self.n_classes,
            'root': self._node_dict(0),
        }

    @classmethod
    def from_dict(cls, doc):
        check_format(doc, 'tree')
        arrays = {k: [] for k in ('feature', 'threshold', 'left', 'right',
                                  'value', 'count', 'impurity', 'gain')}

        def visit(node_doc):
            node = len(arrays['feature'])
            for k in arrays:
                arrays[k].append(-1 if k in ('feature', 'left', 'right') else 0.0)
            arrays['value'][node] = node_doc['value']
            arrays['count'][node] = node_doc['count']
            arrays['impurity'][node] = node_doc['impurity']
            if node_doc['kind'] == 'split':
                arrays['feature'][node] = node_doc['feature']
                arrays['threshold'][node] = node_doc['threshold']
                arrays['gain'][node] = node_doc['gain']
                arrays['left'][node] = visit(node_doc['left'])
                arrays['right'][node] = visit(node_doc['right'])
            elif node_doc['kind'] != 'leaf':
                raise ValueError("unknown node kind %r" % node_doc['kind'])
            return node

        visit(doc['root'])
        return cls(n_features=doc['n_features'], mode=doc['mode'],
                   n_classes=doc.get('n_classes'), **arrays)


class _TreeBuilder:

    """ Depth-first, preorder tree growth """

    def __init__(self, X, y, config, rng, n_classes):
        self.X = X
        self.y = y
        self.config = config
        self.rng = rng
        self.n_classes = n_classes
        self.m_try = config.m_try if config.m_try is not None else X.shape[1]
        self.nodes = {k: [] for k in ('feature', 'threshold', 'left', 'right',
                                      'value', 'count', 'impurity', 'gain')}

    def _leaf_stats(self, y):
        if self.config.mode == REGRESSION:
            mean = y.mean()
            return mean, float(np.sum((y - mean) ** 2))
        counts = np.bincount(y.astype(np.intp), minlength=self.n_classes)
        return float(np.argmax(counts)), float(y.shape[0] - counts.max())

    def grow(self, idx, depth):
        cfg = self.config
        nodes = self.nodes
        node = len(nodes['feature'])
        y = self.y[idx]
        value, impurity = self._leaf_stats(y)
        nodes['feature'].append(-1)
        nodes['threshold'].append(0.0)
        nodes['left'].append(-1)
        nodes['right'].append(-1)
        nodes['value'].append(value)
        nodes['count'].append(idx.shape[0])
        nodes['impurity'].append(impurity)
        nodes['gain'].append(0.0)

        if ((cfg.max_depth is not None and depth >= cfg.max_depth)
                or idx.shape[0] < cfg.min_samples_split
                or idx.shape[0] < 2 * cfg.min_samples_leaf
                or impurity <= 0.0):
            return node

        candidates = self.rng.choice(self.X.shape[1], self.m_try, replace=False)
        X = self.X[idx]
        found = find_split(X, y, candidates, cfg.min_samples_leaf,
                           cfg.mode, self.n_classes)
        if found is None:
            return node

        rule, gain = found
        mask = X[:, rule.feature_index] <= rule.threshold
        nodes['feature'][node] = rule.feature_index
        nodes['threshold'][node] = rule.threshold
        nodes['gain'][node] = gain
        nodes['left'][node] = self.grow(idx[mask], depth + 1)
        nodes['right'][node] = self.grow(idx[~mask], depth + 1)
        return node


def fit_tree(X, y, config=None, rng=None, n_classes=None):
    """ Grow a tree on (X, y).

    ``rng`` defaults to a generator seeded from ``config.seed``.  In
    classification mode ``y`` holds integer labels in [0, n_classes).
    """
    if config is None:
        config = TreeConfig()
    X = as_matrix(X)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    if X.shape[0] == 0:
        raise _errors.EmptyDatasetError("empty training set")
    if X.shape[0] != y.shape[0]:
        raise ValueError("%d feature rows but %d targets" % (X.shape[0], y.shape[0]))
    config.validate(X.shape[1])
    if config.mode == CLASSIFICATION:
        if n_classes is None:
            n_classes = int(y.max()) + 1
        if np.any(y < 0) or np.any(y >= n_classes) or np.any(y != np.floor(y)):
            raise ValueError("classification labels must be integers in [0, %d)"
                             % n_classes)
    else:
        n_classes = None
    if rng is None:
        rng = derive_rng(config.seed)

    builder = _TreeBuilder(X, y, config, rng, n_classes)
    builder.grow(np.arange(X.shape[0]), 0)
    return RegressionTree(n_features=X.shape[1], mode=config.mode,
                          n_classes=n_classes, **builder.nodes)


def predict_tree(t, x):
    """ Value of the leaf reached by feature vector x """
    x = as_vector(x, t.n_features)
    node = 0
    while t.feature[node] >= 0:
        if x[t.feature[node]] <= t.threshold[node]:
            node = t.left[node]
        else:
            node = t.right[node]
    return float(t.value[node])
