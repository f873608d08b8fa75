# This file is part of cakemoist, a regression toolkit for filter-cake
# moisture prediction.
#
# Copyright 2026 the cakemoist contributors
#
# License:  Standard 3-clause BSD; see "license.txt" for full license terms
#           and contributor agreement.

"""
    Regression metrics, evaluation reports and feature importance.

    Two coefficients of determination are reported side by side:
    ``r2_uncentered`` divides the residual sum of squares by the uncentered sum
    of squared targets, ``r2_centered`` by the sum of squares around the
    target mean (the usual definition).
"""

from collections import namedtuple
from dataclasses import dataclass
import logging

import numpy as np
import pandas as pd
from scipy.stats import spearmanr

from .. import _errors
from .base import FORMAT_VERSION, derive_rng, finite_or_none

logger = logging.getLogger(__name__)

# Spearman correlations below this are reported as sign 0.
SIGN_THRESHOLD = 0.05

DEFAULT_REPEATS = 10


def _pair(y, y_hat):
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    y_hat = np.asarray(y_hat, dtype=np.float64).reshape(-1)
    if y.shape != y_hat.shape:
        raise ValueError("length mismatch: %d targets, %d predictions"
                         % (y.shape[0], y_hat.shape[0]))
    if y.shape[0] == 0:
        raise _errors.EmptyDatasetError("no samples to score")
    return y, y_hat


def r2_uncentered(y, y_hat):
    """ 1 - sum((y - y_hat)**2) / sum(y**2) """
    y, y_hat = _pair(y, y_hat)
    total = np.dot(y, y)
    if total == 0:
        raise ValueError("all targets are zero")
    return float(1.0 - np.sum((y - y_hat) ** 2) / total)


def r2_centered(y, y_hat):
    """ 1 - sum((y - y_hat)**2) / sum((y - mean(y))**2) """
    y, y_hat = _pair(y, y_hat)
    if y.shape[0] < 2:
        raise ValueError("centered R^2 needs at least two samples")
    total = np.sum((y - y.mean()) ** 2)
    if total == 0:
        raise ValueError("targets are constant")
    return float(1.0 - np.sum((y - y_hat) ** 2) / total)


def mse(y, y_hat):
    y, y_hat = _pair(y, y_hat)
    return float(np.mean((y - y_hat) ** 2))


def mae(y, y_hat):
    y, y_hat = _pair(y, y_hat)
    return float(np.mean(np.abs(y - y_hat)))


def _undefined(metric, y, y_hat):
    try:
        return metric(y, y_hat)
    except ValueError as e:
        logger.info("%s undefined: %s", metric.__name__, e)
        return float('nan')


@dataclass(frozen=True)
class EvalReport:

    """ Metrics and (actual, predicted) pairs of one model on one dataset.

    An R^2 variant that is undefined for the data (constant or all-zero
    targets) is NaN and serializes as null.
    """

    r2_uncentered: float
    r2_centered: float
    mse: float
    mae: float
    n: int
    pairs: tuple
    scale_tag: str
    units: str = 'normalized'

    def metrics(self):
        return {'r2_uncentered': self.r2_uncentered, 'r2_centered': self.r2_centered,
                'mse': self.mse, 'mae': self.mae}

    def to_dict(self):
        return {
            'kind': 'eval_report',
            'format_version': FORMAT_VERSION,
            'r2_uncentered': finite_or_none(self.r2_uncentered),
            'r2_centered': finite_or_none(self.r2_centered),
            'mse': self.mse,
            'mae': self.mae,
            'n': self.n,
            'scale_tag': self.scale_tag,
            'units': self.units,
            'pairs': [list(p) for p in self.pairs],
        }

    def pairs_frame(self):
        return pd.DataFrame(list(self.pairs), columns=['actual', 'predicted'])

    def write_pairs_csv(self, path):
        """ Write the pairs as CSV with header ``actual,predicted`` """
        frame = self.pairs_frame()
        for col in frame.columns:
            frame[col] = [repr(float(v)) for v in frame[col]]
        frame.to_csv(path, index=False, lineterminator='\n')


def _predictor(predict):
    return predict.predict if hasattr(predict, 'predict') else predict


def _run_predictions(predict, X):
    """ Batch predictions; on failure, find the first sample that fails """
    try:
        preds = np.asarray(predict(X), dtype=np.float64).reshape(-1)
    except Exception as exc:
        for i in range(X.shape[0]):
            try:
                predict(X[i:i + 1])
            except Exception as row_exc:
                raise _errors.PredictionError(i, row_exc) from row_exc
        raise _errors.PredictionError(None, exc) from exc
    if preds.shape[0] != X.shape[0]:
        raise _errors.PredictionError(
            None, "got %d predictions for %d samples" % (preds.shape[0], X.shape[0]))
    bad = np.flatnonzero(~np.isfinite(preds))
    if bad.size:
        raise _errors.PredictionError(int(bad[0]), "non-finite prediction")
    return preds


def evaluate(predict, data, inverse=None, units=None):
    """ Score a model (or prediction function) on a dataset.

    ``inverse``, if given, maps target values to other units (e.g. undoes
    the normalization) before scoring; ``units`` labels the result.
    """
    data.require_nonempty()
    predict = _predictor(predict)
    y = data.targets
    y_hat = _run_predictions(predict, data.features)
    if inverse is not None:
        y = np.asarray(inverse(y), dtype=np.float64)
        y_hat = np.asarray(inverse(y_hat), dtype=np.float64)
        units = units or 'original'
    return EvalReport(
        r2_uncentered=_undefined(r2_uncentered, y, y_hat),
        r2_centered=_undefined(r2_centered, y, y_hat),
        mse=mse(y, y_hat),
        mae=mae(y, y_hat),
        n=len(data),
        pairs=tuple((float(a), float(p)) for a, p in zip(y, y_hat)),
        scale_tag=data.scale_tag.value,
        units=units or 'normalized',
    )


# --- Importance --------------------------------------------------------------

FeatureImportance = namedtuple('FeatureImportance',
                               ['feature', 'magnitude', 'sign', 'std'])


@dataclass(frozen=True)
class ImportanceReport:

    """ Per-feature importance scores, in schema order.

    ``method`` is "permutation" or "impurity"; impurity scores carry no
    sign or spread.
    """

    features: tuple
    method: str
    repeats: int = None
    seed: int = None

    def __getitem__(self, name):
        for f in self.features:
            if f.feature == name:
                return f
        raise KeyError(name)

    def ranked(self):
        """ Features by descending magnitude (schema order among equals) """
        return sorted(self.features, key=lambda f: -f.magnitude)

    def to_frame(self):
        frame = pd.DataFrame([f._asdict() for f in self.ranked()])
        return frame.reset_index(drop=True)

    def to_dict(self):
        return {
            'kind': 'importance',
            'format_version': FORMAT_VERSION,
            'method': self.method,
            'repeats': self.repeats,
            'seed': self.seed,
            'features': [f._asdict() for f in self.ranked()],
        }


def importance_from_scores(names, scores, method='impurity'):
    return ImportanceReport(
        features=tuple(FeatureImportance(n, float(s), 0, 0.0)
                       for n, s in zip(names, scores)),
        method=method)


def _sign(column, predictions):
    if np.ptp(column) == 0 or np.ptp(predictions) == 0:
        return 0
    rho = spearmanr(column, predictions)[0]
    if not np.isfinite(rho) or abs(rho) < SIGN_THRESHOLD:
        return 0
    return 1 if rho > 0 else -1


def permutation_importance(predict, data, seed=0, repeats=DEFAULT_REPEATS):
    """ Signed permutation importance of every feature.

    The magnitude of feature j is the mean increase in MSE when column j is
    shuffled, floored at 0; repeat r of feature j shuffles with
    ``derive_rng(seed, j, r)``.  The sign is that of the Spearman
    correlation between the feature and the model's predictions.
    """
    data.require_nonempty()
    if len(data) < 2:
        raise ValueError("permutation importance needs at least two samples")
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    predict = _predictor(predict)
    X = data.features
    y = data.targets
    n = len(data)
    baseline_pred = _run_predictions(predict, X)
    baseline = mse(y, baseline_pred)

    results = []
    for j, name in enumerate(data.schema.names):
        column = X[:, j]
        deltas = np.empty(repeats)
        for r in range(repeats):
            rng = derive_rng(seed, j, r)
            shuffled = np.array(X)
            shuffled[:, j] = column[rng.permutation(n)]
            deltas[r] = mse(y, _run_predictions(predict, shuffled)) - baseline
        magnitude = max(0.0, float(np.mean(deltas)))
        results.append(FeatureImportance(name, magnitude,
                                         _sign(column, baseline_pred),
                                         float(np.std(deltas))))
        logger.debug("importance %s: %.4g", name, magnitude)
    return ImportanceReport(tuple(results), 'permutation', repeats, seed)
