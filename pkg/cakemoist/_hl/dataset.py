# This file is part of cakemoist, a regression toolkit for filter-cake
# moisture prediction.
#
# Copyright 2026 the cakemoist contributors
#
# License:  Standard 3-clause BSD; see "license.txt" for full license terms
#           and contributor agreement.

"""
    Implements the Dataset object and the operations of the data layer:
    CSV ingestion, descriptive statistics, min-max normalization and seeded
    train/test splitting.
"""

from collections import namedtuple
from dataclasses import dataclass
import enum
import logging
import math
import os
import re

import numpy as np
import pandas as pd

from .. import _errors
from .base import array_fingerprint, as_matrix, schema_fingerprint

logger = logging.getLogger(__name__)


class ScaleTag(str, enum.Enum):

    """ Units the target (and features) of a dataset are expressed in """

    PERCENT = 'percent'
    UNIT_FRACTION = 'unit_fraction'
    NORMALIZED = 'normalized'


# Command-line names of the scales raw data can come in
SCALES = {'percent': ScaleTag.PERCENT, 'fraction': ScaleTag.UNIT_FRACTION}


class FeatureSchema:

    """
        Ordered feature names plus the target name.

        The order is part of the schema; two schemas with the same names in a
        different order are different schemas.
    """

    def __init__(self, names, target_name):
        names = tuple(str(n) for n in names)
        if len(names) == 0:
            raise ValueError("a schema needs at least one feature")
        if len(set(names)) != len(names):
            raise ValueError("feature names must be unique: %r" % (names,))
        if target_name in names:
            raise ValueError("target %r is also a feature name" % target_name)
        self._names = names
        self._target_name = str(target_name)

    @property
    def names(self):
        return self._names

    @property
    def target_name(self):
        return self._target_name

    @property
    def arity(self):
        return len(self._names)

    @property
    def columns(self):
        """ Feature names followed by the target name """
        return self._names + (self._target_name,)

    def index(self, column):
        """ Position of a feature name in the schema """
        if isinstance(column, (int, np.integer)):
            if not 0 <= column < self.arity:
                raise IndexError("feature index %d out of range" % column)
            return int(column)
        try:
            return self._names.index(column)
        except ValueError:
            raise KeyError("no feature named %r" % (column,)) from None

    @property
    def fingerprint(self):
        return schema_fingerprint(self._names, self._target_name)

    def to_dict(self):
        return {'names': list(self._names), 'target_name': self._target_name}

    @classmethod
    def from_dict(cls, doc):
        return cls(doc['names'], doc['target_name'])

    def __eq__(self, other):
        return (isinstance(other, FeatureSchema)
                and self.columns == other.columns)

    def __hash__(self):
        return hash(self.columns)

    def __repr__(self):
        return "<FeatureSchema %r -> %r>" % (self._names, self._target_name)


#: The schema of the filtration datasets, in the order of the summary tables.
CAKE_SCHEMA = FeatureSchema(
    ('solids_concentration', 'temperature', 'ph', 'pressure',
     'air_blow_time', 'cake_thickness', 'filtration_time'),
    'cake_moisture',
)


Sample = namedtuple('Sample', ['features', 'target'])


class Dataset:

    """
        An ordered, immutable collection of samples over a FeatureSchema.

        Features are held as an (n, arity) float64 matrix and targets as an
        (n,) vector; both are read-only views.
    """

    def __init__(self, features, targets, schema=CAKE_SCHEMA,
                 scale_tag=ScaleTag.PERCENT):
        targets = np.asarray(targets, dtype=np.float64).reshape(-1)
        if np.size(features) == 0:
            features = np.empty((targets.shape[0], schema.arity))
        features = as_matrix(features, schema.arity)
        if features.shape[0] != targets.shape[0]:
            raise ValueError("%d feature rows but %d targets"
                             % (features.shape[0], targets.shape[0]))
        if not (np.all(np.isfinite(features)) and np.all(np.isfinite(targets))):
            raise _errors.DatasetError("dataset contains non-finite values")

        self._features = np.array(features, dtype=np.float64, order='C')
        self._targets = np.array(targets, dtype=np.float64)
        self._features.flags.writeable = False
        self._targets.flags.writeable = False
        self._schema = schema
        self._scale_tag = ScaleTag(scale_tag)

    @classmethod
    def from_samples(cls, samples, schema=CAKE_SCHEMA,
                     scale_tag=ScaleTag.PERCENT):
        samples = list(samples)
        features = [s.features for s in samples]
        targets = [s.target for s in samples]
        return cls(np.array(features, dtype=np.float64).reshape(len(samples), -1)
                   if samples else np.empty((0, schema.arity)),
                   targets, schema, scale_tag)

    @property
    def features(self):
        return self._features

    @property
    def targets(self):
        return self._targets

    @property
    def schema(self):
        return self._schema

    @property
    def scale_tag(self):
        return self._scale_tag

    @property
    def samples(self):
        return [self[i] for i in range(len(self))]

    def __len__(self):
        return self._targets.shape[0]

    def __getitem__(self, i):
        return Sample(self._features[i], float(self._targets[i]))

    def __repr__(self):
        return "<Dataset: %d samples, %d features, %s>" % (
            len(self), self._schema.arity, self._scale_tag.value)

    def column(self, name):
        """ Values of a feature or of the target, by name """
        if name == self._schema.target_name:
            return self._targets
        return self._features[:, self._schema.index(name)]

    def subset(self, indices):
        """ New dataset holding the given rows, in the given order """
        indices = np.asarray(indices, dtype=np.intp)
        return Dataset(self._features[indices], self._targets[indices],
                       self._schema, self._scale_tag)

    def fingerprint(self):
        return array_fingerprint(self._features, self._targets)

    def to_frame(self):
        """ Export as a pandas DataFrame with the schema's column names """
        frame = pd.DataFrame(self._features, columns=list(self._schema.names))
        frame[self._schema.target_name] = self._targets
        return frame

    def require_nonempty(self):
        if len(self) == 0:
            raise _errors.EmptyDatasetError()


def _check_header(columns, schema):
    expected = list(schema.columns)
    columns = [str(c).strip() for c in columns]
    if columns == expected:
        return
    missing = [c for c in expected if c not in columns]
    unexpected = [c for c in columns if c not in expected]
    if missing or unexpected:
        parts = []
        if missing:
            parts.append("missing %s" % ", ".join(missing))
        if unexpected:
            parts.append("unexpected %s" % ", ".join(unexpected))
        raise _errors.SchemaMismatchError(
            "header mismatch: " + "; ".join(parts), missing + unexpected)
    misplaced = [c for c, e in zip(columns, expected) if c != e]
    raise _errors.SchemaMismatchError(
        "header mismatch: columns out of order: %s" % ", ".join(misplaced),
        misplaced)


def load_csv(path, schema=CAKE_SCHEMA, scale_tag=ScaleTag.PERCENT):
    """ Read a dataset from a CSV file.

    The header must name the schema's columns in order. Row order is
    preserved; errors name the 1-based data row and the column.
    """
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise FileNotFoundError("no such file: %r" % path)
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False,
                            encoding='utf-8', skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        raise _errors.EmptyDatasetError() from None
    except pd.errors.ParserError as e:
        raise _ragged_row_error(e) from None

    _check_header(frame.columns, schema)
    if len(frame) == 0:
        raise _errors.EmptyDatasetError()

    # Parse row-major so the first bad cell reported is the first one a
    # reader would meet.
    cells = frame.to_numpy(dtype=object)
    values = np.empty(cells.shape, dtype=np.float64)
    for row in range(cells.shape[0]):
        values[row] = _parse_row(cells[row], row, schema.columns)

    logger.debug("loaded %d samples from %s", values.shape[0], path)
    return Dataset(values[:, :-1], values[:, -1], schema, scale_tag)


_FIELD_COUNT = re.compile(r'Expected (\d+) fields in line (\d+), saw (\d+)')


def _ragged_row_error(e):
    m = _FIELD_COUNT.search(str(e))
    if m is None:
        return _errors.CSVParseError(None, None, None, "malformed CSV: %s" % e)
    expected, line, saw = (int(g) for g in m.groups())
    # pandas counts file lines from 1, header included
    row = line - 1
    return _errors.CSVParseError(
        row, None, None, "row %d has %d fields, expected %d" % (row, saw, expected))


def _parse_row(cells, row, names):
    out = np.empty(len(cells), dtype=np.float64)
    for j, cell in enumerate(cells):
        try:
            value = float(cell)
        except (TypeError, ValueError):
            raise _errors.CSVParseError(row + 1, names[j], cell) from None
        if not math.isfinite(value):
            raise _errors.CSVParseError(row + 1, names[j], cell)
        out[j] = value
    return out


def write_csv(d, path):
    """ Write a dataset as CSV.

    Numbers are written as the shortest repr that reads back to the same
    float64, so write-then-read is exact.
    """
    columns = d.schema.columns
    values = np.column_stack([d.features, d.targets]) if len(d) else \
        np.empty((0, len(columns)))
    frame = pd.DataFrame(
        [[repr(float(v)) for v in row] for row in values],
        columns=list(columns), dtype=object)
    frame.to_csv(os.fspath(path), index=False, lineterminator='\n',
                 encoding='utf-8')


# --- Descriptive statistics --------------------------------------------------

ColumnSummary = namedtuple('ColumnSummary',
                           ['min', 'q1', 'median', 'mean', 'q3', 'max'])

#: Row labels of the six-number summary, in table order.
SUMMARY_LABELS = ('Minimum', '1st Quartile', 'Median', 'Mean',
                  '3rd Quartile', 'Maximum')

_QUANTILE_METHODS = ('linear', 'weibull')


class DescriptiveStats:

    """
        Six-number summary per column, keyed by column name in schema order.
    """

    def __init__(self, summaries, method='linear'):
        self._summaries = dict(summaries)
        self.method = method

    def __getitem__(self, column):
        return self._summaries[column]

    def __iter__(self):
        return iter(self._summaries)

    def __len__(self):
        return len(self._summaries)

    def items(self):
        return self._summaries.items()

    def to_records(self):
        """ One dict per column with keys column/min/q1/median/mean/q3/max """
        return [dict(column=name, **s._asdict())
                for name, s in self._summaries.items()]

    def to_frame(self):
        """ Table layout: one row per statistic, one column per variable """
        data = {name: list(s) for name, s in self._summaries.items()}
        frame = pd.DataFrame(data, index=list(SUMMARY_LABELS))
        frame.index.name = 'statistic'
        return frame


def _summarize(values, method):
    q1, median, q3 = np.quantile(values, [0.25, 0.5, 0.75], method=method)
    vmin, vmax = float(np.min(values)), float(np.max(values))
    mean = float(np.mean(values))
    # Guard the ordering chain against last-bit rounding in the mean.
    mean = min(max(mean, vmin), vmax)
    return ColumnSummary(vmin, float(q1), float(median), mean, float(q3), vmax)


def describe(d, method='linear'):
    """ Per-column six-number summary.

    ``method`` selects the quantile convention: "linear" places quantile q at
    position (n-1)q between closest ranks; "weibull" uses (n+1)q, the
    convention of published summary tables produced by common statistics
    packages.
    """
    if method not in _QUANTILE_METHODS:
        raise ValueError("unknown quantile method %r" % method)
    d.require_nonempty()
    summaries = {}
    for name in d.schema.columns:
        summaries[name] = _summarize(d.column(name), method)
    return DescriptiveStats(summaries, method)


# --- Normalization -----------------------------------------------------------

@dataclass(frozen=True)
class NormalizationParams:

    """ Per-column (min, max) fitted on training data.

    ``columns`` holds the feature names followed by the target name; ``mins``
    and ``maxs`` are aligned with it.
    """

    columns: tuple
    mins: tuple
    maxs: tuple

    def __post_init__(self):
        if not (len(self.columns) == len(self.mins) == len(self.maxs)):
            raise ValueError("columns, mins and maxs must have equal length")
        for name, lo, hi in zip(self.columns, self.mins, self.maxs):
            if not lo <= hi:
                raise ValueError("column %r has min %r > max %r" % (name, lo, hi))

    @property
    def constant(self):
        """ Names of columns whose training range is a single value """
        return tuple(c for c, lo, hi in zip(self.columns, self.mins, self.maxs)
                     if lo == hi)

    def bounds(self, column):
        i = self.columns.index(column)
        return self.mins[i], self.maxs[i]

    def to_dict(self):
        return {'columns': list(self.columns),
                'mins': list(self.mins), 'maxs': list(self.maxs)}

    @classmethod
    def from_dict(cls, doc):
        return cls(tuple(doc['columns']),
                   tuple(float(v) for v in doc['mins']),
                   tuple(float(v) for v in doc['maxs']))


def fit_normalizer(train):
    """ Record the per-column min and max of the training data """
    train.require_nonempty()
    values = np.column_stack([train.features, train.targets])
    mins = tuple(float(v) for v in values.min(axis=0))
    maxs = tuple(float(v) for v in values.max(axis=0))
    params = NormalizationParams(train.schema.columns, mins, maxs)
    if params.constant:
        logger.info("constant columns map to 0.0: %s", ", ".join(params.constant))
    return params


def _scale(values, lo, hi):
    lo = np.asarray(lo)
    hi = np.asarray(hi)
    span = hi - lo
    safe = np.where(span > 0, span, 1.0)
    out = np.where(span > 0, (values - lo) / safe, 0.0)
    return np.clip(out, 0.0, 1.0)


def apply_normalizer(p, d):
    """ Map every column to [0, 1] with the fitted bounds.

    Constant columns map to 0.0; values outside the training range are
    clipped to [0, 1].
    """
    if tuple(p.columns) != d.schema.columns:
        raise _errors.SchemaMismatchError(
            "normalizer columns %r do not match dataset columns %r"
            % (p.columns, d.schema.columns), p.columns)
    mins = np.asarray(p.mins)
    maxs = np.asarray(p.maxs)
    features = _scale(d.features, mins[:-1], maxs[:-1])
    targets = _scale(d.targets, mins[-1], maxs[-1])
    return Dataset(features, targets, d.schema, ScaleTag.NORMALIZED)


def invert_normalizer(p, v, column):
    """ Map a normalized value of ``column`` back to column units """
    lo, hi = p.bounds(column)
    if lo == hi:
        raise ValueError("column %r is constant and cannot be inverted" % (column,))
    return np.asarray(v, dtype=np.float64) * (hi - lo) + lo


# --- Splitting ---------------------------------------------------------------

def split_indices(n, train_fraction, seed):
    """ Row indices (train, test) of a seeded uniform split of n samples.

    The training part holds floor(train_fraction * n) rows; both parts are
    returned in ascending order.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1), got %r" % (train_fraction,))
    perm = np.random.default_rng(seed).permutation(n)
    # The small offset keeps products like 0.7 * 10 from flooring to 6.
    n_train = int(math.floor(train_fraction * n + 1e-9))
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def split(d, train_fraction, seed):
    """ Partition a dataset into (train, test) without replacement """
    d.require_nonempty()
    train_idx, test_idx = split_indices(len(d), train_fraction, seed)
    return d.subset(train_idx), d.subset(test_idx)
