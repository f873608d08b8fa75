# This file is part of cakemoist, a regression toolkit for filter-cake
# moisture prediction.
#
# Copyright 2026 the cakemoist contributors
#
# License:  Standard 3-clause BSD; see "license.txt" for full license terms
#           and contributor agreement.

"""
    Run configuration for the command-line tools.

    A run is described by a flat ``key = value`` file; options given on the
    command line override the file.  Every key is checked against the field
    table below and all problems are reported together, before any work
    starts.

    The worker count for forest fitting comes from $CAKEMOIST_N_JOBS (see
    ``cakemoist._hl.forest.default_n_jobs``) and is not part of a run's
    configuration, since it never changes results.
"""

from dataclasses import asdict, dataclass, fields
import hashlib
import json
import logging
import os

from ._errors import ConfigError
from ._hl.dataset import SCALES
from ._hl.forest import ForestConfig
from ._hl.svr import KERNELS, KernelSpec, SvrConfig
from ._hl.tree import TreeConfig

logger = logging.getLogger(__name__)

MODEL_KINDS = ('rfr', 'svr')
UNITS = ('normalized', 'original')

# Fields that say where results go rather than what is computed
_OUTPUT_FIELDS = ('out',)


def _bool(value):
    if isinstance(value, bool):
        return value
    s = str(value).strip().lower()
    if s in ('1', 'true', 'yes', 'on'):
        return True
    if s in ('0', 'false', 'no', 'off'):
        return False
    raise ValueError("expected a boolean, got %r" % (value,))


def _optional(coerce):
    def convert(value):
        if value is None or (isinstance(value, str) and value.strip().lower() in ('', 'none')):
            return None
        return coerce(value)
    return convert


def _int(value):
    if isinstance(value, float) and not value.is_integer():
        raise ValueError("expected an integer, got %r" % (value,))
    return int(value)


def _str(value):
    return str(value).strip()


@dataclass(frozen=True)
class RunConfig:

    """ Everything that determines the result of a run """

    data: str = None
    scenario: str = None
    n: int = 144
    model: str = 'rfr'
    train_fraction: float = 0.7
    seed: int = 0
    scale: str = 'percent'
    units: str = 'normalized'
    out: str = None
    # forest
    n_trees: int = 500
    m_try: int = None
    max_depth: int = None
    min_samples_leaf: int = 1
    min_samples_split: int = 2
    bootstrap: bool = True
    # svr
    c: float = 1.0
    epsilon: float = 0.01
    kernel: str = 'rbf'
    gamma: float = None
    kkt_tolerance: float = 1e-3
    max_passes: int = 100
    folds: int = 5
    # diagnostics and importance
    bins: int = 3
    repeats: int = 10

    def problems(self, require_source=True):
        """ List of (field, message) for every invalid setting """
        out = []

        def check(ok, name, msg):
            if not ok:
                out.append((name, msg))

        if require_source:
            check((self.data is None) != (self.scenario is None), 'data',
                  "give exactly one of a data file and a synthetic scenario")
        check(0.0 < self.train_fraction < 1.0, 'train_fraction',
              "must lie in (0, 1), got %r" % (self.train_fraction,))
        check(self.model in MODEL_KINDS, 'model',
              "must be one of %s, got %r" % (", ".join(MODEL_KINDS), self.model))
        check(self.scale in SCALES, 'scale',
              "must be one of %s, got %r" % (", ".join(SCALES), self.scale))
        check(self.units in UNITS, 'units',
              "must be one of %s, got %r" % (", ".join(UNITS), self.units))
        check(self.kernel in KERNELS, 'kernel',
              "must be one of %s, got %r" % (", ".join(KERNELS), self.kernel))
        check(self.seed >= 0, 'seed', "must be non-negative")
        check(self.n >= 1, 'n', "must be at least 1")
        check(self.n_trees >= 1, 'n_trees', "must be at least 1")
        check(self.m_try is None or self.m_try >= 1, 'm_try', "must be at least 1")
        check(self.max_depth is None or self.max_depth >= 0, 'max_depth',
              "must be non-negative")
        check(self.min_samples_leaf >= 1, 'min_samples_leaf', "must be at least 1")
        check(self.min_samples_split >= 2, 'min_samples_split', "must be at least 2")
        check(self.c > 0, 'c', "must be positive")
        check(self.epsilon >= 0, 'epsilon', "must be non-negative")
        check(self.gamma is None or self.gamma > 0, 'gamma', "must be positive")
        check(self.kkt_tolerance > 0, 'kkt_tolerance', "must be positive")
        check(self.max_passes >= 1, 'max_passes', "must be at least 1")
        check(self.folds >= 2, 'folds', "must be at least 2")
        check(self.bins >= 2, 'bins', "must be at least 2")
        check(self.repeats >= 1, 'repeats', "must be at least 1")
        return out

    def validate(self, require_source=True):
        problems = self.problems(require_source)
        if problems:
            raise ConfigError.collect(problems)
        return self

    @property
    def scale_tag(self):
        return SCALES[self.scale]

    def forest_config(self):
        tree = TreeConfig(max_depth=self.max_depth,
                          min_samples_leaf=self.min_samples_leaf,
                          min_samples_split=self.min_samples_split,
                          m_try=self.m_try)
        return ForestConfig(n_trees=self.n_trees, tree_config=tree,
                            bootstrap=self.bootstrap, master_seed=self.seed)

    def svr_config(self):
        return SvrConfig(c=self.c, epsilon=self.epsilon,
                         kernel=KernelSpec(self.kernel, self.gamma),
                         kkt_tolerance=self.kkt_tolerance,
                         max_passes=self.max_passes)

    def to_dict(self):
        return asdict(self)

    def digest(self):
        """ SHA-256 of the canonical JSON of every result-affecting field """
        doc = {k: v for k, v in self.to_dict().items() if k not in _OUTPUT_FIELDS}
        canonical = json.dumps(doc, sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


_COERCE = {
    'data': _optional(_str),
    'scenario': _optional(_str),
    'out': _optional(_str),
    'model': _str,
    'scale': _str,
    'units': _str,
    'kernel': _str,
    'n': _int,
    'seed': _int,
    'n_trees': _int,
    'm_try': _optional(_int),
    'max_depth': _optional(_int),
    'min_samples_leaf': _int,
    'min_samples_split': _int,
    'max_passes': _int,
    'folds': _int,
    'bins': _int,
    'repeats': _int,
    'train_fraction': float,
    'c': float,
    'epsilon': float,
    'gamma': _optional(float),
    'kkt_tolerance': float,
    'bootstrap': _bool,
}

assert set(_COERCE) == {f.name for f in fields(RunConfig)}


def parse_config_file(path):
    """ Read ``key = value`` lines into a dict of strings.

    Blank lines and lines starting with ``#`` are ignored.
    """
    if not os.path.exists(path):
        raise FileNotFoundError("config file not found: %s" % (path,))
    entries = {}
    problems = []
    with open(path, 'r', encoding='utf-8') as f:
        for lineno, line in enumerate(f, 1):
            line = line.strip()
            if not line or line.startswith('#'):
                continue
            key, sep, value = line.partition('=')
            if not sep:
                problems.append(("line %d" % lineno, "expected 'key = value'"))
                continue
            entries[key.strip().replace('-', '_')] = value.strip()
    if problems:
        raise ConfigError.collect(problems)
    return entries


def load_config(path=None, overrides=None, require_source=True):
    """ Build a validated RunConfig from a config file and overrides.

    Overrides whose value is None are ignored, so unset command-line
    options leave the file's value in place.
    """
    raw = {}
    if path is not None:
        raw.update(parse_config_file(path))
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value

    typed = {}
    problems = []
    for key, value in raw.items():
        coerce = _COERCE.get(key)
        if coerce is None:
            problems.append((key, "unknown setting"))
            continue
        try:
            typed[key] = coerce(value)
        except (TypeError, ValueError) as e:
            problems.append((key, "invalid value %r (%s)" % (value, e)))
    config = RunConfig(**typed)
    problems.extend(p for p in _safe_problems(config, require_source)
                    if p[0] not in {q[0] for q in problems})
    if problems:
        raise ConfigError.collect(problems)
    logger.debug("run config %s", config.digest())
    return config


def _safe_problems(config, require_source):
    try:
        return config.problems(require_source)
    except TypeError as e:
        return [('config', str(e))]
