# This file is part of cakemoist, a regression toolkit for filter-cake
# moisture prediction.
#
# Copyright 2026 the cakemoist contributors
#
# License:  Standard 3-clause BSD; see "license.txt" for full license terms
#           and contributor agreement.

"""
    The end-to-end modelling protocol behind the command-line tools.

    load -> seeded train/validation split -> min-max normalization fitted on
    the training part -> fit -> score on the validation part.  Model files
    record everything needed to repeat the evaluation exactly: the split
    indices, the normalizer and where the data came from.
"""

from contextlib import contextmanager
from dataclasses import dataclass, field
import datetime
import logging

import numpy as np
import pandas as pd

from .. import _errors
from ..archive import load_dataset
from .base import (FORMAT_VERSION, check_format, finite_or_none, read_json,
                   write_json)
from .dataset import (CAKE_SCHEMA, SCALES, NormalizationParams, apply_normalizer,
                      fit_normalizer, invert_normalizer, split_indices)
from .evaluate import (EvalReport, evaluate, importance_from_scores,
                       permutation_importance)
from .forest import (Forest, diagnose, fit_binned_forest, fit_forest,
                     impurity_importance, oob_error)
from .svr import SvrModel, fit_svr, grid_search
from .synth import synthesize

logger = logging.getLogger(__name__)

MODEL_NAMES = {'rfr': 'random forest', 'svr': 'support vector regression'}


@contextmanager
def stage(name):
    """ Re-raise any failure inside the block as a StageError named ``name`` """
    try:
        yield
    except _errors.StageError:
        raise
    except Exception as e:
        raise _errors.StageError(name, e) from e


def now():
    return datetime.datetime.now(datetime.timezone.utc).isoformat(timespec='seconds')


def source_of(config):
    """ Description of a run's data source, as stored in model files """
    if config.data is not None:
        return {'data': str(config.data), 'scale': config.scale}
    return {'scenario': config.scenario, 'n': config.n, 'seed': config.seed}


def load_source(source, scale_tag=None):
    """ Load the raw dataset a source description points to """
    if 'data' in source:
        tag = scale_tag if scale_tag is not None else SCALES[source.get('scale', 'percent')]
        return load_dataset(source['data'], CAKE_SCHEMA, tag)
    return synthesize(source['scenario'], source['n'], source['seed'])


@dataclass
class PreparedData:

    """ A split dataset and its normalized halves """

    raw: object
    train_indices: np.ndarray
    test_indices: np.ndarray
    normalizer: NormalizationParams
    train: object
    test: object

    def inverse_target(self):
        """ Map normalized target values back to the dataset's units """
        target = self.raw.schema.target_name
        return lambda v: invert_normalizer(self.normalizer, v, target)


def prepare(raw, train_fraction, seed, train_indices=None, test_indices=None):
    """ Split and normalize.  Stored indices, if given, replace the draw. """
    raw.require_nonempty()
    if train_indices is None:
        train_indices, test_indices = split_indices(len(raw), train_fraction, seed)
    else:
        train_indices = np.asarray(train_indices, dtype=np.intp)
        test_indices = np.asarray(test_indices, dtype=np.intp)
        if max(train_indices.max(initial=-1), test_indices.max(initial=-1)) >= len(raw):
            raise _errors.FingerprintMismatchError(
                "stored split refers to rows beyond the %d available" % len(raw))
    raw_train = raw.subset(train_indices)
    normalizer = fit_normalizer(raw_train)
    return PreparedData(raw, train_indices, test_indices, normalizer,
                        apply_normalizer(normalizer, raw_train),
                        apply_normalizer(normalizer, raw.subset(test_indices)))


def tune_svr(train, config):
    """ Grid-search C, epsilon and gamma on the training data """
    best, scores = grid_search(train, folds=config.folds, seed=config.seed,
                               base_config=config.svr_config())
    logger.info("grid search picked C=%g epsilon=%g gamma=%g",
                best.c, best.epsilon, best.kernel.gamma)
    return best, scores


def fit_model(kind, train, config, tune=False, n_jobs=None):
    if kind == 'rfr':
        return fit_forest(train, config.forest_config(), n_jobs=n_jobs)
    if kind == 'svr':
        svr_config = tune_svr(train, config)[0] if tune else config.svr_config()
        return fit_svr(train, svr_config)
    raise ValueError("unknown model kind %r" % (kind,))


def model_from_dict(kind, doc):
    if kind == 'rfr':
        return Forest.from_dict(doc)
    if kind == 'svr':
        return SvrModel.from_dict(doc)
    raise ValueError("unknown model kind %r" % (kind,))


class ModelFile:

    """
        A fitted model together with its normalizer, the split it was
        trained on, and the description of its data source.
    """

    def __init__(self, kind, model, normalizer, train_indices, test_indices,
                 source, train_fraction, config_digest=None, seed=None,
                 schema_fingerprint=CAKE_SCHEMA.fingerprint):
        self.kind = kind
        self.model = model
        self.normalizer = normalizer
        self.train_indices = np.asarray(train_indices, dtype=np.intp)
        self.test_indices = np.asarray(test_indices, dtype=np.intp)
        self.source = dict(source)
        self.train_fraction = train_fraction
        self.config_digest = config_digest
        self.seed = seed
        self.schema_fingerprint = schema_fingerprint

    def to_dict(self):
        return {
            'kind': 'model_file',
            'format_version': FORMAT_VERSION,
            'model_kind': self.kind,
            'model': self.model.to_dict(),
            'normalizer': self.normalizer.to_dict(),
            'split': {'train': self.train_indices.tolist(),
                      'test': self.test_indices.tolist(),
                      'train_fraction': self.train_fraction},
            'source': self.source,
            'config_digest': self.config_digest,
            'seed': self.seed,
            'schema_fingerprint': self.schema_fingerprint,
        }

    @classmethod
    def from_dict(cls, doc):
        check_format(doc, 'model_file')
        return cls(
            kind=doc['model_kind'],
            model=model_from_dict(doc['model_kind'], doc['model']),
            normalizer=NormalizationParams.from_dict(doc['normalizer']),
            train_indices=doc['split']['train'],
            test_indices=doc['split']['test'],
            source=doc['source'],
            train_fraction=doc['split']['train_fraction'],
            config_digest=doc.get('config_digest'),
            seed=doc.get('seed'),
            schema_fingerprint=doc['schema_fingerprint'],
        )

    def save(self, path):
        write_json(path, self.to_dict())

    @classmethod
    def load(cls, path):
        return cls.from_dict(read_json(path))

    def check_schema(self, d):
        if d.schema.fingerprint != self.schema_fingerprint:
            raise _errors.FingerprintMismatchError(
                "data columns %r do not match the model's schema" % (d.schema.columns,))

    def stored_split(self):
        """ Rebuild the normalized train and validation sets from the source """
        raw = load_source(self.source)
        self.check_schema(raw)
        prepared = prepare(raw, self.train_fraction, self.seed,
                           self.train_indices, self.test_indices)
        return prepared


def train_model_file(config, tune=False, n_jobs=None):
    """ Run load, split, normalize and fit for ``config.model`` """
    config.validate()
    source = source_of(config)
    with stage('load'):
        raw = load_source(source, config.scale_tag)
    with stage('split'):
        prepared = prepare(raw, config.train_fraction, config.seed)
    with stage('train %s' % config.model):
        model = fit_model(config.model, prepared.train, config, tune, n_jobs)
    return ModelFile(config.model, model, prepared.normalizer,
                     prepared.train_indices, prepared.test_indices, source,
                     config.train_fraction, config.digest(), config.seed,
                     raw.schema.fingerprint), prepared


# --- Comparison --------------------------------------------------------------

@dataclass(frozen=True)
class ModelResult:

    """ Scores of one model within a comparison run """

    kind: str
    training: EvalReport
    validation: EvalReport
    importances: tuple
    converged: bool = True
    details: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            'kind': self.kind,
            'training': self.training.to_dict(),
            'validation': self.validation.to_dict(),
            'importances': [imp.to_dict() for imp in self.importances],
            'converged': self.converged,
            'details': self.details,
        }


@dataclass(frozen=True)
class CompareReport:

    """ Both models scored on one shared split """

    models: dict
    seed: int
    config_digest: str
    source: dict
    n_train: int
    n_test: int
    train_indices: tuple
    test_indices: tuple
    started: str
    finished: str

    def table(self):
        """ Rows R^2 (both variants), MSE and MAE; one column per model """
        rows = (('R2 (uncentered)', 'r2_uncentered'), ('R2 (centered)', 'r2_centered'),
                ('MSE', 'mse'), ('MAE', 'mae'))
        data = {name: [getattr(res.validation, attr) for _, attr in rows]
                for name, res in self.models.items()}
        return pd.DataFrame(data, index=[label for label, _ in rows])

    def to_dict(self):
        table = self.table()
        return {
            'kind': 'compare_report',
            'format_version': FORMAT_VERSION,
            'seed': self.seed,
            'config_digest': self.config_digest,
            'source': self.source,
            'n_train': self.n_train,
            'n_test': self.n_test,
            'split': {'train': list(self.train_indices),
                      'test': list(self.test_indices)},
            'started': self.started,
            'finished': self.finished,
            'table': {'rows': list(table.index),
                      'columns': {c: [finite_or_none(v) for v in table[c]]
                                  for c in table.columns}},
            'models': {name: res.to_dict() for name, res in self.models.items()},
        }


def _score(kind, model, prepared, config, units):
    inverse = prepared.inverse_target() if units == 'original' else None
    training = evaluate(model, prepared.train, inverse=inverse)
    validation = evaluate(model, prepared.test, inverse=inverse)
    importances = []
    details = {}
    if kind == 'rfr':
        importances.append(importance_from_scores(
            prepared.train.schema.names, impurity_importance(model)))
        if model.config.bootstrap:
            try:
                details['oob_mse'] = oob_error(model, prepared.train)
            except _errors.OOBCoverageError as e:
                logger.info("no OOB estimate: %s", e)
        converged = True
    else:
        details.update(n_support=model.n_support, c=model.config.c,
                       epsilon=model.config.epsilon, gamma=model.config.kernel.gamma,
                       max_violation=model.max_violation)
        converged = model.converged
    importances.append(permutation_importance(model, prepared.test,
                                              seed=config.seed,
                                              repeats=config.repeats))
    return ModelResult(kind, training, validation, tuple(importances),
                       converged, details)


def run_compare(config, tune=False, n_jobs=None):
    """ Fit both models on the same split and score them.

    Returns ``(report, prepared)``.
    """
    config.validate()
    started = now()
    source = source_of(config)
    with stage('load'):
        raw = load_source(source, config.scale_tag)
    with stage('split'):
        prepared = prepare(raw, config.train_fraction, config.seed)

    results = {}
    for kind in ('rfr', 'svr'):
        with stage('train %s' % kind):
            model = fit_model(kind, prepared.train, config,
                              tune=tune and kind == 'svr', n_jobs=n_jobs)
        with stage('evaluate %s' % kind):
            results[kind] = _score(kind, model, prepared, config, config.units)
        logger.info("%s: validation R2 (centered) %.4f", kind,
                    results[kind].validation.r2_centered)

    report = CompareReport(
        models=results, seed=config.seed, config_digest=config.digest(),
        source=source, n_train=len(prepared.train), n_test=len(prepared.test),
        train_indices=tuple(int(i) for i in prepared.train_indices),
        test_indices=tuple(int(i) for i in prepared.test_indices),
        started=started, finished=now())
    return report, prepared


def run_diagnose(config, n_jobs=None):
    """ Margin diagnostics of a binned forest on the validation split """
    config.validate()
    with stage('load'):
        raw = load_source(source_of(config), config.scale_tag)
    with stage('split'):
        prepared = prepare(raw, config.train_fraction, config.seed)
    with stage('train binned forest'):
        forest = fit_binned_forest(prepared.train, config.forest_config(),
                                   k=config.bins, n_jobs=n_jobs)
    with stage('diagnose'):
        return diagnose(forest, prepared.test)
