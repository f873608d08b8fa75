# This file is part of cakemoist, a regression toolkit for filter-cake
# moisture prediction.
#
# Copyright 2026 the cakemoist contributors
#
# License:  Standard 3-clause BSD; see "license.txt" for full license terms
#           and contributor agreement.

"""
    Command-line interface.

        cakemoist stats INPUT.csv|INPUT.h5 [--format csv|json] [--quantiles linear|weibull]
        cakemoist synth --scenario s1 --n 144 --seed 0 --out data.csv
        cakemoist train (--data F | --scenario S) --model rfr|svr --out model.json
        cakemoist eval MODEL.json [--data F] --out report.json [--pairs pairs.csv]
        cakemoist compare (--data F | --scenario S) --out report.json [--archive run.h5]
        cakemoist diagnose (--data F | --scenario S) --bins 3 --out diag.json

    Data files are CSV, or HDF5 as written by ``synth --out data.h5`` when the
    name ends in .h5 or .hdf5.

    Failures print ``error: <stage>: <message>`` to stderr and exit with
    status 1.  Outputs are written to a temporary file first and moved into
    place, so an output path either holds a complete result or is left alone.
"""

import argparse
import io
import logging
import os
import sys
import tempfile

import pandas as pd

from . import _errors
from .archive import is_h5_path, load_dataset, save_dataset_h5, write_compare_archive
from .config import MODEL_KINDS, UNITS, load_config
from .version import version
from ._hl.base import dumps
from ._hl.dataset import (CAKE_SCHEMA, SCALES, apply_normalizer, describe,
                          invert_normalizer, write_csv)
from ._hl.evaluate import evaluate
from ._hl.protocol import (ModelFile, now, run_compare, run_diagnose, stage,
                           train_model_file)
from ._hl.synth import SCENARIOS, synthesize

logger = logging.getLogger(__name__)

FORMATS = ('csv', 'json')


def _atomic_write(path, write):
    """ Call write(tmp_path), then move the result to path """
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix='.cakemoist-', dir=directory)
    os.close(fd)
    try:
        write(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.remove(tmp)
        raise


def _write_text(path, text):
    def write(tmp):
        with open(tmp, 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
    if path is None:
        sys.stdout.write(text)
    else:
        _atomic_write(path, write)


def _frame_csv(frame, index=True):
    """ CSV text of a frame, floats written as their shortest repr so the
    numbers match the JSON output exactly """
    frame = frame.copy()
    for col in frame.columns:
        if pd.api.types.is_float_dtype(frame[col]):
            frame[col] = [repr(float(v)) for v in frame[col]]
    buf = io.StringIO()
    frame.to_csv(buf, index=index, lineterminator='\n')
    return buf.getvalue()


def _emit(doc, frame, fmt, path):
    if fmt == 'csv':
        _write_text(path, _frame_csv(frame))
    else:
        _write_text(path, dumps(doc) + '\n')


def _provenance(config, started):
    return {'seed': config.seed, 'config_digest': config.digest(),
            'started': started, 'finished': now()}


def _overrides(args, names):
    return {name: getattr(args, name, None) for name in names}


_SOURCE_FIELDS = ('data', 'scenario', 'n', 'seed', 'scale', 'train_fraction', 'out')
_FOREST_FIELDS = ('n_trees', 'm_try', 'max_depth', 'min_samples_leaf',
                  'min_samples_split', 'bootstrap')
_SVR_FIELDS = ('c', 'epsilon', 'kernel', 'gamma', 'kkt_tolerance', 'max_passes', 'folds')


# --- Commands ----------------------------------------------------------------

def cmd_stats(args):
    with stage('load'):
        d = load_dataset(args.input, CAKE_SCHEMA, SCALES[args.scale or 'percent'])
    with stage('stats'):
        stats = describe(d, method=args.quantiles)
        doc = {'kind': 'stats', 'source': args.input, 'n': len(d),
               'method': args.quantiles, 'columns': stats.to_records()}
    with stage('write'):
        _emit(doc, stats.to_frame(), args.format or 'csv', args.out)
    return 0


def cmd_synth(args):
    with stage('synth'):
        d = synthesize(args.scenario, args.n, args.seed or 0)
    with stage('write'):
        if args.out is None:
            sys.stdout.write(_frame_csv(d.to_frame(), index=False))
        elif is_h5_path(args.out):
            _atomic_write(args.out, lambda tmp: save_dataset_h5(d, tmp))
        else:
            _atomic_write(args.out, lambda tmp: write_csv(d, tmp))
    logger.info("wrote %d samples of scenario %s", len(d), args.scenario)
    return 0


def cmd_train(args):
    with stage('config'):
        config = load_config(args.config, _overrides(
            args, _SOURCE_FIELDS + _FOREST_FIELDS + _SVR_FIELDS + ('model',)))
        if config.out is None:
            raise _errors.ConfigError('out', "a model output path is required")
    model_file, prepared = train_model_file(config, tune=args.grid)
    if model_file.kind == 'svr' and not model_file.model.converged:
        logger.warning("SVR did not converge (max violation %.3g); model flagged",
                       model_file.model.max_violation)
    with stage('write'):
        _atomic_write(config.out, model_file.save)
    logger.info("trained %s on %d samples (%d held out)", config.model,
                len(prepared.train), len(prepared.test))
    return 0


def cmd_eval(args):
    started = now()
    with stage('load model'):
        model_file = ModelFile.load(args.model)
    with stage('load data'):
        if args.data is not None:
            raw = load_dataset(args.data, CAKE_SCHEMA, SCALES[args.scale or 'percent'])
            model_file.check_schema(raw)
            data = apply_normalizer(model_file.normalizer, raw)
        else:
            data = model_file.stored_split().test
    with stage('evaluate'):
        inverse = None
        if args.units == 'original':
            target = data.schema.target_name
            inverse = lambda v: invert_normalizer(model_file.normalizer, v, target)  # noqa: E731
        report = evaluate(model_file.model, data, inverse=inverse)
    doc = report.to_dict()
    doc.update(model_kind=model_file.kind, model_config_digest=model_file.config_digest,
               seed=model_file.seed, started=started, finished=now(),
               data=args.data if args.data is not None else 'stored validation split')
    with stage('write'):
        frame = pd.DataFrame([report.metrics()], index=[model_file.kind])
        _emit(doc, frame, args.format or 'json', args.out)
        if args.pairs is not None:
            _atomic_write(args.pairs, report.write_pairs_csv)
    return 0


def cmd_compare(args):
    started = now()
    with stage('config'):
        config = load_config(args.config, _overrides(
            args, _SOURCE_FIELDS + _FOREST_FIELDS + _SVR_FIELDS + ('units', 'repeats')))
    report, prepared = run_compare(config, tune=args.tune)
    doc = report.to_dict()
    doc.update(_provenance(config, started))
    for name, result in report.models.items():
        if not result.converged:
            logger.warning("%s did not converge; its scores are flagged", name)
    with stage('write'):
        _emit(doc, report.table(), args.format or 'json', config.out)
        if args.archive is not None:
            _atomic_write(args.archive, lambda tmp: write_compare_archive(
                tmp, report, prepared.train, prepared.test))
    return 0


def cmd_diagnose(args):
    started = now()
    with stage('config'):
        config = load_config(args.config, _overrides(
            args, _SOURCE_FIELDS + _FOREST_FIELDS + ('bins',)))
    diagnostics = run_diagnose(config)
    doc = diagnostics.to_dict()
    doc.update(_provenance(config, started))
    with stage('write'):
        frame = pd.DataFrame([{
            'n_trees': diagnostics.n_trees,
            'error_estimate': diagnostics.error_estimate,
            'strength': diagnostics.strength,
            'mean_correlation': diagnostics.mean_correlation,
            'bound': diagnostics.bound,
        }])
        _emit(doc, frame, args.format or 'json', config.out)
    return 0


# --- Parser ------------------------------------------------------------------

def _add_source(p):
    g = p.add_argument_group('data source')
    g.add_argument('--data', help="input CSV or HDF5 file in the cake-moisture schema")
    g.add_argument('--scenario', choices=sorted(SCENARIOS),
                   help="generate a synthetic dataset instead")
    g.add_argument('--n', type=int, help="synthetic sample count (default 144)")
    g.add_argument('--train-fraction', dest='train_fraction', type=float,
                   help="training share of the split (default 0.7)")


def _add_forest(p):
    g = p.add_argument_group('random forest')
    g.add_argument('--n-trees', dest='n_trees', type=int)
    g.add_argument('--m-try', dest='m_try', type=int)
    g.add_argument('--max-depth', dest='max_depth', type=int)
    g.add_argument('--min-samples-leaf', dest='min_samples_leaf', type=int)
    g.add_argument('--min-samples-split', dest='min_samples_split', type=int)
    g.add_argument('--no-bootstrap', dest='bootstrap', action='store_const',
                   const=False, default=None)


def _add_svr(p):
    g = p.add_argument_group('support vector regression')
    g.add_argument('--c', type=float)
    g.add_argument('--epsilon', type=float)
    g.add_argument('--kernel', choices=('rbf', 'linear'))
    g.add_argument('--gamma', type=float)
    g.add_argument('--kkt-tolerance', dest='kkt_tolerance', type=float)
    g.add_argument('--max-passes', dest='max_passes', type=int)
    g.add_argument('--folds', type=int, help="cross-validation folds for tuning")


def build_parser():
    parser = argparse.ArgumentParser(
        prog='cakemoist',
        description="Filter-cake moisture regression with random forests and SVR")
    parser.add_argument('--version', action='version', version=version)
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help="-v for progress, -vv for debugging output")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int)
    common.add_argument('--out', help="output path (default: standard output)")
    common.add_argument('--format', choices=FORMATS)
    common.add_argument('--scale', choices=sorted(SCALES),
                        help="units of the moisture column in input CSVs")
    common.add_argument('--config', help="key = value run configuration file")

    sub = parser.add_subparsers(dest='command', metavar='COMMAND')
    sub.required = True

    p = sub.add_parser('stats', parents=[common],
                       help="six-number summary of every column")
    p.add_argument('input', help="CSV or HDF5 dataset")
    p.add_argument('--quantiles', choices=('linear', 'weibull'), default='linear')
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser('synth', parents=[common], help="generate a synthetic dataset")
    p.add_argument('--scenario', choices=sorted(SCENARIOS), default='s1')
    p.add_argument('--n', type=int, default=144)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser('train', parents=[common], help="fit one model")
    _add_source(p)
    p.add_argument('--model', choices=MODEL_KINDS)
    _add_forest(p)
    _add_svr(p)
    p.add_argument('--grid', action='store_true',
                   help="grid-search C, epsilon and gamma (svr only)")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser('eval', parents=[common], help="score a trained model")
    p.add_argument('model')
    p.add_argument('--data', help="score on this CSV or HDF5 file instead of the stored split")
    p.add_argument('--pairs', help="also write actual,predicted pairs as CSV")
    p.add_argument('--units', choices=UNITS, default='normalized')
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser('compare', parents=[common],
                       help="fit and score both models on one split")
    _add_source(p)
    _add_forest(p)
    _add_svr(p)
    p.add_argument('--units', choices=UNITS)
    p.add_argument('--repeats', type=int, help="permutation importance repeats")
    p.add_argument('--tune', action='store_true', help="grid-search the SVR first")
    p.add_argument('--archive', help="also write an HDF5 archive of the run")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser('diagnose', parents=[common],
                       help="margin diagnostics of a binned forest")
    _add_source(p)
    _add_forest(p)
    p.add_argument('--bins', type=int)
    p.set_defaults(func=cmd_diagnose)

    return parser


def _configure_logging(verbosity):
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity > 1:
        level = logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.captureWarnings(True)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)
    try:
        return args.func(args)
    except _errors.StageError as e:
        print("error: %s" % e, file=sys.stderr)
    except _errors.ConfigError as e:
        print("error: config: %s" % e, file=sys.stderr)
    except (OSError, ValueError, KeyError, TypeError, RuntimeError) as e:
        print("error: %s: %s" % (args.command, e), file=sys.stderr)
    return 1


if __name__ == '__main__':
    sys.exit(main())
