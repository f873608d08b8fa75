# This file is part of cakemoist, a regression toolkit for filter-cake
# moisture prediction.
#
# Copyright 2026 the cakemoist contributors
#
# License:  Standard 3-clause BSD; see "license.txt" for full license terms
#           and contributor agreement.

"""
    HDF5 archives of datasets and comparison runs.

    A dataset group holds two float64 datasets, "features" (n x arity) and
    "targets" (n), with the schema and scale tag as attributes.  A
    comparison archive holds the train and validation datasets, and per
    model the (actual, predicted) pairs and importance scores, with the full
    report JSON attached to the file root.
"""

import json
import logging
import os

import h5py
import numpy as np

from . import _errors
from ._hl.base import FORMAT_VERSION, dumps
from ._hl.dataset import CAKE_SCHEMA, Dataset, FeatureSchema, ScaleTag, load_csv

logger = logging.getLogger(__name__)

H5_SUFFIXES = ('.h5', '.hdf5')


def write_dataset_group(group, d):
    """ Store a dataset in an open h5py Group """
    group.create_dataset('features', data=np.asarray(d.features, dtype='f8'))
    group.create_dataset('targets', data=np.asarray(d.targets, dtype='f8'))
    group.attrs['schema'] = json.dumps(d.schema.to_dict())
    group.attrs['scale_tag'] = d.scale_tag.value
    group.attrs['fingerprint'] = d.fingerprint()
    group.attrs['format_version'] = FORMAT_VERSION


def read_dataset_group(group):
    """ Rebuild a dataset from an h5py Group written by write_dataset_group """
    for name in ('features', 'targets'):
        if name not in group:
            raise KeyError("group %s has no %r dataset" % (group.name, name))
    schema = FeatureSchema.from_dict(json.loads(group.attrs['schema']))
    features = group['features'][()]
    targets = group['targets'][()]
    return Dataset(features.reshape(-1, schema.arity), targets, schema,
                   ScaleTag(group.attrs['scale_tag']))


def save_dataset_h5(d, path, name='dataset'):
    """ Write a dataset to group ``name`` of an HDF5 file, replacing it """
    with h5py.File(path, 'a') as f:
        if name in f:
            del f[name]
        write_dataset_group(f.create_group(name), d)
    logger.debug("wrote %d samples to %s:%s", len(d), path, name)


def load_dataset_h5(path, name='dataset'):
    with h5py.File(path, 'r') as f:
        if name not in f:
            raise KeyError("no dataset group %r in %s" % (name, path))
        return read_dataset_group(f[name])


def is_h5_path(path):
    return os.fspath(path).lower().endswith(H5_SUFFIXES)


def load_dataset(path, schema=CAKE_SCHEMA, scale_tag=ScaleTag.PERCENT):
    """ Read a dataset file: HDF5 (as written by save_dataset_h5) when the
    name ends in .h5 or .hdf5, CSV otherwise.

    HDF5 files carry their own scale tag, so ``scale_tag`` only applies to
    CSV input.
    """
    if not is_h5_path(path):
        return load_csv(path, schema, scale_tag)
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise FileNotFoundError("no such file: %r" % path)
    d = load_dataset_h5(path)
    if d.schema.columns != schema.columns:
        wrong = [c for c in d.schema.columns if c not in schema.columns]
        raise _errors.SchemaMismatchError(
            "schema mismatch: %s holds columns %s" % (path, ", ".join(d.schema.columns)),
            wrong)
    d.require_nonempty()
    return d


def write_compare_archive(path, report, train, test):
    """ Archive a comparison run.

    ``report`` is a CompareReport; ``train`` and ``test`` are the
    (normalized) datasets both models were fitted and scored on.
    """
    doc = report.to_dict()
    with h5py.File(path, 'w') as f:
        f.attrs['format_version'] = FORMAT_VERSION
        f.attrs['report'] = dumps(doc)
        write_dataset_group(f.create_group('train'), train)
        write_dataset_group(f.create_group('test'), test)
        models = f.create_group('models')
        for name, result in report.models.items():
            grp = models.create_group(name)
            grp.create_dataset('pairs', data=np.array(result.validation.pairs,
                                                      dtype='f8').reshape(-1, 2))
            grp.attrs['r2_uncentered'] = result.validation.r2_uncentered
            grp.attrs['r2_centered'] = result.validation.r2_centered
            grp.attrs['mse'] = result.validation.mse
            grp.attrs['mae'] = result.validation.mae
            for imp in result.importances:
                names = [f_.feature for f_ in imp.features]
                igrp = grp.create_group('importance_%s' % imp.method)
                igrp.create_dataset('magnitude', data=np.array(
                    [f_.magnitude for f_ in imp.features], dtype='f8'))
                igrp.create_dataset('sign', data=np.array(
                    [f_.sign for f_ in imp.features], dtype='i1'))
                igrp.attrs['features'] = json.dumps(names)
    logger.info("wrote comparison archive %s", path)
