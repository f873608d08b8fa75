# This file is part of cakemoist, a regression toolkit for filter-cake
# moisture prediction.
#
# Copyright 2026 the cakemoist contributors
#
# License:  Standard 3-clause BSD; see "license.txt" for full license terms
#           and contributor agreement.

"""
    Implements operations common to all high-level objects (fingerprints,
    seeding, JSON documents).
"""

import hashlib
import json
import math

import numpy as np

# Bumped whenever the layout of a serialized model or report changes.
FORMAT_VERSION = 1


def derive_rng(seed, *keys):
    """ Return a numpy Generator for ``seed`` mixed with integer ``keys``.

    The mix is numpy's SeedSequence over the entropy list [seed, *keys],
    whose output is fixed by numpy's compatibility policy; the same
    (seed, keys) always yields the same stream.
    """
    entropy = [int(seed)] + [int(k) for k in keys]
    if any(e < 0 for e in entropy):
        raise ValueError("seeds must be non-negative integers, got %r" % (entropy,))
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))


def as_matrix(X, arity=None):
    """ Coerce X to a 2-D float64 array, checking the column count """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2:
        raise ValueError("expected a 2-D feature matrix, got %d dimensions" % X.ndim)
    if arity is not None and X.shape[1] != arity:
        raise ValueError("arity mismatch: expected %d features, got %d"
                         % (arity, X.shape[1]))
    return X


def as_vector(x, arity=None):
    """ Coerce x to a 1-D float64 feature vector """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("expected a feature vector, got shape %s" % (x.shape,))
    if arity is not None and x.shape[0] != arity:
        raise ValueError("arity mismatch: expected %d features, got %d"
                         % (arity, x.shape[0]))
    return x


def schema_fingerprint(names, target_name):
    """ SHA-256 over the ordered column names """
    h = hashlib.sha256()
    for name in list(names) + [target_name]:
        h.update(name.encode('utf-8'))
        h.update(b'\x00')
    return h.hexdigest()


def array_fingerprint(*arrays):
    """ SHA-256 over the float64, C-ordered bytes of the given arrays """
    h = hashlib.sha256()
    for arr in arrays:
        arr = np.ascontiguousarray(arr, dtype=np.float64)
        h.update(repr(arr.shape).encode('ascii'))
        h.update(arr.tobytes())
    return h.hexdigest()


def finite_or_none(value):
    """ JSON has no infinities; encode them as null """
    value = float(value)
    return value if math.isfinite(value) else None


def dumps(doc):
    """ Serialize a document deterministically """
    return json.dumps(doc, sort_keys=True, indent=1, allow_nan=False)


def write_json(path, doc):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(dumps(doc))
        f.write('\n')


def read_json(path):
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def check_format(doc, kind):
    """ Validate the kind and version fields of a loaded document """
    if not isinstance(doc, dict):
        raise TypeError("%s document must be a JSON object" % kind)
    if doc.get('kind') != kind:
        raise ValueError("expected a %r document, got %r" % (kind, doc.get('kind')))
    version = doc.get('format_version')
    if version is None:
        raise ValueError("%s document has no format_version" % kind)
    if version > FORMAT_VERSION:
        raise ValueError("%s document format %r is newer than supported (%d)"
                         % (kind, version, FORMAT_VERSION))
    return doc
