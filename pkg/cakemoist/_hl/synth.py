# This file is part of cakemoist, a regression toolkit for filter-cake
# moisture prediction.
#
# Copyright 2026 the cakemoist contributors
#
# License:  Standard 3-clause BSD; see "license.txt" for full license terms
#           and contributor agreement.

"""
    Synthetic filtration datasets.

    The laboratory measurements behind the published summary tables are not
    available, so this module generates stand-in datasets calibrated to them.
    Two scenarios are provided:

    "s1"
        Polypropylene filter fabric.

    "s2"
        Polyester filter fabric.

    Generation, for n samples and a seed:

    1. Design.  The five controlled factors (solids concentration,
       temperature, pH, air-blow time, cake thickness) are taken from the
       balanced full factorial of their levels, 2*2*3*3*4 = 144 runs.  The
       factorial is tiled as often as needed, shuffled, and cut to n rows.

    2. Jitter.  Temperature and pH were regulated rather than set exactly.
       Within each level group the realized values are spread evenly over a
       per-level offset interval and assigned to the runs in random order.

    3. Filtration time.  Drawn from the scenario's five-number summary
       (piecewise-linear quantile function at evenly spaced probabilities)
       and handed out in order of cake thickness plus a uniform jitter, so
       thicker cakes tend to filter longer.

    4. Moisture.  The scenario's response function of cake thickness,
       air-blow time and solids concentration plus Gaussian noise fixes the
       ordering of the samples; the ordered samples then receive the
       scenario's published moisture distribution, again through the
       piecewise-linear quantile function.

    The response functions are step functions of the factor levels.  Every
    term is a threshold on one factor except the cracking term, which
    switches on for thin cakes blown past the fabric's cracking time.  The
    noise (sigma 0.1) is small next to the smallest step, so the moisture
    order within a factor combination is the only thing it decides.

    Pressure is 150 kPa throughout.  Temperature, pH, filtration time and
    moisture are rounded to two decimals.
"""

from dataclasses import dataclass, field
import itertools
import logging

import numpy as np

from .dataset import CAKE_SCHEMA, Dataset, ScaleTag

logger = logging.getLogger(__name__)

# Controlled factors, in the column order of CAKE_SCHEMA.
FACTORS = ('solids_concentration', 'temperature', 'ph', 'air_blow_time',
           'cake_thickness')

LEVELS = {
    'solids_concentration': (0.2, 0.38),
    'temperature': (35.0, 65.0),
    'ph': (2.0, 3.5, 5.0),
    'air_blow_time': (2.0, 10.0, 15.0),
    'cake_thickness': (14.0, 20.0, 26.0, 34.0),
}

_KNOTS = np.array([0.0, 0.25, 0.5, 0.75, 1.0])


# Cakes thinner than this crack once the air blow runs long enough.
CRACK_THICKNESS = 24.0


def _polypropylene_response(sc, abt, ct):
    """ Thick cakes hold water and each air-blow level removes some, but
    thin cakes crack under the 15-minute blow; air then bypasses the cake
    and it stays wetter than after a short blow.  Concentrated slurries
    filter slightly drier. """
    thin = ct < CRACK_THICKNESS
    return (2.0 * (ct >= 26.0) + 2.0 * (ct >= 34.0)
            - 3.0 * (abt >= 10.0) - 3.0 * (abt >= 15.0)
            + 9.0 * (thin & (abt >= 15.0))
            - 0.5 * (sc >= 0.29))


def _polyester_response(sc, abt, ct):
    """ Polyester releases thin cakes less cleanly: they crack from the
    10-minute blow on. """
    thin = ct < CRACK_THICKNESS
    return (2.0 * (ct >= 26.0) + 3.0 * (ct >= 34.0)
            - 3.5 * (abt >= 10.0) - 2.5 * (abt >= 15.0)
            + 7.0 * (thin & (abt >= 10.0))
            - 0.25 * (sc >= 0.29))


RESPONSES = {
    'polypropylene-v2': _polypropylene_response,
    'polyester-v2': _polyester_response,
}


@dataclass(frozen=True)
class SynthScenario:

    """ Calibration targets and generating rules for one fabric """

    id: str
    description: str
    #: factor -> one (low, high) offset interval per level, in LEVELS order
    jitter: dict = field(default_factory=dict)
    #: (min, q1, median, q3, max) of filtration time, minutes
    filtration_time_summary: tuple = ()
    #: (min, q1, median, q3, max) of cake moisture, percent
    moisture_summary: tuple = ()
    response: str = 'polypropylene-v2'
    noise_sigma: float = 0.1
    #: width of the uniform jitter on normalized thickness when ordering
    #: filtration times
    coupling_width: float = 0.6
    pressure: float = 150.0
    level_table: dict = field(default_factory=lambda: dict(LEVELS))


S1 = SynthScenario(
    id='s1',
    description='polypropylene fabric',
    jitter={
        'temperature': ((-3.0, 3.0), (-3.0, 3.0)),
        'ph': ((0.09, 0.12), (-0.10, 0.14), (-0.34, 0.67)),
    },
    filtration_time_summary=(7.34, 9.25, 12.00, 14.00, 16.00),
    moisture_summary=(26.09, 31.94, 33.11, 34.47, 39.76),
    response='polypropylene-v2',
)

S2 = SynthScenario(
    id='s2',
    description='polyester fabric',
    jitter={
        'temperature': ((-3.0, -0.48), (-2.53, 2.0)),
        'ph': ((0.0, 0.13), (-0.15, 0.05), (-0.38, 0.10)),
    },
    filtration_time_summary=(6.50, 10.00, 10.00, 10.38, 11.50),
    moisture_summary=(24.45, 31.73, 33.47, 35.24, 40.94),
    response='polyester-v2',
)

SCENARIOS = {s.id: s for s in (S1, S2)}


def get_scenario(scenario):
    """ Look up a scenario by id (case-insensitive); scenarios pass through """
    if isinstance(scenario, SynthScenario):
        return scenario
    try:
        return SCENARIOS[str(scenario).lower()]
    except KeyError:
        raise KeyError("unknown scenario %r (choose from %s)"
                       % (scenario, ", ".join(sorted(SCENARIOS)))) from None


def factorial_design(level_table=LEVELS):
    """ Full factorial of the factor levels, one run per row """
    return np.array(list(itertools.product(*(level_table[f] for f in FACTORS))),
                    dtype=np.float64)


def _spread(rng, m, lo, hi):
    if m == 1:
        return np.array([(lo + hi) / 2.0])
    return np.linspace(lo, hi, m)[rng.permutation(m)]


def _quantile_draws(summary, n):
    u = np.linspace(0.0, 1.0, n) if n > 1 else np.array([0.5])
    return np.interp(u, _KNOTS, np.asarray(summary, dtype=np.float64))


def synthesize(s, n, seed):
    """ Generate n samples of scenario ``s`` (an id or a SynthScenario) """
    s = get_scenario(s)
    n = int(n)
    if n < 1:
        raise ValueError("n must be at least 1, got %d" % n)
    try:
        response = RESPONSES[s.response]
    except KeyError:
        raise KeyError("unknown response function %r" % s.response) from None

    rng = np.random.default_rng(seed)

    grid = factorial_design(s.level_table)
    reps = -(-n // grid.shape[0])
    design = np.tile(grid, (reps, 1))
    design = design[rng.permutation(design.shape[0])[:n]]

    for j, factor in enumerate(FACTORS):
        intervals = s.jitter.get(factor)
        if intervals is None:
            continue
        column = design[:, j]
        jittered = column.copy()
        for level, (lo, hi) in zip(s.level_table[factor], intervals):
            rows = np.flatnonzero(column == level)
            if rows.size:
                jittered[rows] = level + _spread(rng, rows.size, lo, hi)
        design[:, j] = jittered

    sc, temperature, ph, abt, ct = design.T

    ct_levels = s.level_table['cake_thickness']
    ct_span = max(ct_levels) - min(ct_levels)
    key = (ct - min(ct_levels)) / ct_span + rng.uniform(0.0, s.coupling_width, n)
    filtration_time = np.empty(n)
    filtration_time[np.argsort(key, kind='stable')] = \
        _quantile_draws(s.filtration_time_summary, n)

    raw = response(sc, abt, ct) + rng.normal(0.0, s.noise_sigma, n)
    moisture = np.empty(n)
    moisture[np.argsort(raw, kind='stable')] = \
        _quantile_draws(s.moisture_summary, n)

    features = np.column_stack([
        sc,
        np.round(temperature, 2),
        np.round(ph, 2),
        np.full(n, s.pressure),
        abt,
        ct,
        np.round(filtration_time, 2),
    ])
    logger.debug("synthesized %d samples of scenario %s (seed %s)", n, s.id, seed)
    return Dataset(features, np.round(moisture, 2), CAKE_SCHEMA, ScaleTag.PERCENT)
