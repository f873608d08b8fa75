# This file is part of cakemoist, a regression toolkit for filter-cake
# moisture prediction.
#
# Copyright 2026 the cakemoist contributors
#
# License:  Standard 3-clause BSD; see "license.txt" for full license terms
#           and contributor agreement.

"""
    This is the cakemoist package: random forest and support vector
    regression of filter-cake moisture, with the evaluation protocol, margin
    diagnostics and synthetic data generators around them.
"""

# --- Public API --------------------------------------------------------------

from . import version
from ._errors import (ConfigError, CSVParseError, DatasetError,
                      EmptyDatasetError, FingerprintMismatchError, ModeError,
                      OOBCoverageError, PredictionError, SchemaMismatchError,
                      StageError)
from .cakemoist_warnings import CakemoistWarning, ConvergenceWarning
from ._hl.dataset import (CAKE_SCHEMA, Dataset, DescriptiveStats, FeatureSchema,
                          NormalizationParams, Sample, ScaleTag, apply_normalizer,
                          describe, fit_normalizer, invert_normalizer, load_csv,
                          split, split_indices, write_csv)
from ._hl.synth import SCENARIOS, SynthScenario, get_scenario, synthesize
from ._hl.tree import (RegressionTree, SplitRule, TreeConfig, best_split,
                       fit_tree, predict_tree)
from ._hl.forest import (Forest, ForestConfig, TheoryDiagnostics, bin_targets,
                         convergence_curve, diagnose, fit_binned_forest,
                         fit_forest, generalization_error_estimate,
                         impurity_importance, margin, oob_error,
                         predict_forest, strength_correlation_bound)
from ._hl.svr import (KernelSpec, KKTReport, SvrConfig, SvrModel, fit_svr,
                      grid_search, kernel_eval, kkt_report, predict_svr)
from ._hl.evaluate import (EvalReport, ImportanceReport, evaluate, mae, mse,
                           permutation_importance, r2_centered, r2_uncentered)
from ._hl.protocol import CompareReport, ModelFile, run_compare, run_diagnose
from .config import RunConfig, load_config
from .archive import load_dataset_h5, save_dataset_h5, write_compare_archive
from .version import version as __version__


def run_tests(args=''):
    """Run tests with pytest and returns the exit status as an int.
    """
    # Lazy-loading of tests package to avoid strong dependency on test
    # requirements, e.g. pytest
    from .tests import run_tests
    return run_tests(args)
