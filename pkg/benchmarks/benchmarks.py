# Write the benchmarking functions here.
# See "Writing benchmarks" in the asv docs for more information.
import os.path as osp
from tempfile import TemporaryDirectory

import cakemoist
from cakemoist import ForestConfig, SvrConfig


class ForestSuite:
    """
    Fitting and scoring a forest on the default synthetic scenario.
    """
    def setup(self):
        self.train, self.test = _prepared('s1')
        self.forest = cakemoist.fit_forest(self.train, ForestConfig(n_trees=100), n_jobs=1)

    def time_fit_100_trees(self):
        cakemoist.fit_forest(self.train, ForestConfig(n_trees=100), n_jobs=1)

    def time_predict(self):
        self.forest.predict(self.test.features)

    def time_oob_error(self):
        cakemoist.oob_error(self.forest, self.train)

    def time_permutation_importance(self):
        cakemoist.permutation_importance(self.forest.predict, self.test, seed=0, repeats=10)


class SvrSuite:
    """
    SMO on the default synthetic scenario, with and without the grid search.
    """
    def setup(self):
        self.train, self.test = _prepared('s2')

    def time_fit(self):
        cakemoist.fit_svr(self.train, SvrConfig())

    def time_grid_search(self):
        cakemoist.grid_search(self.train, c_grid=(1.0, 10.0),
                              epsilon_grid=(0.01, 0.1), gamma_grid=(None, 1.0))


class ArchiveSuite:
    """
    Round trip of a dataset through an HDF5 file.
    """
    def setup(self):
        self._td = TemporaryDirectory()
        self.path = osp.join(self._td.name, 'data.h5')
        self.data = cakemoist.synthesize('s1', 10000, 0)

    def teardown(self):
        self._td.cleanup()

    def time_save_load(self):
        cakemoist.save_dataset_h5(self.data, self.path)
        cakemoist.load_dataset_h5(self.path)


def _prepared(scenario):
    raw = cakemoist.synthesize(scenario, 144, 0)
    train, test = cakemoist.split(raw, 0.7, 0)
    params = cakemoist.fit_normalizer(train)
    return cakemoist.apply_normalizer(params, train), cakemoist.apply_normalizer(params, test)
