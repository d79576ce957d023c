"""
run these tests with `pytest tests/name_of_test_module.py` or `pytest tests`
or simply `pytest`; pytest collects all files starting with "test_" and runs
all functions within them starting with "test_".
"""

import os

import numpy as np

from noethercheck.diagnostics import ChargeSeries
from noethercheck.plots import plot_charges, plot_energy


class TestPlots:
    @classmethod
    def setup_class(self):
        times = np.linspace(1, 3, 21)
        self.momentum = ChargeSeries("P_1", times, 1 + 1e-4 * times, np.ones(21))
        self.energy = ChargeSeries("energy", times, np.exp(-times), np.ones(21))

    def test_plot_charges(self, tmpdir):
        path = plot_charges([self.momentum, self.energy], tmpdir)
        assert os.path.isfile(path)
        assert path.endswith("charges.svg")
        with open(path) as handle:
            assert "<svg" in handle.read()

    def test_plot_absolute_charges_without_series(self, tmpdir):
        path = plot_charges([], tmpdir, filename="empty.svg", relative=False)
        assert os.path.isfile(path)

    def test_plot_energy(self, tmpdir):
        path = plot_energy(self.energy, tmpdir)
        assert os.path.isfile(path)
        assert sorted(os.listdir(tmpdir)) == ["energy.svg"]
