import os

import numpy as np
import pandas as pd
import pytest
import sympy as sp

from noethercheck import config
from noethercheck import constants
from noethercheck import jetcalc
from noethercheck import model
from noethercheck.config import (
    ConfigError,
    apply_overrides,
    load_config,
    model_from_config,
    model_to_config,
    read_config,
    run_config_from_config,
)

EXAMPLES = constants.DEFAULT_EXAMPLES_DIRECTORY


def example(name):
    return os.path.join(EXAMPLES, name)


def write_table(tmpdir, rows, name="config.csv"):
    path = os.path.join(tmpdir, name)
    pd.DataFrame(rows, columns=["section", "parameter", "value"]).to_csv(
        path, index=False
    )
    return path


class TestReadConfig:
    def test_examples_are_readable(self):
        for name in os.listdir(EXAMPLES):
            if name == "tabulated_damping.csv":
                continue
            settings = load_config(example(name))
            spec = model_from_config(settings)
            assert spec.n in constants.SYMBOLIC_DIMENSIONS

    def test_comments_are_skipped(self):
        settings = read_config(example("momentum_1d.csv"))
        assert settings["model"]["p"] == "3"
        assert settings["diagnostics"]["currents"] == "linear_momentum,energy"

    def test_missing_file(self):
        with pytest.raises(ConfigError, match="does not exist"):
            read_config("no_such_config.csv")

    def test_missing_columns(self, tmpdir):
        path = os.path.join(tmpdir, "config.csv")
        pd.DataFrame({"section": ["model"], "value": ["1"]}).to_csv(path, index=False)
        with pytest.raises(ConfigError, match="misses the columns"):
            read_config(path)

    def test_unknown_section(self, tmpdir):
        path = write_table(tmpdir, [("solver", "dt", "0.1")])
        with pytest.raises(ConfigError, match="section solver"):
            read_config(path)

    def test_unknown_parameter(self, tmpdir):
        path = write_table(tmpdir, [("model", "mass", "1")])
        with pytest.raises(ConfigError, match="model.mass"):
            read_config(path)

    def test_defaults(self, tmpdir):
        settings = load_config(write_table(tmpdir, [("model", "p", "3")]))
        assert settings["model"]["n"] == "1"
        assert settings["run"]["safety"] == "1/2"
        assert "t_end" not in settings["run"]


class TestOverrides:
    @classmethod
    def setup_class(self):
        self.settings = read_config(example("momentum_1d.csv"))

    def test_override_replaces_the_value(self):
        settings = load_config(example("momentum_1d.csv"), ["model.p=5", "run.t_end=2"])
        assert settings["model"]["p"] == "5"
        assert settings["run"]["t_end"] == "2"

    def test_malformed_override(self):
        with pytest.raises(ConfigError, match="malformed"):
            apply_overrides(dict(self.settings), ["model.p"])
        with pytest.raises(ConfigError, match="malformed"):
            apply_overrides(dict(self.settings), ["p=3"])

    def test_unknown_override(self):
        with pytest.raises(ConfigError):
            apply_overrides(dict(self.settings), ["model.mass=1"])


class TestModel:
    def test_special_exponent(self):
        spec = model_from_config(load_config(example("symbolic_power_3d.csv")))
        assert spec.damping.m == jetcalc.m
        assert jetcalc.is_zero(spec.nonlinearity.p - (6 + jetcalc.m) / (2 + jetcalc.m))
        assert model.has_special_exponent(spec)

    def test_rate_follows_the_damping_exponent(self):
        spec = model_from_config(load_config(example("symbolic_exponential_3d.csv")))
        assert spec.nonlinearity.rate == spec.damping.m == -2

    def test_exact_rationals(self):
        spec = model_from_config(load_config(example("energy_decay_2d.csv")))
        assert spec.damping.a0 == sp.Rational(1, 2)

    def test_symbolic_values_are_rejected_for_runs(self):
        settings = load_config(example("symbolic_power_3d.csv"))
        with pytest.raises(ConfigError, match="symbolic"):
            model_from_config(settings, symbolic=False)

    def test_not_a_number(self):
        settings = load_config(example("momentum_1d.csv"), ["model.p=three"])
        with pytest.raises(ConfigError, match="not a number"):
            model_from_config(settings)

    def test_unknown_damping(self):
        settings = load_config(example("momentum_1d.csv"), ["model.damping=viscous"])
        with pytest.raises(ConfigError, match="viscous"):
            model_from_config(settings)

    def test_invalid_model(self):
        settings = load_config(example("momentum_1d.csv"), ["model.n=5"])
        with pytest.raises(ConfigError, match="invalid"):
            model_from_config(settings)

    def test_tabulated_damping(self):
        spec = model_from_config(load_config(example("energy_tabulated_1d.csv")))
        assert spec.damping.kind == "tabulated"
        assert np.asarray(spec.damping.times)[0] == pytest.approx(1)

    def test_missing_damping_table(self, tmpdir):
        path = write_table(
            tmpdir,
            [
                ("model", "damping", "tabulated"),
                ("model", "damping_file", "missing.csv"),
                ("model", "p", "3"),
            ],
        )
        with pytest.raises(ConfigError, match="missing.csv"):
            model_from_config(load_config(path))

    def test_written_model_reads_back(self, tmpdir):
        spec = model_from_config(load_config(example("symbolic_power_3d.csv")))
        table = model_to_config(spec)
        assert dict(zip(table["parameter"], table["value"]))["p"] == "special"
        path = os.path.join(tmpdir, "model.csv")
        table.to_csv(path, index=False)
        assert model_from_config(load_config(path)) == spec

    def test_tabulated_damping_has_no_model_table(self):
        spec = model_from_config(load_config(example("energy_tabulated_1d.csv")))
        with pytest.raises(ConfigError):
            model_to_config(spec)


class TestRunConfig:
    def test_example_run(self):
        cfg = run_config_from_config(load_config(example("momentum_1d.csv")))
        assert cfg.grid.points == (256,)
        assert cfg.grid.lengths == (40.0,)
        assert cfg.stride == 4
        assert cfg.initial.velocity == "translating"
        assert cfg.t_end == pytest.approx(7)

    def test_needs_an_end_time(self, tmpdir):
        settings = load_config(write_table(tmpdir, [("model", "p", "3")]))
        with pytest.raises(ConfigError, match="t_end"):
            run_config_from_config(settings)

    def test_invalid_grid(self):
        settings = load_config(example("momentum_1d.csv"), ["grid.points=4"])
        with pytest.raises(ConfigError, match="grid"):
            run_config_from_config(settings)

    def test_power_damping_example(self):
        cfg = run_config_from_config(load_config(example("charges_power_2d.csv")))
        assert cfg.grid.points == (128, 128)
        assert cfg.initial.center == (1.0, 0.625)
        assert cfg.spec.damping.kind == "power"

    def test_random_velocity_seed(self):
        overrides = ["initial.velocity=random", "initial.seed=11"]
        settings = load_config(example("momentum_1d.csv"), overrides)
        assert run_config_from_config(settings).initial.seed == 11
        default = run_config_from_config(load_config(example("momentum_1d.csv")))
        assert default.initial.seed == 0
        settings = load_config(example("momentum_1d.csv"), ["initial.seed=x"])
        with pytest.raises(ConfigError, match="initial"):
            run_config_from_config(settings)

    def test_lists(self):
        assert config.parse_list("a, b,,c") == ["a", "b", "c"]
        assert config.parse_list(None) == []
        with pytest.raises(ConfigError):
            config.parse_bool("maybe", "plots")
