import json
import os

import numpy as np
import pytest
import sympy as sp

from noethercheck import cli
from noethercheck import constants
from noethercheck import jetcalc
from noethercheck.solver import read_snapshots

CONFIGS = os.path.join(constants.TEST_DATA_DIRECTORY, "configs")
m = jetcalc.m
SYMBOLS = {"m": m}


def config_path(name):
    return os.path.join(CONFIGS, name)


def read_summary(out, command):
    with open(os.path.join(out, f"{command}.json")) as handle:
        return json.load(handle)


class TestVerifySymbolic:
    def test_undamped_catalog(self, tmpdir):
        out = os.path.join(tmpdir, "out")
        code = cli.main(
            [
                "verify-symbolic",
                "--config",
                config_path("verify_undamped_1d.csv"),
                "--out",
                out,
            ]
        )
        assert code == cli.EXIT_OK
        summary = read_summary(out, "verify_symbolic")
        assert summary["passed"]
        assert summary["failures"] == []
        assert summary["version"] == constants.__version__
        assert {c["family"] for c in summary["transcribed"]} == {
            "linear_momentum",
            "energy",
        }
        assert all(c["null_difference"] for c in summary["transcribed"])

    def test_failed_expectation(self, tmpdir):
        out = os.path.join(tmpdir, "out")
        code = cli.main(
            [
                "verify-symbolic",
                "--config",
                config_path("verify_undamped_1d.csv"),
                "--out",
                out,
                "--set",
                "verify.expect_not_variational=P_1",
            ]
        )
        assert code == cli.EXIT_FAILED
        summary = read_summary(out, "verify_symbolic")
        assert not summary["passed"]
        assert summary["overrides"] == ["verify.expect_not_variational=P_1"]

    def test_configuration_error_leaves_no_files(self, tmpdir):
        out = os.path.join(tmpdir, "out")
        code = cli.main(
            [
                "verify-symbolic",
                "--config",
                config_path("verify_undamped_1d.csv"),
                "--out",
                out,
                "--set",
                "model.damping=viscous",
            ]
        )
        assert code == cli.EXIT_CONFIG
        assert not os.path.exists(out)

    def test_missing_configuration(self, tmpdir):
        out = os.path.join(tmpdir, "out")
        assert cli.main(["derive-factors", "--out", out]) == cli.EXIT_CONFIG

    def test_unknown_command(self):
        with pytest.raises(SystemExit):
            cli.main(["integrate"])


def example_path(name):
    return os.path.join(constants.DEFAULT_EXAMPLES_DIRECTORY, name)


def expectations(n, scaling):
    translations = [f"P_{k}" for k in range(1, n + 1)]
    rotations = [
        f"J_{k}{l}" for k in range(1, n + 1) for l in range(k + 1, n + 1)
    ]
    boosts = [f"K_{k}" for k in range(1, n + 1)]
    variational = ",".join(translations + rotations + scaling)
    return [
        f"model.n={n}",
        f"verify.expect_variational={variational}",
        f"verify.expect_not_variational={','.join(['P_t'] + boosts)}",
    ]


@pytest.mark.parametrize("n", [2, 3, pytest.param(4, marks=pytest.mark.slow)])
class TestBundledSymbolicModels:
    def test_power_damping_with_the_special_exponent(self, tmpdir, n):
        out = os.path.join(tmpdir, "out")
        scaling = ["D"] + [f"C_{k}" for k in range(1, n + 1)]
        code = cli.main(
            ["verify-symbolic", "--config", example_path("symbolic_power_3d.csv")]
            + ["--out", out, "--set", "verify.solve_factors=true"]
            + [x for o in expectations(n, scaling) for x in ("--set", o)]
        )
        summary = read_summary(out, "verify_symbolic")
        assert summary["failures"] == []
        assert code == cli.EXIT_OK
        families = {c["family"] for c in summary["transcribed"]}
        assert {"linear_momentum", "angular_momentum", "dilation", "conformal"} <= (
            families
        )
        assert all(c["verified"] for c in summary["transcribed"])
        (solution,) = summary["factors"]["C_1(q)"]
        assert jetcalc.is_zero(sp.sympify(solution["q"], locals=SYMBOLS) - (1 - n - m))

    def test_exponential_interaction(self, tmpdir, n):
        out = os.path.join(tmpdir, "out")
        scaling = ["D_exp"] + [f"C_{k}_exp" for k in range(1, n + 1)]
        code = cli.main(
            ["verify-symbolic", "--config", example_path("symbolic_exponential_3d.csv")]
            + ["--out", out, "--set", f"model.m={1 - n}"]
            + [x for o in expectations(n, scaling) for x in ("--set", o)]
        )
        summary = read_summary(out, "verify_symbolic")
        assert summary["failures"] == []
        assert code == cli.EXIT_OK
        assert "conformal_exponential" in {c["family"] for c in summary["transcribed"]}

    def test_exponential_factor(self, tmpdir, n):
        out = os.path.join(tmpdir, "out")
        code = cli.main(
            ["derive-factors", "--config", example_path("symbolic_exponential_3d.csv")]
            + ["--out", out, "--set", f"model.n={n}", "--set", "model.m=sym"]
        )
        assert code == cli.EXIT_OK
        factors = read_summary(out, "derive_factors")["factors"]
        assert factors["C_1_exp(m)"] == [{"m": str(1 - n)}]


class TestDeriveFactors:
    def test_symbolic_damping_exponent(self, tmpdir):
        out = os.path.join(tmpdir, "out")
        code = cli.main(
            [
                "derive-factors",
                "--config",
                config_path("verify_undamped_1d.csv"),
                "--out",
                out,
                "--set",
                "model.damping=power",
                "--set",
                "model.m=sym",
            ]
        )
        assert code == cli.EXIT_OK
        factors = read_summary(out, "derive_factors")["factors"]
        assert set(factors) == {"C_1(q)", "D(d)"}


class TestSimulate:
    def test_snapshots_and_report(self, tmpdir):
        out = os.path.join(tmpdir, "out")
        arguments = ["--config", config_path("simulate_1d.csv"), "--out", out]
        assert cli.main(["simulate"] + arguments) == cli.EXIT_OK
        summary = read_summary(out, "simulate")
        assert {f["path"] for f in summary["files"]} == {
            "snapshots.npz",
            "snapshots.csv",
        }
        record = read_snapshots(os.path.join(out, "snapshots.npz"))
        assert len(record.snapshots) == summary["snapshots"]
        assert record.grid.points == (64,)

        assert cli.main(["report", "--out", out]) == cli.EXIT_OK
        with open(os.path.join(out, "report.json")) as handle:
            merged = json.load(handle)
        assert merged["passed"]
        assert "simulate.json" in merged["summaries"]

    def test_blow_up(self, tmpdir):
        out = os.path.join(tmpdir, "out")
        code = cli.main(
            [
                "simulate",
                "--config",
                config_path("simulate_1d.csv"),
                "--out",
                out,
                "--set",
                "model.f0=-1",
                "--set",
                "initial.amplitude=5",
                "--set",
                "run.t_end=20",
            ]
        )
        assert code == cli.EXIT_BLOW_UP
        summary = read_summary(out, "simulate")
        assert not summary["passed"]
        assert summary["blow_up"]["time"] < 20
        record = read_snapshots(os.path.join(out, "snapshots.npz"))
        assert all(np.all(np.isfinite(s.u)) for s in record.snapshots)

    def test_symbolic_values_cannot_run(self, tmpdir):
        out = os.path.join(tmpdir, "out")
        code = cli.main(
            [
                "simulate",
                "--config",
                config_path("simulate_1d.csv"),
                "--out",
                out,
                "--set",
                "model.f0=sym",
            ]
        )
        assert code == cli.EXIT_CONFIG
        assert not os.path.exists(out)


class TestCharges:
    def test_momentum_and_energy(self, tmpdir):
        out = os.path.join(tmpdir, "out")
        code = cli.main(
            ["charges", "--config", config_path("charges_1d.csv"), "--out", out]
        )
        assert code == cli.EXIT_OK
        summary = read_summary(out, "charges")
        assert list(summary["drifts"]) == ["linear_momentum:P_1"]
        assert summary["energy"]["monotone"]
        for name in ("charges.csv", "charges.svg", "energy.svg"):
            assert os.path.isfile(os.path.join(out, name))

    def test_blow_up_writes_the_charges_summary(self, tmpdir):
        out = os.path.join(tmpdir, "out")
        code = cli.main(
            ["charges", "--config", config_path("charges_1d.csv"), "--out", out]
            + ["--set", "model.f0=-1", "--set", "initial.amplitude=5"]
            + ["--set", "run.t_end=20"]
        )
        assert code == cli.EXIT_BLOW_UP
        summary = read_summary(out, "charges")
        assert summary["command"] == "charges"
        assert not summary["passed"]
        assert summary["blow_up"]["time"] < 20
        assert not os.path.exists(os.path.join(out, "simulate.json"))


class TestSeed:
    def simulate(self, out, *extra):
        code = cli.main(
            ["simulate", "--config", config_path("simulate_1d.csv"), "--out", out]
            + ["--set", "initial.velocity=random"]
            + ["--set", "initial.velocity_amplitude=1/2"]
            + list(extra)
        )
        assert code == cli.EXIT_OK
        return read_snapshots(os.path.join(out, "snapshots.npz")).snapshots

    def test_seed_drives_the_random_velocity(self, tmpdir):
        first = self.simulate(os.path.join(tmpdir, "a"), "--seed", "7")
        again = self.simulate(os.path.join(tmpdir, "b"), "--seed", "7")
        other = self.simulate(os.path.join(tmpdir, "c"), "--seed", "8")
        assert np.array_equal(first[-1].u, again[-1].u)
        assert not np.allclose(first[-1].u, other[-1].u)
        assert read_summary(os.path.join(tmpdir, "a"), "simulate")["seed"] == 7

    def test_explicit_override_wins(self, tmpdir):
        first = self.simulate(os.path.join(tmpdir, "a"), "--seed", "8")
        second = self.simulate(
            os.path.join(tmpdir, "b"), "--seed", "8", "--set", "initial.seed=7"
        )
        third = self.simulate(os.path.join(tmpdir, "c"), "--seed", "7")
        assert not np.allclose(first[-1].u, second[-1].u)
        assert np.array_equal(second[-1].u, third[-1].u)


class TestTransformCheck:
    def test_power_damping_without_obstruction(self, tmpdir):
        out = os.path.join(tmpdir, "out")
        code = cli.main(
            [
                "transform-check",
                "--config",
                config_path("removal_power_1d.csv"),
                "--out",
                out,
            ]
        )
        assert code == cli.EXIT_OK
        assert read_summary(out, "transform_check")["obstruction"]["constant"]

    def test_power_damping_with_obstruction(self, tmpdir):
        out = os.path.join(tmpdir, "out")
        code = cli.main(
            [
                "transform-check",
                "--config",
                config_path("removal_power_1d.csv"),
                "--out",
                out,
                "--set",
                "model.m=3",
            ]
        )
        assert code == cli.EXIT_FAILED
        assert read_summary(out, "transform_check")["obstruction"]["conditions"] == []

    def test_power_damping_removal_runs(self, tmpdir):
        out = os.path.join(tmpdir, "out")
        code = cli.main(
            ["transform-check", "--config", example_path("transform_power_1d.csv")]
            + ["--out", out, "--set", "transform.levels=1"]
        )
        assert code == cli.EXIT_OK
        summary = read_summary(out, "transform_check")
        assert summary["obstruction"]["constant"]
        (experiment,) = summary["experiments"]
        assert experiment["damping"] == "power"
        assert experiment["sigma0"] == "0"
        assert experiment["max_gap"] < 0.2

    @pytest.mark.slow
    def test_power_damping_removal_converges(self, tmpdir):
        out = os.path.join(tmpdir, "out")
        code = cli.main(
            ["transform-check", "--config", example_path("transform_power_1d.csv")]
            + ["--out", out]
        )
        assert code == cli.EXIT_OK
        summary = read_summary(out, "transform_check")
        assert len(summary["experiments"]) == 3
        low, high = cli.CONTRACTION_RANGE
        assert low <= summary["refinement"]["contraction"] <= high


@pytest.mark.slow
class TestBundledChargeRuns:
    def test_power_damping_charges_in_two_dimensions(self, tmpdir):
        out = os.path.join(tmpdir, "out")
        code = cli.main(
            ["charges", "--config", example_path("charges_power_2d.csv")]
            + ["--out", out]
        )
        summary = read_summary(out, "charges")
        assert code == cli.EXIT_OK
        assert set(summary["drifts"]) == {
            "linear_momentum:P_1",
            "linear_momentum:P_2",
            "angular_momentum:J_12",
            "dilation:D",
        }
        for reports in summary["drifts"].values():
            assert len(reports) == 3
            assert reports[-1]["relative_drift"] <= constants.DRIFT_TOLERANCE
        assert summary["refinement"]["linear_momentum:P_2"]["roundoff"]
        low, high = cli.CONTRACTION_RANGE
        for name in ("linear_momentum:P_1", "angular_momentum:J_12", "dilation:D"):
            study = summary["refinement"][name]
            assert not study["roundoff"]
            assert low <= study["contraction"] <= high
