"""
Command line front end.

Subcommands: verify-symbolic, derive-factors, simulate, charges,
transform-check and report. Exit codes: 0 ok, 1 verification failure,
2 configuration error, 3 numeric blow-up.
"""

import argparse
import glob
import json
import logging
import os
import sys

import numpy as np
import pandas as pd
import sympy as sp

from noethercheck import artifacts
from noethercheck import config
from noethercheck import constants
from noethercheck import currents
from noethercheck import diagnostics
from noethercheck import jetcalc
from noethercheck import model
from noethercheck import plots
from noethercheck import solver
from noethercheck import symmetry
from noethercheck import xform

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_BLOW_UP = 3

# contraction of a second order observable under halving, 4 +- 25 %
CONTRACTION_RANGE = (3.0, 5.0)


def _summary(args, command, passed, files, **content):
    summary = {
        "command": command,
        "config": os.path.abspath(args.config) if args.config else None,
        "overrides": list(args.set or ()),
        "seed": args.seed,
        "version": constants.__version__,
        "passed": bool(passed),
        "files": artifacts.file_entries(files, args.out),
    }
    summary.update(content)
    return summary


def _finish(args, command, passed, files, **content):
    path = os.path.join(args.out, f"{command.replace('-', '_')}.json")
    artifacts.write_json(path, _summary(args, command, passed, files, **content))
    return EXIT_OK if passed else EXIT_FAILED


def _load(args):
    if args.config is None:
        raise config.ConfigError("Please give a configuration file with --config.")
    overrides = list(args.set or ())
    if args.seed is not None:
        overrides.insert(0, f"initial.seed={args.seed}")
    return config.load_config(args.config, overrides)


def _validate(args):
    settings = _load(args)
    config.model_from_config(settings, symbolic=True)
    if args.command in ("simulate", "charges"):
        config.run_config_from_config(settings)


def verify_symbolic(args):
    """
    Evaluates the generator catalog, builds and verifies the Noether currents
    and cross-checks the transcribed current families.
    """
    settings = _load(args)
    spec = config.model_from_config(settings, symbolic=True)
    failures = []
    generated = {}
    verdicts = []
    for entry, verdict in symmetry.list_symmetries(spec, args.jobs):
        verdicts.append(symmetry.verdict_to_dict(verdict))
        if not verdict.is_variational:
            continue
        try:
            current = currents.noether_current(entry.field, spec, verdict)
        except currents.NotVariationalError as error:
            failures.append(str(error))
            continue
        if not current.verified:
            failures.append(f"The Noether current of {current.generator} fails.")
        if not currents.multiplier_check(current):
            failures.append(f"The multiplier of {current.generator} fails.")
        generated[current.generator] = current

    families = config.parse_list(config.get(settings, "verify", "families"))
    transcribed = []
    for current in currents.transcribed_catalog(spec, args.jobs):
        if families and current.family not in families:
            continue
        report = currents.current_to_dict(current)
        if not current.verified:
            failures.append(
                f"No reading of the {current.family} current of "
                f"{current.generator} verifies."
            )
        if not currents.multiplier_check(current):
            failures.append(f"The multiplier of {current.generator} fails.")
        if current.generator in generated:
            report["null_difference"] = currents.null_difference(
                generated[current.generator], current
            )
            if not report["null_difference"]:
                failures.append(
                    f"The {current.family} current of {current.generator} differs "
                    f"from the generated current by more than a null current."
                )
        transcribed.append(report)

    statuses = {v["generator"]: v["status"] for v in verdicts}
    for name in config.parse_list(config.get(settings, "verify", "expect_variational")):
        if statuses.get(name, "not-variational") == "not-variational":
            failures.append(f"The generator {name} was expected to be variational.")
    for name in config.parse_list(
        config.get(settings, "verify", "expect_not_variational")
    ):
        if statuses.get(name, "not-variational") != "not-variational":
            failures.append(f"The generator {name} was expected not to be variational.")

    factors = None
    if config.parse_bool(config.get(settings, "verify", "solve_factors"), "solve_factors"):
        factors = _solve_factors(spec)

    for failure in failures:
        logging.error(failure)
    return _finish(
        args,
        "verify-symbolic",
        not failures,
        [],
        model=_model_record(spec),
        factors=factors,
        verdicts=verdicts,
        currents=[currents.current_to_dict(c) for c in generated.values()],
        transcribed=transcribed,
        failures=failures,
        sign_convention=model.SIGN_CONVENTION,
    )


def _factor_problems(spec):
    """(name, generator, unknown, constrained) for the applicable families."""
    space = spec.space
    nl = spec.nonlinearity
    m = spec.damping_exponent
    problems = []
    if m is None:
        return problems
    if nl.kind == "power":
        p_free = jetcalc.p in sp.sympify(nl.p).free_symbols
        if not p_free:
            problems.append(
                ("C_1(q)", symmetry.conformal_space(1, jetcalc.q, space), jetcalc.q, ())
            )
        problems.append(
            (
                "D(d)",
                symmetry.dilation(jetcalc.d, space),
                jetcalc.d,
                (jetcalc.p,) if p_free else (),
            )
        )
    if nl.kind == "exponential" and jetcalc.m in sp.sympify(m).free_symbols:
        problems.append(
            (
                "C_1_exp(m)",
                symmetry.conformal_space_exponential(1, nl.rate, space),
                jetcalc.m,
                (),
            )
        )
    return problems


def _solve_factors(spec):
    lagrangian = model.lagrangian(spec)
    results = {}
    for name, generator, unknown, constrained in _factor_problems(spec):
        solutions = symmetry.solve_factor(
            generator, lagrangian, spec.space, unknown, constrained
        )
        results[name] = [{str(k): str(v) for k, v in s.items()} for s in solutions]
    if not results:
        logging.warning("No factor family applies to this model.")
    return results


def _model_record(spec):
    """Model parameters as strings; symbols stay symbolic."""
    record = {"n": spec.n, "damping": spec.damping.kind, "t0": str(spec.t0)}
    for name in ("m", "a0"):
        value = getattr(spec.damping, name)
        if value is not None:
            record[name] = str(value)
    nl = spec.nonlinearity
    record["nonlinearity"] = nl.kind
    for name in ("f0", "p", "rate", "sigma", "kappa"):
        value = getattr(nl, name)
        if value is not None and nl.kind != "generic":
            record[name] = str(value)
    return record


def derive_factors(args):
    """Solves the free factors of the dilation and conformal families."""
    settings = _load(args)
    spec = config.model_from_config(settings, symbolic=True)
    return _finish(args, "derive-factors", True, [], factors=_solve_factors(spec))


def _write_run(args, snapshots, cfg):
    files = []
    if not snapshots:
        return files
    dt, _ = cfg.schedule()
    path = os.path.join(args.out, "snapshots.npz")
    with artifacts.atomic_path(path) as temporary:
        solver.write_snapshots(temporary, snapshots, dt, cfg.t0)
    files.append(path)
    rows = len(snapshots) * np.prod(cfg.grid.points)
    if rows <= constants.MAX_CSV_ROWS:
        path = os.path.join(args.out, "snapshots.csv")
        with artifacts.atomic_path(path) as temporary:
            solver.write_snapshots_csv(temporary, snapshots)
        files.append(path)
    return files


def _run(args, cfg, command):
    """
    Runs `cfg`. On blow-up the partial snapshots and the `command` summary
    are written.
    """
    try:
        return solver.run(cfg)
    except solver.BlowUpError as error:
        files = _write_run(args, error.snapshots, cfg)
        _finish(
            args,
            command,
            False,
            files,
            blow_up={"time": error.time, "message": str(error)},
        )
        raise


def simulate(args):
    settings = _load(args)
    cfg = config.run_config_from_config(settings)
    snapshots = _run(args, cfg, "simulate")
    files = _write_run(args, snapshots, cfg)
    dt, steps = cfg.schedule()
    return _finish(
        args,
        "simulate",
        True,
        files,
        dt=dt,
        steps=steps,
        snapshots=len(snapshots),
        max_abs_u=float(max(np.max(np.abs(s.u)) for s in snapshots)),
    )


def _densities(spec, families):
    """Verified transcribed currents of the requested families."""
    selected = []
    for family, indices in currents.catalog_requests(spec.n):
        if family not in families:
            continue
        try:
            current = currents.transcribed_current(family, spec, *indices)
        except currents.InapplicableModelError as error:
            logging.warning(f"The {family} current is skipped: {error}")
            continue
        if not current.verified:
            raise config.ConfigError(
                f"The {family} current of {current.generator} does not verify."
            )
        name = f"{family}:{current.generator}"
        selected.append((name, diagnostics.compile_density(current.density, spec)))
    return selected


def charges(args):
    """Charge drifts of verified currents, with an optional refinement study."""
    settings = _load(args)
    cfg = config.run_config_from_config(settings)
    families = config.parse_list(config.get(settings, "diagnostics", "currents"))
    tolerance = float(config.get(settings, "diagnostics", "tolerance"))
    levels = int(config.get(settings, "diagnostics", "levels"))
    densities = _densities(cfg.spec, families)
    runs = [cfg] + [solver.refine(cfg, 2 ** i) for i in range(1, levels)]

    drifts = {name: [] for name, _ in densities}
    frames = []
    files = []
    last_series = []
    snapshots = []
    for level, run_cfg in enumerate(runs):
        snapshots = _run(args, run_cfg, "charges")
        last_series = []
        for name, density in densities:
            series = diagnostics.charge_series(snapshots, density, name)
            report = diagnostics.drift_report(series, tolerance)
            report["level"] = level
            drifts[name].append(report)
            frame = series.to_frame()
            frame["level"] = level
            frames.append(frame)
            last_series.append(series)

    passed = True
    studies = {}
    for name, reports in drifts.items():
        passed &= reports[-1]["passed"]
        if len(reports) >= 2:
            values = [r["max_drift"] for r in reports]
            factor = diagnostics.contraction_factor(values[-2], values[-1])
            study = {"contraction": factor}
            if len(values) >= 3:
                estimate = diagnostics.convergence_order(values[-3:])
                study.update(order=estimate.order, monotone=estimate.monotone)
            roundoff = reports[-2]["relative_drift"] < constants.ROUNDOFF_DRIFT
            study["roundoff"] = roundoff
            if factor is not None and not roundoff:
                passed &= CONTRACTION_RANGE[0] <= factor <= CONTRACTION_RANGE[1]
            studies[name] = study

    if frames:
        path = os.path.join(args.out, "charges.csv")
        with artifacts.atomic_path(path) as temporary:
            pd.concat(frames, ignore_index=True).to_csv(
                temporary, index=False
            )
        files.append(path)

    energy = None
    plot = config.parse_bool(config.get(settings, "diagnostics", "plots"), "plots")
    if config.parse_bool(config.get(settings, "diagnostics", "energy"), "energy"):
        dt, _ = runs[-1].schedule()
        try:
            energy = diagnostics.energy_decay_check(snapshots, cfg.spec, dt)
        except ValueError as error:
            logging.error(str(error))
            energy = {"error": str(error), "monotone": False}
        passed &= energy["monotone"]
        if plot:
            series = diagnostics.energy_series(snapshots, cfg.spec)
            files.append(plots.plot_energy(series, args.out))
    if plot and last_series:
        files.append(plots.plot_charges(last_series, args.out))
    return _finish(
        args,
        "charges",
        passed,
        files,
        drifts=drifts,
        refinement=studies,
        energy=energy,
    )


def transform_check(args):
    """Damping removal: condition check and refinement of the run gap."""
    settings = _load(args)
    spec = config.model_from_config(settings, symbolic=True)
    sigma0 = config.get(settings, "transform", "sigma0")
    sigma0 = None if sigma0 is None else config.parse_number(sigma0, "sigma0")
    content = {}
    if spec.damping.kind == "power":
        try:
            _, kappa = xform.interaction_coefficients(spec)
        except xform.RemovalConditionError as error:
            logging.error(str(error))
            return _finish(args, "transform-check", False, [], error=str(error))
        verdict = xform.obstruction_check(spec.damping.m, kappa, sigma0 or 0)
        content["obstruction"] = {
            "constant": verdict.constant,
            "conditions": [
                {str(k): str(v) for k, v in c.items()} for c in verdict.conditions
            ],
            "residual": str(verdict.residual),
        }
        if not verdict.constant or config.get(settings, "run", "t_end") is None:
            return _finish(
                args, "transform-check", bool(verdict.constant), [], **content
            )
    cfg = config.run_config_from_config(settings)
    levels = int(config.get(settings, "transform", "levels"))
    reports = []
    try:
        for level in range(levels):
            run_cfg = cfg if level == 0 else solver.refine(cfg, 2 ** level)
            reports.append(xform.removal_experiment(run_cfg, sigma0))
    except xform.RemovalConditionError as error:
        logging.error(str(error))
        return _finish(
            args,
            "transform-check",
            False,
            [],
            error=str(error),
            experiments=reports,
            **content,
        )
    gaps = [r["max_gap"] for r in reports]
    passed = True
    study = {}
    if len(gaps) >= 2:
        factor = diagnostics.contraction_factor(gaps[-2], gaps[-1])
        study["contraction"] = factor
        if factor is not None:
            passed = CONTRACTION_RANGE[0] <= factor <= CONTRACTION_RANGE[1]
    if len(gaps) >= 3:
        estimate = diagnostics.convergence_order(gaps[-3:])
        study.update(order=estimate.order, monotone=estimate.monotone)
    return _finish(
        args,
        "transform-check",
        passed,
        [],
        experiments=reports,
        refinement=study,
        **content,
    )


def report(args):
    """Merges the JSON summaries of the output directory into report.json."""
    summaries = {}
    for path in sorted(glob.glob(os.path.join(args.out, "*.json"))):
        if os.path.basename(path) == "report.json":
            continue
        with open(path) as handle:
            summaries[os.path.basename(path)] = json.load(handle)
    files = [
        p
        for p in glob.glob(os.path.join(args.out, "*"))
        if os.path.isfile(p) and os.path.basename(p) != "report.json"
    ]
    passed = all(s.get("passed", False) for s in summaries.values())
    path = os.path.join(args.out, "report.json")
    artifacts.write_json(
        path,
        {
            "passed": passed,
            "summaries": summaries,
            "files": artifacts.file_entries(files, args.out),
        },
    )
    return EXIT_OK if passed else EXIT_FAILED


COMMANDS = {
    "verify-symbolic": verify_symbolic,
    "derive-factors": derive_factors,
    "simulate": simulate,
    "charges": charges,
    "transform-check": transform_check,
    "report": report,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="csv configuration (section,parameter,value)")
    common.add_argument(
        "--out",
        default=constants.DEFAULT_OUTPUT_DIRECTORY,
        help="output directory for reports, snapshots and plots",
    )
    common.add_argument(
        "--set",
        action="append",
        metavar="SECTION.PARAMETER=VALUE",
        help="override a configuration value, may be repeated",
    )
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument(
        "--seed",
        type=int,
        help="seed of the random initial velocity, overrides initial.seed",
    )
    common.add_argument("--verbose", action="store_true", help="debug logging")
    parser = argparse.ArgumentParser(
        prog="noethercheck",
        description="Verifies Noether symmetries and conservation laws of damped "
        "nonlinear wave equations, symbolically and on numeric runs.",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, function in COMMANDS.items():
        subparsers.add_parser(name, parents=[common], help=function.__doc__)
    return parser


def main(argv=None):
    """Entry point; returns the exit code."""
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stdout,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format=constants.LOG_FORMAT,
    )
    try:
        if args.command != "report":
            # configuration errors leave no artifacts behind
            _validate(args)
        os.makedirs(args.out, exist_ok=True)
        return COMMANDS[args.command](args)
    except (config.ConfigError, model.SymbolicDampingError) as error:
        logging.error(f"Configuration error: {error}")
        return EXIT_CONFIG
    except solver.BlowUpError as error:
        logging.error(f"Numeric blow-up at t = {error.time}: {error}")
        return EXIT_BLOW_UP


if __name__ == "__main__":
    sys.exit(main())
