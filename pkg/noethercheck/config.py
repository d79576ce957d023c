"""
This module reads run configurations from csv tables with the columns
section, parameter and value, applies command line overrides, fills in
defaults and builds the model and run objects from them.

Exact rationals are written as "p/q" (decimals are read exactly as well).
The value "sym" keeps a model parameter symbolic, which only the symbolic
subcommands accept.
"""

import logging
import os

import pandas as pd
import sympy as sp

from noethercheck import jetcalc
from noethercheck import model
from noethercheck import solver


class ConfigError(ValueError):
    pass


SYMBOLIC = "sym"

# (section, parameter) -> default value, None for parameters without default
DEFAULTS = {
    ("model", "n"): "1",
    ("model", "damping"): "none",
    ("model", "m"): None,
    ("model", "a0"): None,
    ("model", "damping_file"): None,
    ("model", "nonlinearity"): "power",
    ("model", "f0"): "1",
    ("model", "p"): None,
    ("model", "rate"): None,
    ("model", "sigma"): "0",
    ("model", "kappa"): None,
    ("model", "allow_linear"): "false",
    ("model", "t0"): "1",
    ("grid", "lengths"): "20",
    ("grid", "points"): "256",
    ("run", "t_end"): None,
    ("run", "dt"): None,
    ("run", "safety"): "1/2",
    ("run", "stride"): "1",
    ("initial", "amplitude"): "1/2",
    ("initial", "center"): "0",
    ("initial", "width"): "1",
    ("initial", "velocity"): "zero",
    ("initial", "velocity_amplitude"): "0",
    ("initial", "offset"): "0",
    ("initial", "seed"): "0",
    ("diagnostics", "currents"): "linear_momentum",
    ("diagnostics", "tolerance"): "0.005",
    ("diagnostics", "energy"): "false",
    ("diagnostics", "levels"): "1",
    ("diagnostics", "plots"): "true",
    ("transform", "sigma0"): None,
    ("transform", "levels"): "3",
    ("verify", "expect_variational"): None,
    ("verify", "expect_not_variational"): None,
    ("verify", "solve_factors"): "true",
    ("verify", "families"): None,
}

SECTIONS = tuple(dict.fromkeys(section for section, _ in DEFAULTS))


def read_config(path):
    """
    Reads a configuration table.

    Parameters
    ----------
    path: str
        csv file with the columns section, parameter and value

    Returns
    -------
    dict
        section -> {parameter: value string}
    """
    if not os.path.isfile(path):
        raise ConfigError(f"The configuration file {path} does not exist.")
    try:
        table = pd.read_csv(
            path, dtype=str, keep_default_na=False, comment="#", skipinitialspace=True
        )
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as error:
        raise ConfigError(f"The configuration file {path} is malformed: {error}")
    missing = {"section", "parameter", "value"} - set(table.columns)
    if missing:
        raise ConfigError(
            f"The configuration file {path} misses the columns {sorted(missing)}."
        )
    config = {"__directory__": os.path.dirname(os.path.abspath(path))}
    for row in table.itertuples(index=False):
        _set(config, row.section.strip(), row.parameter.strip(), row.value.strip())
    return config


def _set(config, section, parameter, value):
    if section not in SECTIONS:
        raise ConfigError(
            f"The section {section} is not recognized. Please choose one of "
            f"{SECTIONS}."
        )
    if (section, parameter) not in DEFAULTS:
        raise ConfigError(
            f"The parameter {section}.{parameter} is not recognized. Please "
            f"choose one of {sorted(f'{s}.{p}' for s, p in DEFAULTS)}."
        )
    config.setdefault(section, {})[parameter] = value


def apply_overrides(config, overrides):
    """Applies "section.parameter=value" strings to `config` in place."""
    for override in overrides or ():
        key, separator, value = override.partition("=")
        section, dot, parameter = key.strip().partition(".")
        if not separator or not dot:
            raise ConfigError(
                f"The override {override} is malformed. Please write "
                f"section.parameter=value."
            )
        logging.info(f"The parameter {key} is overridden with {value}.")
        _set(config, section, parameter, value.strip())
    return config


def with_defaults(config):
    """Fills every missing parameter that has a default."""
    for (section, parameter), default in DEFAULTS.items():
        values = config.setdefault(section, {})
        if parameter not in values and default is not None:
            logging.info(
                f"The parameter {section}.{parameter} is taken from the defaults "
                f"({default})."
            )
            values[parameter] = default
    return config


def load_config(path, overrides=()):
    """:py:func:`read_config`, :py:func:`apply_overrides` and defaults."""
    return with_defaults(apply_overrides(read_config(path), overrides))


def get(config, section, parameter):
    """Value string or None if neither given nor defaulted."""
    value = config.get(section, {}).get(parameter)
    return None if value in (None, "") else value


def parse_number(text, name):
    """Exact rational from "p/q", an integer or a decimal."""
    try:
        return sp.Rational(text)
    except (TypeError, ValueError):
        raise ConfigError(
            f"The value {text} of {name} is not a number. Please write exact "
            f"rationals as p/q."
        )


def parse_bool(text, name):
    if text.lower() in ("true", "yes", "1"):
        return True
    if text.lower() in ("false", "no", "0"):
        return False
    raise ConfigError(f"The value {text} of {name} is not true or false.")


def parse_list(text):
    return [] if text is None else [v.strip() for v in text.split(",") if v.strip()]


def _model_value(config, parameter, symbolic, required=False):
    text = get(config, "model", parameter)
    if text is None:
        if required:
            raise ConfigError(f"The parameter model.{parameter} is required.")
        return None
    if text == SYMBOLIC:
        if not symbolic:
            raise ConfigError(
                f"The parameter model.{parameter} is symbolic, numeric runs need "
                f"a number."
            )
        return jetcalc.parameter(parameter)
    return parse_number(text, f"model.{parameter}")


def _read_damping_table(config, path):
    path = os.path.join(config.get("__directory__", ""), path)
    try:
        table = pd.read_csv(path)
    except FileNotFoundError:
        raise ConfigError(f"The damping table {path} does not exist.")
    if not {"t", "a"} <= set(table.columns):
        raise ConfigError(f"The damping table {path} needs the columns t and a.")
    return table["t"].to_numpy(), table["a"].to_numpy()


def _damping(config, symbolic):
    kind = get(config, "model", "damping")
    if kind == "none":
        return model.DampingSpec.none()
    if kind == "power":
        return model.DampingSpec.power(_model_value(config, "m", symbolic, True))
    if kind == "constant":
        return model.DampingSpec.constant(_model_value(config, "a0", symbolic, True))
    if kind == "tabulated":
        path = get(config, "model", "damping_file")
        if path is None:
            raise ConfigError("Tabulated damping needs model.damping_file.")
        return model.DampingSpec.tabulated(*_read_damping_table(config, path))
    raise ConfigError(
        f"The damping {kind} is not recognized. Please choose none, power, "
        f"constant or tabulated."
    )


def _nonlinearity(config, n, damping, symbolic):
    kind = get(config, "model", "nonlinearity")
    allow_linear = parse_bool(get(config, "model", "allow_linear"), "allow_linear")
    if kind == "power":
        f0 = _model_value(config, "f0", symbolic)
        if get(config, "model", "p") == "special":
            m = 0 if damping.kind == "none" else damping.m
            if damping.kind not in ("none", "power"):
                raise ConfigError("p = special needs damping none or power.")
            p = model.special_exponent(n, m)
        else:
            p = _model_value(config, "p", symbolic, True)
        return model.NonlinearitySpec.power(f0, p, allow_linear)
    if kind == "exponential":
        if get(config, "model", "rate") == "m":
            if damping.kind != "power":
                raise ConfigError("rate = m needs power damping.")
            rate = damping.m
        else:
            rate = _model_value(config, "rate", symbolic, True)
        return model.NonlinearitySpec.exponential(
            _model_value(config, "f0", symbolic), rate
        )
    if kind == "logarithmic":
        return model.NonlinearitySpec.logarithmic(
            _model_value(config, "sigma", symbolic),
            _model_value(config, "kappa", symbolic, True),
            allow_linear,
        )
    if kind == "generic":
        return model.NonlinearitySpec.generic()
    raise ConfigError(
        f"The nonlinearity {kind} is not recognized. Please choose power, "
        f"exponential, logarithmic or generic."
    )


def model_from_config(config, symbolic=True):
    """
    Builds the :class:`~.model.ModelSpec` of the model section.

    Besides numbers and "sym", p accepts "special" (p = (n+3+m)/(n-1+m)) and
    rate accepts "m" (the damping exponent).
    """
    try:
        n = int(get(config, "model", "n"))
        damping = _damping(config, symbolic)
        nonlinearity = _nonlinearity(config, n, damping, symbolic)
        t0 = _model_value(config, "t0", symbolic)
        return model.ModelSpec(n, damping, nonlinearity, t0)
    except ConfigError:
        raise
    except (ValueError, TypeError) as error:
        raise ConfigError(f"The model section is invalid: {error}")


def _numbers(config, section, parameter):
    text = get(config, section, parameter)
    if text is None:
        raise ConfigError(f"The parameter {section}.{parameter} is required.")
    return tuple(
        float(parse_number(v, f"{section}.{parameter}")) for v in text.split()
    )


def _number(config, section, parameter):
    text = get(config, section, parameter)
    if text is None:
        return None
    return float(parse_number(text, f"{section}.{parameter}"))


def grid_from_config(config, n):
    lengths = _numbers(config, "grid", "lengths")
    points = tuple(int(v) for v in _numbers(config, "grid", "points"))
    # a single value applies to every axis
    if len(lengths) == 1:
        lengths = lengths * n
    if len(points) == 1:
        points = points * n
    try:
        return solver.GridSpec(n, lengths, points)
    except ValueError as error:
        raise ConfigError(f"The grid section is invalid: {error}")


def initial_from_config(config, n):
    center = _numbers(config, "initial", "center")
    if len(center) == 1:
        center = center * n
    try:
        return solver.InitialData(
            _number(config, "initial", "amplitude"),
            center,
            _number(config, "initial", "width"),
            get(config, "initial", "velocity"),
            _number(config, "initial", "velocity_amplitude"),
            _number(config, "initial", "offset"),
            int(get(config, "initial", "seed")),
        )
    except ValueError as error:
        raise ConfigError(f"The initial section is invalid: {error}")


def run_config_from_config(config, spec=None):
    """Builds the :class:`~.solver.RunConfig` of a numeric configuration."""
    spec = spec or model_from_config(config, symbolic=False)
    if get(config, "run", "t_end") is None:
        raise ConfigError("The parameter run.t_end is required.")
    try:
        return solver.RunConfig(
            spec,
            grid_from_config(config, spec.n),
            initial_from_config(config, spec.n),
            _number(config, "run", "t_end"),
            dt=_number(config, "run", "dt"),
            safety=_number(config, "run", "safety"),
            stride=int(_number(config, "run", "stride")),
        )
    except ConfigError:
        raise
    except ValueError as error:
        raise ConfigError(f"The run section is invalid: {error}")


def _text(value):
    value = sp.sympify(value)
    if isinstance(value, sp.Symbol):
        return SYMBOLIC
    if value.free_symbols:
        raise ConfigError(
            f"The value {value} depends on parameters and has no configuration "
            f"form."
        )
    return str(value)


def model_to_config(spec):
    """
    The model section of `spec` as a table with the columns section,
    parameter and value. Tabulated damping is not written.
    """
    if spec.damping.kind == "tabulated":
        raise ConfigError("Tabulated damping is written as a separate table.")
    rows = [("n", spec.n), ("damping", spec.damping.kind), ("t0", spec.t0)]
    if spec.damping.kind == "power":
        rows.append(("m", spec.damping.m))
    if spec.damping.kind == "constant":
        rows.append(("a0", spec.damping.a0))
    nl = spec.nonlinearity
    rows.append(("nonlinearity", nl.kind))
    if nl.kind == "power":
        p = "special" if model.has_special_exponent(spec) else nl.p
        rows += [("f0", nl.f0), ("p", p)]
    elif nl.kind == "exponential":
        same = spec.damping.kind == "power" and jetcalc.is_zero(nl.rate - spec.damping.m)
        rows += [("f0", nl.f0), ("rate", "m" if same else nl.rate)]
    elif nl.kind == "logarithmic":
        rows += [("sigma", nl.sigma), ("kappa", nl.kappa)]
    if nl.allow_linear:
        rows.append(("allow_linear", "true"))
    return pd.DataFrame(
        [
            ("model", parameter, value if isinstance(value, str) else _text(value))
            for parameter, value in rows
        ],
        columns=["section", "parameter", "value"],
    )
