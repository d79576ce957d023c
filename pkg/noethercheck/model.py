"""
This module defines the damped nonlinear wave family

    u_tt - Δu + a(t) u_t + f(u) = 0

with its damping laws a(t), interaction terms f(u), the integrating factor
mu (mu' = a mu) and the Lagrangian L = mu L0,
L0 = (u_t^2 - |grad u|^2)/2 - F(u), F' = f.

With this sign convention E_u(L) = -mu * residual.
"""

import logging
from dataclasses import dataclass

import numpy as np
import sympy as sp
from scipy.integrate import cumulative_trapezoid
from scipy.interpolate import CubicSpline

from noethercheck import constants
from noethercheck import jetcalc
from noethercheck.jetcalc import t, u

SIGN_CONVENTION = "L0 = (u_t^2 - |grad u|^2)/2 - F(u); E_u(mu L0) = -mu E"


class SymbolicDampingError(ValueError):
    pass


def _is(value, number):
    """True if `value` is (canonically) the number `number`."""
    return jetcalc.is_zero(sp.sympify(value) - number)


@dataclass(frozen=True)
class DampingSpec:
    """
    Damping law a(t).

    kind: "none" (a = 0), "power" (a = m/t), "constant" (a = a0) or
    "tabulated" (samples `values` of a on the strictly increasing `times`).
    Only tabulated damping is numeric-only.
    """

    kind: str
    m: object = None
    a0: object = None
    times: tuple = None
    values: tuple = None

    def __post_init__(self):
        if self.kind not in ("none", "power", "constant", "tabulated"):
            raise ValueError(
                f"The damping kind {self.kind} is not recognized. Please choose "
                f"'none', 'power', 'constant' or 'tabulated'."
            )
        if self.kind == "power" and self.m is None:
            raise ValueError("Power damping a = m/t needs the exponent m.")
        if self.kind == "constant" and self.a0 is None:
            raise ValueError("Constant damping needs the coefficient a0.")
        if self.kind == "tabulated":
            times = np.asarray(self.times, dtype=float)
            values = np.asarray(self.values, dtype=float)
            if times.ndim != 1 or len(times) < 2 or times.shape != values.shape:
                raise ValueError(
                    "Tabulated damping needs at least two samples and as many "
                    "values as times."
                )
            if np.any(np.diff(times) <= 0):
                raise ValueError("The times of tabulated damping must increase.")
            object.__setattr__(self, "times", tuple(times))
            object.__setattr__(self, "values", tuple(values))
        for name in ("m", "a0"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, sp.sympify(value))

    @classmethod
    def none(cls):
        return cls("none")

    @classmethod
    def power(cls, m):
        return cls("power", m=m)

    @classmethod
    def constant(cls, a0):
        return cls("constant", a0=a0)

    @classmethod
    def tabulated(cls, times, values):
        return cls("tabulated", times=tuple(times), values=tuple(values))

    @property
    def is_symbolic(self):
        return self.kind != "tabulated"


@dataclass(frozen=True)
class NonlinearitySpec:
    """
    Interaction term f(u).

    kind: "power" (f0 u^p), "exponential" (f0 exp(rate u)), "logarithmic"
    ((sigma + kappa ln|u|) u) or "generic" (opaque F with F' = f).
    Linear or vanishing interactions (f'' = 0) are rejected unless
    `allow_linear` is set, which numeric experiments need.
    """

    kind: str
    f0: object = 1
    p: object = None
    rate: object = None
    sigma: object = 0
    kappa: object = None
    allow_linear: bool = False

    def __post_init__(self):
        if self.kind not in ("power", "exponential", "logarithmic", "generic"):
            raise ValueError(
                f"The nonlinearity kind {self.kind} is not recognized. Please "
                f"choose 'power', 'exponential', 'logarithmic' or 'generic'."
            )
        for name in ("f0", "p", "rate", "sigma", "kappa"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, sp.sympify(value))
        if self.kind == "power":
            if self.p is None:
                raise ValueError("A power nonlinearity needs the exponent p.")
            if _is(self.p, -1):
                raise ValueError(
                    "The exponent p = -1 has no power antiderivative F. Please "
                    "choose another exponent."
                )
            linear = _is(self.p, 0) or _is(self.p, 1) or _is(self.f0, 0)
            if linear and not self.allow_linear:
                raise ValueError(
                    f"The power nonlinearity with p = {self.p}, f0 = {self.f0} "
                    f"has f'' = 0. Set allow_linear for linear experiments."
                )
        if self.kind == "exponential":
            if self.rate is None or _is(self.rate, 0):
                raise ValueError("An exponential nonlinearity needs a rate != 0.")
        if self.kind == "logarithmic":
            if self.kappa is None:
                raise ValueError("A logarithmic nonlinearity needs kappa.")
            if _is(self.kappa, 0) and not self.allow_linear:
                raise ValueError(
                    "The logarithmic nonlinearity with kappa = 0 is linear. Set "
                    "allow_linear for linear experiments."
                )

    @classmethod
    def power(cls, f0, p, allow_linear=False):
        return cls("power", f0=f0, p=p, allow_linear=allow_linear)

    @classmethod
    def exponential(cls, f0, rate):
        return cls("exponential", f0=f0, rate=rate)

    @classmethod
    def logarithmic(cls, sigma, kappa, allow_linear=False):
        return cls("logarithmic", sigma=sigma, kappa=kappa, allow_linear=allow_linear)

    @classmethod
    def generic(cls):
        return cls("generic")


@dataclass(frozen=True)
class ModelSpec:
    """Spatial dimension, damping law, interaction term and start time."""

    n: int
    damping: DampingSpec
    nonlinearity: NonlinearitySpec
    t0: object = 1

    def __post_init__(self):
        object.__setattr__(self, "t0", sp.sympify(self.t0))
        if self.n not in constants.SYMBOLIC_DIMENSIONS:
            raise ValueError(
                f"The spatial dimension {self.n} is not supported. Please choose "
                f"one of {constants.SYMBOLIC_DIMENSIONS}."
            )
        if self.damping.kind == "power" and self.t0.is_number and self.t0 <= 0:
            raise ValueError(
                f"Power damping a = m/t needs a start time t0 > 0, got {self.t0}."
            )

    @property
    def space(self):
        return jetcalc.jet_space(self.n)

    @property
    def damping_exponent(self):
        """m of a = m/t; 0 without damping; None for other damping laws."""
        if self.damping.kind == "none":
            return sp.Integer(0)
        if self.damping.kind == "power":
            return self.damping.m
        return None


def damping_coefficient(spec):
    """Symbolic a(t)."""
    damping = spec.damping
    if damping.kind == "none":
        return sp.Integer(0)
    if damping.kind == "power":
        return damping.m / t
    if damping.kind == "constant":
        return damping.a0
    raise SymbolicDampingError(
        "Tabulated damping has no symbolic form. Use damping_function for "
        "numeric work."
    )


def mu(spec):
    """
    Integrating factor mu with mu' = a mu.

    Returns
    -------
    sympy expression
        1 without damping, t^m for a = m/t, exp(a0 t) for constant a0
    """
    damping = spec.damping
    if damping.kind == "none":
        return sp.Integer(1)
    if damping.kind == "power":
        return t ** damping.m
    if damping.kind == "constant":
        return sp.exp(damping.a0 * t)
    raise SymbolicDampingError(
        "Tabulated damping has no symbolic integrating factor. Use mu_numeric, "
        "which integrates a(t) with the cumulative trapezoid rule."
    )


def potential(spec):
    """Antiderivative F of the interaction term, with zero constant."""
    nl = spec.nonlinearity
    if nl.kind == "power":
        return nl.f0 * u ** (nl.p + 1) / (nl.p + 1)
    if nl.kind == "exponential":
        return nl.f0 / nl.rate * sp.exp(nl.rate * u)
    if nl.kind == "logarithmic":
        return (
            nl.sigma / 2 * u ** 2
            + nl.kappa / 2 * u ** 2 * sp.log(u)
            - nl.kappa / 4 * u ** 2
        )
    return jetcalc.Potential(u)


def force(spec):
    """Interaction term f(u)."""
    nl = spec.nonlinearity
    if nl.kind == "power":
        return nl.f0 * u ** nl.p
    if nl.kind == "exponential":
        return nl.f0 * sp.exp(nl.rate * u)
    if nl.kind == "logarithmic":
        return (nl.sigma + nl.kappa * sp.log(u)) * u
    return jetcalc.Force(u)


def undamped_lagrangian(spec):
    """L0 = (u_t^2 - |grad u|^2)/2 - F(u)."""
    space = spec.space
    kinetic = space.u_t ** 2 - sp.Add(*(g ** 2 for g in space.gradient))
    return jetcalc.canonical(kinetic / 2 - potential(spec))


def lagrangian(spec):
    """L = mu L0."""
    return jetcalc.canonical(mu(spec) * undamped_lagrangian(spec))


def residual(spec):
    """E = u_tt - sum_k u_kk + a(t) u_t + f(u)."""
    space = spec.space
    laplacian = sp.Add(*(space.jet(k, k) for k in range(1, spec.n + 1)))
    return jetcalc.canonical(
        space.jet(0, 0) - laplacian + damping_coefficient(spec) * space.u_t + force(spec)
    )


def energy_density(spec):
    """(u_t^2 + |grad u|^2)/2 + F(u)."""
    space = spec.space
    gradient = sp.Add(*(g ** 2 for g in space.gradient))
    return jetcalc.canonical((space.u_t ** 2 + gradient) / 2 + potential(spec))


def special_exponent(n, m):
    """p = (n + 3 + m)/(n - 1 + m); undefined for m = 1 - n."""
    m = sp.sympify(m)
    if jetcalc.is_zero(n - 1 + m):
        raise ValueError(
            f"The special exponent has a pole at m = 1 - n = {1 - n}. Please "
            f"choose another damping exponent."
        )
    return sp.cancel((n + 3 + m) / (n - 1 + m))


def conformal_factor(n, m):
    """q = 1 - n - m."""
    return sp.expand(1 - n - sp.sympify(m))


def dilation_weight(n, m):
    """d = (1 - m - n)/2."""
    return sp.expand((1 - sp.sympify(m) - n) / sp.Integer(2))


def has_special_exponent(spec):
    """True for f = f0 u^p with p = (n+3+m)/(n-1+m) and a = m/t (or a = 0)."""
    m = spec.damping_exponent
    if spec.nonlinearity.kind != "power" or m is None:
        return False
    if jetcalc.is_zero(spec.n - 1 + m):
        return False
    return jetcalc.is_zero(spec.nonlinearity.p - special_exponent(spec.n, m))


def to_float(value, bindings=None):
    """
    Converts an exact model value to float, substituting `bindings` for
    symbolic parameters.
    """
    value = sp.sympify(value)
    if bindings:
        value = value.subs({jetcalc.parameter(k): v for k, v in bindings.items()})
    if value.free_symbols:
        raise ValueError(
            f"The value {value} still depends on "
            f"{sorted(s.name for s in value.free_symbols)}. Please bind these "
            f"parameters to numbers for numeric work."
        )
    return float(value)


def damping_function(spec, bindings=None):
    """Numeric a(t) accepting floats and numpy arrays."""
    damping = spec.damping
    if damping.kind == "none":
        return lambda time: np.zeros_like(np.asarray(time, dtype=float))
    if damping.kind == "power":
        m_value = to_float(damping.m, bindings)
        return lambda time: m_value / np.asarray(time, dtype=float)
    if damping.kind == "constant":
        a0_value = to_float(damping.a0, bindings)
        return lambda time: np.full_like(np.asarray(time, dtype=float), a0_value)
    return CubicSpline(np.asarray(damping.times), np.asarray(damping.values))


def mu_numeric(spec, times, bindings=None):
    """
    mu(t) normalized to mu(t0) = 1 on the sample `times`.

    Tabulated damping is integrated with the cumulative trapezoid rule from
    the first sample, which must be t0.
    """
    times = np.asarray(times, dtype=float)
    damping = spec.damping
    t0 = to_float(spec.t0, bindings)
    if damping.kind == "none":
        return np.ones_like(times)
    if damping.kind == "power":
        return (times / t0) ** to_float(damping.m, bindings)
    if damping.kind == "constant":
        return np.exp(to_float(damping.a0, bindings) * (times - t0))
    if not np.isclose(times[0], t0):
        logging.warning(
            f"The first sample time {times[0]} differs from t0 = {t0}; mu is "
            f"normalized at the first sample."
        )
    a = damping_function(spec)(times)
    return np.exp(cumulative_trapezoid(a, times, initial=0.0))


def force_function(spec, bindings=None):
    """
    Numeric f(u) for the solver.

    Integer exponents are evaluated exactly; non-integer exponents go through
    np.power and need positive data. The logarithmic term vanishes where |u|
    is below the logarithm floor.
    """
    nl = spec.nonlinearity
    if nl.kind == "power":
        f0_value = to_float(nl.f0, bindings)
        p_value = to_float(nl.p, bindings)
        if float(p_value).is_integer():
            exponent = int(p_value)
            return lambda field: f0_value * field ** exponent
        logging.warning(
            f"The exponent p = {p_value} is not an integer; the run requires "
            f"positive data."
        )
        return lambda field: f0_value * np.power(field, p_value)
    if nl.kind == "exponential":
        f0_value = to_float(nl.f0, bindings)
        rate_value = to_float(nl.rate, bindings)
        return lambda field: f0_value * np.exp(rate_value * field)
    if nl.kind == "logarithmic":
        sigma_value = to_float(nl.sigma, bindings)
        kappa_value = to_float(nl.kappa, bindings)

        def logarithmic(field):
            magnitude = np.abs(field)
            safe = np.where(magnitude < constants.LOG_FLOOR, 1.0, magnitude)
            value = (sigma_value + kappa_value * np.log(safe)) * field
            if kappa_value == 0:
                return value
            return np.where(magnitude < constants.LOG_FLOOR, 0.0, value)

        return logarithmic
    raise ValueError(
        "The generic nonlinearity is symbolic only. Please choose a power, "
        "exponential or logarithmic interaction for numeric runs."
    )


def potential_function(spec, bindings=None):
    """Numeric F(u) with the same zero constant as :py:func:`potential`."""
    nl = spec.nonlinearity
    if nl.kind == "power":
        f0_value = to_float(nl.f0, bindings)
        p_value = to_float(nl.p, bindings)
        return lambda field: f0_value * np.power(field, p_value + 1) / (p_value + 1)
    if nl.kind == "exponential":
        f0_value = to_float(nl.f0, bindings)
        rate_value = to_float(nl.rate, bindings)
        return lambda field: f0_value / rate_value * np.exp(rate_value * field)
    if nl.kind == "logarithmic":
        sigma_value = to_float(nl.sigma, bindings)
        kappa_value = to_float(nl.kappa, bindings)

        def logarithmic(field):
            magnitude = np.abs(field)
            safe = np.where(magnitude < constants.LOG_FLOOR, 1.0, magnitude)
            return (
                sigma_value / 2 * field ** 2
                + kappa_value / 2 * field ** 2 * np.log(safe)
                - kappa_value / 4 * field ** 2
            )

        return logarithmic
    raise ValueError("The generic nonlinearity has no numeric potential.")
