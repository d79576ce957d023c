"""
Removal of the damping term by the change of dependent variable

    u = mu^(-1/2) v,    mu' = a mu.

For f(u) = (sigma + kappa ln|u|) u the damped equation becomes the undamped

    v_tt - Δv + g(v) = 0,    g(v) = (sigma - sigma0 + kappa ln|v|) v,

provided a(t) satisfies

    a'/2 + a^2/4 + (kappa/2) int a dt = sigma0.

The integration constant of int a dt is 0: m ln t for a = m/t, a0 t for a
constant a0 and the integral from t0 for tabulated damping.
"""

import logging
from collections import namedtuple
from dataclasses import dataclass, replace

import numpy as np
import sympy as sp
from scipy.interpolate import CubicSpline

from noethercheck import constants
from noethercheck import jetcalc
from noethercheck import model
from noethercheck import solver
from noethercheck.jetcalc import t


class RemovalConditionError(ValueError):
    """The damping does not satisfy the removal condition; carries the residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class RemovalCondition:
    """Damping law, logarithmic coefficients kappa and sigma, and sigma0."""

    damping: model.DampingSpec
    kappa: object
    sigma0: object
    sigma: object = 0
    t0: object = 1

    def __post_init__(self):
        for name in ("kappa", "sigma0", "sigma", "t0"):
            object.__setattr__(self, name, sp.sympify(getattr(self, name)))


def interaction_coefficients(spec):
    """
    (sigma, kappa) of f(u) = (sigma + kappa ln|u|) u. Linear power
    interactions f0 u count as sigma = f0, kappa = 0.
    """
    nl = spec.nonlinearity
    if nl.kind == "logarithmic":
        return nl.sigma, nl.kappa
    if nl.kind == "power" and (jetcalc.is_zero(nl.p - 1) or jetcalc.is_zero(nl.f0)):
        return nl.f0, sp.Integer(0)
    raise RemovalConditionError(
        f"The damping removal needs a logarithmic or linear interaction, the "
        f"model has a {nl.kind} interaction."
    )


def removal_condition(spec, sigma0):
    """The :class:`RemovalCondition` of a logarithmic or linear model."""
    sigma, kappa = interaction_coefficients(spec)
    return RemovalCondition(spec.damping, kappa, sigma0, sigma, spec.t0)


def power_residual(m, kappa, sigma0, time=t):
    """m [(m - 2)/(4 t^2) + (kappa/2) ln t] - sigma0 for a = m/t."""
    m, kappa, sigma0 = (sp.sympify(v) for v in (m, kappa, sigma0))
    return m * (m - 2) / (4 * time ** 2) + kappa * m / 2 * sp.log(time) - sigma0


def _tabulated_residual(condition, times):
    damping = condition.damping
    spline = CubicSpline(np.asarray(damping.times), np.asarray(damping.values))
    t0 = float(condition.t0)
    integral = spline.antiderivative()
    times = np.asarray(times, dtype=float)
    return (
        spline.derivative()(times) / 2
        + spline(times) ** 2 / 4
        + float(condition.kappa) / 2 * (integral(times) - integral(t0))
        - float(condition.sigma0)
    )


def ode_residual(condition, time=t):
    """
    a'/2 + a^2/4 + (kappa/2) int a dt - sigma0.

    Parameters
    ----------
    condition: :class:`RemovalCondition`
    time: sympy expression or float or array
        the symbol t (default) gives the symbolic residual; tabulated damping
        needs numeric times

    Returns
    -------
    sympy expression for symbolic damping, float or array for tabulated
    """
    damping = condition.damping
    numeric_time = not isinstance(time, sp.Basic)
    if numeric_time and damping.kind == "power" and np.any(np.asarray(time) <= 0):
        raise ValueError(
            f"The removal condition of a = m/t is defined for t > 0, got {time}."
        )
    if damping.kind == "tabulated":
        if not numeric_time:
            raise model.SymbolicDampingError(
                "The removal condition of tabulated damping is numeric. Please "
                "pass sample times."
            )
        return _tabulated_residual(condition, time)
    if damping.kind == "power":
        residual = power_residual(damping.m, condition.kappa, condition.sigma0)
    elif damping.kind == "constant":
        a0 = damping.a0
        residual = a0 ** 2 / 4 + condition.kappa / 2 * a0 * t - condition.sigma0
    else:
        residual = -condition.sigma0
    residual = jetcalc.canonical(residual)
    if numeric_time:
        return np.vectorize(lambda value: float(residual.subs(t, value)))(time)
    return residual.subs(t, time)


ObstructionVerdict = namedtuple(
    "ObstructionVerdict", ["constant", "conditions", "residual"]
)


def obstruction_check(m, kappa, sigma0=0):
    """
    Decides when the residual of a = m/t is independent of t.

    The t^-2 and ln t coefficients m (m - 2) and kappa m have to vanish.

    Returns
    -------
    ObstructionVerdict
        `constant` is True or False for numeric m and kappa, None if it
        depends on the remaining symbols; `conditions` lists the solutions
        of the coefficient equations, e.g. [{m: 0}, {m: 2, kappa: 0}]
    """
    m, kappa = sp.sympify(m), sp.sympify(kappa)
    residual = jetcalc.canonical(power_residual(m, kappa, sigma0))
    equations = [sp.expand(m * (m - 2)), sp.expand(kappa * m)]
    unknowns = sorted(
        (m.free_symbols | kappa.free_symbols) - {t}, key=sp.default_sort_key
    )
    if not unknowns:
        constant = all(e == 0 for e in equations)
        conditions = [{}] if constant else []
        logging.info(
            f"The removal residual for m = {m}, kappa = {kappa} is "
            f"{'constant' if constant else 'not constant'} in t."
        )
        return ObstructionVerdict(constant, conditions, residual)
    conditions = sp.solve(equations, unknowns, dict=True)
    logging.info(f"The removal residual is constant in t for {conditions}.")
    return ObstructionVerdict(
        False if not conditions else None, conditions, residual
    )


def _symbolic_satisfied(residual, times):
    if residual == 0:
        return True
    if residual.has(sp.Float) and not (residual.free_symbols - {t}):
        values = [abs(float(residual.subs(t, value))) for value in times]
        return max(values) <= constants.TABULATED_RESIDUAL_TOLERANCE
    return False


def check_condition(condition, times):
    """
    Raises :class:`RemovalConditionError` unless the condition holds: exactly
    for symbolic damping, up to the tabulated tolerance otherwise.
    """
    if condition.damping.kind == "tabulated":
        residual = np.max(np.abs(ode_residual(condition, times)))
        tolerance = constants.TABULATED_RESIDUAL_TOLERANCE * max(
            1.0, abs(float(condition.sigma0))
        )
        if residual > tolerance:
            raise RemovalConditionError(
                f"The tabulated damping misses the removal condition by "
                f"{residual:.3e} > {tolerance:.1e}.",
                residual,
            )
        return residual
    residual = ode_residual(condition)
    if not _symbolic_satisfied(residual, times):
        if condition.damping.kind == "power":
            verdict = obstruction_check(condition.damping.m, condition.kappa)
            raise RemovalConditionError(
                f"The damping a = {condition.damping.m}/t does not satisfy the "
                f"removal condition; the residual {residual} is constant in t "
                f"only for {verdict.conditions}.",
                residual,
            )
        raise RemovalConditionError(
            f"The damping does not satisfy the removal condition, the residual "
            f"is {residual}.",
            residual,
        )
    return residual


def remove_damping(snapshots, condition, mu_values=None, bindings=None):
    """
    Transformed snapshots v = mu^(1/2) u, v_t = mu^(1/2) (u_t + a u / 2).

    Parameters
    ----------
    snapshots: list of :class:`~.solver.Snapshot`
    condition: :class:`RemovalCondition`
    mu_values: array or None
        mu at the snapshot times; by default mu normalized to mu(t0) = 1
    bindings: dict or None

    Returns
    -------
    list of :class:`~.solver.Snapshot`
    """
    times = np.array([s.t for s in snapshots])
    check_condition(condition, times)
    spec = model.ModelSpec(
        snapshots[0].grid.n,
        condition.damping,
        model.NonlinearitySpec.generic(),
        condition.t0,
    )
    if mu_values is None:
        mu_values = model.mu_numeric(spec, times, bindings)
    damping = model.damping_function(spec, bindings)
    transformed = []
    for snapshot, mu in zip(snapshots, mu_values):
        root = np.sqrt(mu)
        a = float(damping(snapshot.t))
        transformed.append(
            solver.Snapshot(
                snapshot.t,
                root * snapshot.u,
                root * (snapshot.u_t + a * snapshot.u / 2),
                snapshot.step,
                snapshot.grid,
            )
        )
    return transformed


def transformed_interaction(condition):
    """g(v) = (sigma - sigma0 + kappa ln|v|) v as a numeric function."""
    shift = float(condition.sigma - condition.sigma0)
    kappa = float(condition.kappa)

    def interaction(values):
        magnitude = np.abs(values)
        safe = np.where(magnitude < constants.LOG_FLOOR, 1.0, magnitude)
        return (shift + kappa * np.log(safe)) * values

    return interaction


def transformed_residual(snapshots, condition):
    """
    Max norm of the discrete residual of v_tt - Δv + g(v) on equally spaced
    transformed snapshots, evaluated at every interior snapshot.
    """
    if len(snapshots) < 3:
        raise ValueError("The residual needs at least three snapshots.")
    spacing = np.diff([s.t for s in snapshots])
    if not np.allclose(spacing, spacing[0]):
        raise ValueError("The residual needs equally spaced snapshots.")
    tau = spacing[0]
    interaction = transformed_interaction(condition)
    worst = 0.0
    for before, current, after in zip(snapshots, snapshots[1:], snapshots[2:]):
        v = current.u
        value = (
            (after.u - 2 * v + before.u) / tau ** 2
            - solver.laplacian(v, current.grid.h)
            + interaction(v)
        )
        worst = max(worst, float(np.max(np.abs(value))))
    return worst


def transformed_initial_data(initial, a_start):
    """
    Initial data of v for mu(t0) = 1: v = u and v_t = u_t + a(t0) u / 2,
    which is again a bump velocity profile.
    """
    if initial.velocity not in ("zero", "bump") or initial.offset != 0:
        raise ValueError(
            "The removal experiment needs initial data with zero or bump "
            "velocity and no offset."
        )
    velocity = initial.velocity_amplitude if initial.velocity == "bump" else 0.0
    return replace(
        initial,
        velocity="bump",
        velocity_amplitude=velocity + a_start * initial.amplitude / 2,
    )


def default_sigma0(spec):
    """a'/2 + a^2/4 + (kappa/2) int a dt at t0, e.g. a0^2/4 for constant a0."""
    condition = removal_condition(spec, 0)
    if spec.damping.kind == "tabulated":
        return float(ode_residual(condition, [float(spec.t0)])[0])
    return jetcalc.canonical(ode_residual(condition).subs(t, spec.t0))


def removal_experiment(cfg, sigma0=None):
    """
    Compares a transformed damped run with an undamped run from the
    transformed initial data.

    `cfg` needs a damping law that satisfies the removal condition (constant
    a0, a = 2/t, or tabulated) and a logarithmic or linear interaction;
    sigma0 defaults to :py:func:`default_sigma0`.

    Returns
    -------
    dict
        max_gap (max norm over all snapshots), transformed_residual (stride 1
        runs only, otherwise None), condition_residual
    """
    spec = cfg.spec
    if spec.damping.kind == "none":
        raise RemovalConditionError(
            "The removal experiment needs a damped model, a(t) is zero."
        )
    if sigma0 is None:
        sigma0 = default_sigma0(spec)
    condition = removal_condition(spec, sigma0)
    sigma, kappa = interaction_coefficients(spec)
    if spec.damping.kind != "tabulated":
        check_condition(condition, [float(cfg.t0)])
    damped = solver.run(cfg)
    transformed = remove_damping(damped, condition, bindings=cfg.bindings)
    a_start = float(model.damping_function(spec, cfg.bindings)(cfg.t0))
    undamped_spec = model.ModelSpec(
        spec.n,
        model.DampingSpec.none(),
        model.NonlinearitySpec.logarithmic(
            sigma - condition.sigma0, kappa, allow_linear=True
        ),
        spec.t0,
    )
    direct = solver.run(
        replace(
            cfg,
            spec=undamped_spec,
            initial=transformed_initial_data(cfg.initial, a_start),
        )
    )
    gaps = [float(np.max(np.abs(v.u - w.u))) for v, w in zip(transformed, direct)]
    if spec.damping.kind == "tabulated":
        times = [s.t for s in damped]
        condition_residual = float(np.max(np.abs(ode_residual(condition, times))))
    else:
        condition_residual = str(ode_residual(condition))
    report = {
        "damping": spec.damping.kind,
        "max_gap": max(gaps),
        "transformed_residual": (
            transformed_residual(transformed, condition) if cfg.stride == 1 else None
        ),
        "condition_residual": condition_residual,
        "sigma0": str(condition.sigma0),
    }
    logging.info(
        f"The transformed damped run differs from the undamped run by at most "
        f"{report['max_gap']:.3e}."
    )
    return report
