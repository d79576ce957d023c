"""
Discrete charges of symbolic densities on solver snapshots, drift and energy
reports and convergence order estimates.

Densities are lowered to numpy with :sympy:`lambdify`. u_t is the centered
estimate carried by the snapshots, u_xk the centered difference
(u[i+1] - u[i-1])/(2h). Charges are midpoint sums over the periodic cells,
summed with :py:func:`math.fsum`.
"""

import logging
import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np
import pandas as pd
import sympy as sp
from scipy.integrate import cumulative_trapezoid

from noethercheck import constants
from noethercheck import jetcalc
from noethercheck import model
from noethercheck.solver import grid_coordinates


class CompileError(ValueError):
    pass


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class CompiledDensity:
    """
    Evaluation plan of a first order density.

    `fields` names the discrete inputs the plan reads ("u", "u_t", "u_x1",
    ...), `function` takes (t, x1, ..., xn, u, u_t, u_x1, ..., u_xn).
    """

    expression: object
    n: int
    fields: tuple
    function: object
    bindings: dict


def _bind(expr, bindings):
    values = {}
    for name, value in (bindings or {}).items():
        value = sp.Rational(value) if isinstance(value, str) else sp.nsimplify(value)
        values[jetcalc.parameter(name)] = value
    return sp.sympify(expr).subs(values)


def compile_density(expr, spec, bindings=None):
    """
    Lowers a first order density to a numpy evaluator.

    Parameters
    ----------
    expr: sympy expression
        density in t, x, u and first derivatives of u
    spec: :class:`~.model.ModelSpec`
    bindings: dict or None
        parameter name -> number ("p/q" strings are read exactly)

    Returns
    -------
    :class:`CompiledDensity`
    """
    space = spec.space
    bound = _bind(expr, bindings)
    if bound.has(jetcalc.Potential, jetcalc.Force, sp.Derivative):
        raise CompileError(
            "The density contains the opaque interaction F(u). Please choose a "
            "concrete nonlinearity for numeric work."
        )
    if space.order(bound) > 1:
        raise CompileError(
            f"Only first order densities can be lowered, the density has order "
            f"{space.order(bound)}."
        )
    unbound = sorted(
        s.name for s in bound.free_symbols if not jetcalc.is_space_symbol(s)
    )
    if unbound:
        raise CompileError(
            f"The parameters {unbound} have no numeric binding. Please add them "
            f"to the bindings."
        )
    real_u = sp.Dummy("u", real=True)
    bound = bound.xreplace({space.u: real_u})
    bound = bound.replace(sp.log, lambda arg: sp.log(sp.Abs(arg)))
    arguments = (space.t,) + space.x + (real_u, space.u_t) + space.gradient
    used = {space.u: real_u in bound.free_symbols}
    used.update({s: s in bound.free_symbols for s in (space.u_t,) + space.gradient})
    fields = tuple(s.name for s, needed in used.items() if needed)
    function = sp.lambdify(arguments, bound, modules="numpy")
    return CompiledDensity(expr, spec.n, fields, function, dict(bindings or {}))


def centered_gradient(values, h):
    """Centered differences (u[i+1] - u[i-1])/(2h) along every axis."""
    return tuple(
        (np.roll(values, -1, axis) - np.roll(values, 1, axis)) / (2 * h)
        for axis in range(values.ndim)
    )


def _check_grid(snapshot, density):
    if snapshot.grid.n != density.n or snapshot.u.shape != snapshot.grid.shape:
        raise GridMismatchError(
            f"The snapshot on a grid of shape {snapshot.u.shape} in "
            f"{snapshot.grid.n} dimensions does not match a density in "
            f"{density.n} dimensions."
        )


def evaluate_density(density, snapshot):
    """Values of `density` on every cell of `snapshot`."""
    _check_grid(snapshot, density)
    grid = snapshot.grid
    gradient = centered_gradient(snapshot.u, grid.h)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = density.function(
            snapshot.t, *grid_coordinates(grid), snapshot.u, snapshot.u_t, *gradient
        )
    return np.broadcast_to(np.asarray(values, dtype=float), grid.shape)


def charge(snapshot, density):
    """Midpoint sum of the density over the cells times h^n."""
    values = evaluate_density(density, snapshot)
    return math.fsum(values.ravel()) * snapshot.grid.cell_volume


@dataclass(frozen=True)
class ChargeSeries:
    """
    Charge C(t) of one current, with the scale series of the integral of
    |I_0| used for relative drifts.
    """

    name: str
    times: np.ndarray
    values: np.ndarray
    scales: np.ndarray

    def __post_init__(self):
        if len(self.times) == 0:
            raise ValueError(f"The charge series {self.name} is empty.")
        if not np.all(np.isfinite(self.values)):
            raise ValueError(f"The charge series {self.name} has non-finite entries.")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError(
                f"The times of the charge series {self.name} must increase."
            )

    def to_frame(self):
        return pd.DataFrame(
            {"t": self.times, "current": self.name, "value": self.values}
        )


def charge_series(snapshots, density, name):
    """Charges of `density` on every snapshot."""
    values, scales = [], []
    for snapshot in snapshots:
        cell_values = evaluate_density(density, snapshot)
        values.append(math.fsum(cell_values.ravel()) * snapshot.grid.cell_volume)
        scales.append(
            math.fsum(np.abs(cell_values).ravel()) * snapshot.grid.cell_volume
        )
    return ChargeSeries(
        name,
        np.array([s.t for s in snapshots]),
        np.array(values),
        np.array(scales),
    )


def charges_to_frame(series):
    """One row per (t, current, value)."""
    return pd.concat([s.to_frame() for s in series], ignore_index=True)


def drift_report(series, tolerance=constants.DRIFT_TOLERANCE):
    """
    Drift of a charge series.

    drift = max_t |C(t) - C(t0)|, scale = max(|C(t0)|, max_t int |I_0|).

    Returns
    -------
    dict
        current, max_drift, scale, relative_drift, tolerance, passed
    """
    drift = float(np.max(np.abs(series.values - series.values[0])))
    scale = float(max(abs(series.values[0]), np.max(series.scales)))
    if scale > 0:
        relative = drift / scale
    else:
        relative = 0.0 if drift == 0 else math.inf
    passed = relative <= tolerance
    log = logging.info if passed else logging.warning
    log(
        f"The charge {series.name} drifts by {drift:.3e} (relative {relative:.3e}, "
        f"tolerance {tolerance})."
    )
    return {
        "current": series.name,
        "max_drift": drift,
        "scale": scale,
        "relative_drift": relative,
        "tolerance": tolerance,
        "passed": bool(passed),
    }


def forward_gradient_energy(values, h):
    """Pointwise |grad_h u|^2/2 with forward differences."""
    return sum(
        ((np.roll(values, -1, axis) - values) / h) ** 2
        for axis in range(values.ndim)
    ) / 2


def energy_series(snapshots, spec, bindings=None):
    """
    Discrete energy sum [u_t^2/2 + |grad_h u|^2/2 + F(u)] h^n of every
    snapshot, with forward differences in the gradient.
    """
    potential = model.potential_function(spec, bindings)
    values, scales = [], []
    for snapshot in snapshots:
        cell_values = (
            snapshot.u_t ** 2 / 2
            + forward_gradient_energy(snapshot.u, snapshot.grid.h)
            + potential(snapshot.u)
        )
        values.append(math.fsum(cell_values.ravel()) * snapshot.grid.cell_volume)
        scales.append(
            math.fsum(np.abs(cell_values).ravel()) * snapshot.grid.cell_volume
        )
    return ChargeSeries(
        "energy",
        np.array([s.t for s in snapshots]),
        np.array(values),
        np.array(scales),
    )


def dissipation_series(snapshots, spec, bindings=None):
    """a(t) sum u_t^2 h^n of every snapshot."""
    damping = model.damping_function(spec, bindings)
    return np.array(
        [
            float(damping(s.t))
            * math.fsum((s.u_t ** 2).ravel())
            * s.grid.cell_volume
            for s in snapshots
        ]
    )


def energy_decay_check(
    snapshots,
    spec,
    dt,
    bindings=None,
    tolerance_factor=constants.ENERGY_TOLERANCE_FACTOR,
):
    """
    Checks that the discrete energy does not increase and that it follows
    dE/dt = -a(t) int u_t^2 dx.

    Parameters
    ----------
    snapshots: list of :class:`~.solver.Snapshot`
    spec: :class:`~.model.ModelSpec`
    dt: float
        time step of the run
    bindings: dict or None
    tolerance_factor: float
        an increase between consecutive snapshots is tolerated up to
        tolerance_factor * dt^2 * |E(t0)|

    Returns
    -------
    dict
        monotone, strictly_decreasing, max_increase, tolerance,
        balance_residual, relative_balance_residual

    Raises
    ------
    ValueError
        if a(t) < 0 at a snapshot time
    """
    times = np.array([s.t for s in snapshots])
    damping = np.asarray(model.damping_function(spec, bindings)(times), dtype=float)
    if np.any(damping < 0):
        raise ValueError(
            f"The energy decays only for a(t) >= 0, the damping reaches "
            f"{damping.min()} on the run interval."
        )
    energy = energy_series(snapshots, spec, bindings)
    increments = np.diff(energy.values)
    start = abs(energy.values[0])
    tolerance = tolerance_factor * dt ** 2 * start
    max_increase = float(np.max(increments, initial=0.0))
    dissipated = cumulative_trapezoid(
        dissipation_series(snapshots, spec, bindings), times, initial=0.0
    )
    balance = energy.values - energy.values[0] + dissipated
    residual = float(np.max(np.abs(balance)))
    report = {
        "monotone": bool(max_increase <= tolerance),
        "strictly_decreasing": bool(len(increments) > 0 and np.all(increments < 0)),
        "max_increase": max_increase,
        "tolerance": tolerance,
        "balance_residual": residual,
        "relative_balance_residual": residual / start if start > 0 else 0.0,
        "initial_energy": float(energy.values[0]),
        "final_energy": float(energy.values[-1]),
    }
    logging.info(
        f"Energy from {report['initial_energy']:.6e} to "
        f"{report['final_energy']:.6e}, monotone: {report['monotone']}, balance "
        f"residual {residual:.3e}."
    )
    return report


ConvergenceEstimate = namedtuple(
    "ConvergenceEstimate", ["order", "differences", "below_floor", "monotone"]
)


def convergence_order(observables, floor=constants.OBSERVABLE_FLOOR):
    """
    Observed order from an observable at h, h/2 and h/4.

    The order is log2 of the ratio of the successive differences. Observables
    below `floor` at every resolution are excluded (order None); differences
    that do not shrink or change sign are flagged as non-monotone.

    Parameters
    ----------
    observables: sequence of three floats
        values at h, h/2 and h/4

    Returns
    -------
    ConvergenceEstimate
    """
    if len(observables) != 3:
        raise ValueError(
            f"A convergence order needs three matched runs, got {len(observables)}."
        )
    values = np.asarray(observables, dtype=float)
    differences = (float(values[0] - values[1]), float(values[1] - values[2]))
    if np.all(np.abs(values) < floor):
        logging.info("The observable is below the floor at every resolution.")
        return ConvergenceEstimate(None, differences, True, True)
    coarse, fine = differences
    if fine == 0:
        logging.warning("The observable does not change under the last refinement.")
        return ConvergenceEstimate(None, differences, abs(coarse) < floor, False)
    monotone = abs(fine) < abs(coarse) and coarse * fine > 0
    if not monotone:
        logging.warning(
            f"The differences {differences} of the observable are not monotone."
        )
    order = math.log2(abs(coarse / fine)) if coarse != 0 else None
    return ConvergenceEstimate(order, differences, False, monotone)


def contraction_factor(coarse, fine, floor=constants.OBSERVABLE_FLOOR):
    """coarse/fine of a vanishing observable; None below the floor."""
    if abs(fine) < floor:
        return None
    return abs(coarse) / abs(fine)


def restrict(values, factor=2):
    """Values of a refined grid at the points of the coarse grid."""
    return values[(slice(None, None, factor),) * values.ndim]


def max_norm_gap(coarse, fine):
    """Max-norm difference of two snapshots at the coarse grid points."""
    factor = fine.grid.points[0] // coarse.grid.points[0]
    if restrict(fine.u, factor).shape != coarse.u.shape:
        raise GridMismatchError(
            f"The grids {coarse.grid.points} and {fine.grid.points} are not "
            f"nested."
        )
    return float(np.max(np.abs(restrict(fine.u, factor) - coarse.u)))
