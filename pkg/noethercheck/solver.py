"""
Explicit finite-difference integrator for

    u_tt = Δu - a(t) u_t - f(u)

on uniform periodic grids in one and two space dimensions.

The scheme is leapfrog with implicitly averaged damping,

    (u+ - 2u + u-)/dt^2 = Δ_h u - a(t) (u+ - u-)/(2 dt) - f(u),

solved in closed form for u+. Δ_h is the 3-point (1D) or 5-point (2D)
stencil.
"""

import logging
import math
from collections import namedtuple
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd

from noethercheck import constants
from noethercheck import model


class BlowUpError(RuntimeError):
    """
    Non-finite field values. `time` is the time of the last finite level,
    `snapshots` the snapshots emitted before the blow-up.
    """

    def __init__(self, message, time, snapshots=()):
        super().__init__(message)
        self.time = time
        self.snapshots = list(snapshots)


class CFLError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    """
    Uniform periodic grid with `points[k]` cells of width h on the axis
    [-lengths[k]/2, lengths[k]/2). All axes share the same h.
    """

    n: int
    lengths: tuple
    points: tuple

    def __post_init__(self):
        if self.n not in constants.SOLVER_DIMENSIONS:
            raise ValueError(
                f"The solver runs in {constants.SOLVER_DIMENSIONS} space "
                f"dimensions, got n = {self.n}."
            )
        lengths = tuple(float(v) for v in np.atleast_1d(self.lengths))
        points = tuple(int(v) for v in np.atleast_1d(self.points))
        if len(lengths) != self.n or len(points) != self.n:
            raise ValueError(
                f"A grid in {self.n} dimensions needs {self.n} lengths and point "
                f"counts, got {lengths} and {points}."
            )
        if min(points) < constants.MIN_GRID_POINTS:
            raise ValueError(
                f"Every axis needs at least {constants.MIN_GRID_POINTS} points, "
                f"got {points}."
            )
        spacings = [l / p for l, p in zip(lengths, points)]
        if not np.allclose(spacings, spacings[0], rtol=1e-12, atol=0):
            raise ValueError(
                f"The grid spacing must be equal on all axes, got {spacings}."
            )
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "points", points)

    @property
    def h(self):
        return self.lengths[0] / self.points[0]

    @property
    def shape(self):
        return self.points

    @property
    def cell_volume(self):
        return self.h ** self.n

    @property
    def volume(self):
        return math.prod(self.lengths)

    def refined(self, factor=2):
        """The same box with `factor` times as many points per axis."""
        return GridSpec(self.n, self.lengths, tuple(p * factor for p in self.points))


def grid_coordinates(grid):
    """
    Cell coordinates x_i = -L/2 + i h, one array of the grid shape per axis.
    """
    axes = [
        -length / 2 + grid.h * np.arange(points)
        for length, points in zip(grid.lengths, grid.points)
    ]
    return tuple(np.meshgrid(*axes, indexing="ij"))


VELOCITIES = ("zero", "translating", "bump", "random")


@dataclass(frozen=True)
class InitialData:
    """
    Gaussian bump u(t0) = offset + amplitude exp(-|x - center|^2 / width^2).

    velocity: "zero" (u_t = 0), "translating" (u_t = -d/dx1 of the bump, a
    wave moving towards +x1), "bump" (u_t = velocity_amplitude times the
    bump profile) or "random" (u_t = velocity_amplitude times the bump
    profile times a sum of plane waves drawn with `seed`; the draw does not
    depend on the grid, so refined runs see the same data).
    """

    amplitude: float
    center: tuple
    width: float
    velocity: str = "zero"
    velocity_amplitude: float = 0.0
    offset: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.width <= 0:
            raise ValueError(f"The bump width must be positive, got {self.width}.")
        if self.velocity not in VELOCITIES:
            raise ValueError(
                f"The initial velocity {self.velocity} is not recognized. Please "
                f"choose one of {VELOCITIES}."
            )
        object.__setattr__(
            self, "center", tuple(float(c) for c in np.atleast_1d(self.center))
        )


def _random_waves(initial, shifted):
    rng = np.random.default_rng(initial.seed)
    total = np.zeros(shifted[0].shape)
    for _ in range(constants.RANDOM_MODES):
        wave = rng.normal(size=len(shifted)) / initial.width
        phase = rng.uniform(0, 2 * np.pi)
        argument = sum(k * s for k, s in zip(wave, shifted)) + phase
        total += rng.normal() * np.cos(argument)
    return total


def initial_profile(initial, grid):
    """Initial field and velocity sampled on `grid`."""
    if len(initial.center) != grid.n:
        raise ValueError(
            f"The bump center {initial.center} does not match the grid "
            f"dimension {grid.n}."
        )
    coordinates = grid_coordinates(grid)
    shifted = [x - c for x, c in zip(coordinates, initial.center)]
    profile = np.exp(-sum(s ** 2 for s in shifted) / initial.width ** 2)
    u0 = initial.offset + initial.amplitude * profile
    if initial.velocity == "translating":
        v0 = initial.amplitude * 2 * shifted[0] / initial.width ** 2 * profile
    elif initial.velocity == "bump":
        v0 = initial.velocity_amplitude * profile
    elif initial.velocity == "random":
        v0 = initial.velocity_amplitude * profile * _random_waves(initial, shifted)
    else:
        v0 = np.zeros(grid.shape)
    return u0, v0


def cfl_max_dt(grid, safety=1.0):
    """Largest stable time step safety * h / sqrt(n)."""
    if not 0 < safety <= 1:
        raise ValueError(f"The CFL safety factor must lie in (0, 1], got {safety}.")
    return safety * grid.h / math.sqrt(grid.n)


@dataclass(frozen=True)
class RunConfig:
    """
    A numeric run: model, grid, initial data and time schedule.

    The time step is `dt` if given, otherwise `safety` times the CFL bound.
    The step is shortened so that an integer number of steps ends at t_end.
    `bindings` maps parameter names to numbers for symbolic model values.
    """

    spec: model.ModelSpec
    grid: GridSpec
    initial: InitialData
    t_end: float
    dt: float = None
    safety: float = None
    stride: int = 1
    bindings: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.spec.n != self.grid.n:
            raise ValueError(
                f"The model lives in {self.spec.n} dimensions, the grid in "
                f"{self.grid.n}."
            )
        if self.t_end <= self.t0:
            raise ValueError(
                f"The end time {self.t_end} must lie after t0 = {self.t0}."
            )
        if self.stride < 1:
            raise ValueError(f"The snapshot stride must be >= 1, got {self.stride}.")
        if self.dt is None and self.safety is None:
            raise ValueError("Please give either a time step dt or a CFL safety.")
        bound = cfl_max_dt(self.grid, self.safety if self.safety else 1.0)
        if self.dt is not None and self.dt > bound * (1 + 1e-12):
            raise CFLError(
                f"The time step {self.dt} exceeds the CFL bound {bound} for "
                f"h = {self.grid.h} in {self.grid.n} dimensions."
            )
        if self.initial.amplitude != 0:
            margin = constants.SUPPORT_WIDTHS * self.initial.width
            for c, length in zip(self.initial.center, self.grid.lengths):
                if abs(c) + margin > length / 2:
                    raise ValueError(
                        f"The initial bump at {self.initial.center} with width "
                        f"{self.initial.width} comes closer than "
                        f"{constants.SUPPORT_WIDTHS} widths to the box boundary."
                    )

    @property
    def t0(self):
        return model.to_float(self.spec.t0, self.bindings)

    def schedule(self):
        """(dt, number of steps) with steps * dt = t_end - t0."""
        span = self.t_end - self.t0
        dt = self.dt if self.dt is not None else cfl_max_dt(self.grid, self.safety)
        steps = max(1, math.ceil(span / dt - 1e-9))
        if not math.isclose(span / steps, dt):
            logging.debug(
                f"The time step is shortened from {dt} to {span / steps} to end "
                f"at t_end = {self.t_end}."
            )
        return span / steps, steps


def refine(cfg, factor=2):
    """
    `cfg` on a grid with `factor` times as many points per axis, the time step
    divided by `factor` and the stride multiplied by it, so that snapshots of
    both runs fall on the same times.
    """
    dt, _ = cfg.schedule()
    return replace(
        cfg, grid=cfg.grid.refined(factor), dt=dt / factor, stride=cfg.stride * factor
    )


Kernels = namedtuple("Kernels", ["damping", "force"])


def compile_kernels(spec, bindings=None):
    """Numeric a(t) and f(u) of `spec`."""
    return Kernels(
        model.damping_function(spec, bindings), model.force_function(spec, bindings)
    )


@dataclass(frozen=True)
class GridState:
    """Two consecutive time levels; `t` is the time of `u_curr`."""

    u_prev: np.ndarray
    u_curr: np.ndarray
    t: float
    dt: float
    grid: GridSpec


@dataclass(frozen=True)
class Snapshot:
    """Field, centered time derivative estimate and time of one level."""

    t: float
    u: np.ndarray
    u_t: np.ndarray
    step: int
    grid: GridSpec


def laplacian(values, h):
    """Periodic second order Laplacian (3-point or 5-point stencil)."""
    result = -2 * values.ndim * values
    for axis in range(values.ndim):
        result = result + np.roll(values, 1, axis) + np.roll(values, -1, axis)
    return result / h ** 2


def initial_state(cfg, kernels=None):
    """
    Start levels u(t0) and u(t0 - dt) from the Taylor expansion
    u - dt u_t + dt^2/2 u_tt with u_tt taken from the equation.
    """
    kernels = kernels or compile_kernels(cfg.spec, cfg.bindings)
    dt, _ = cfg.schedule()
    u0, v0 = initial_profile(cfg.initial, cfg.grid)
    t0 = cfg.t0
    acceleration = laplacian(u0, cfg.grid.h) - kernels.damping(t0) * v0 - kernels.force(u0)
    u_prev = u0 - dt * v0 + dt ** 2 / 2 * acceleration
    return GridState(u_prev, u0, t0, dt, cfg.grid)


def step(state, spec, dt=None, bindings=None, kernels=None):
    """
    One leapfrog step.

    Parameters
    ----------
    state: :class:`GridState`
    spec: :class:`~.model.ModelSpec`
    dt: float or None
        defaults to `state.dt`
    bindings: dict or None
        parameter values for symbolic model values
    kernels: :class:`Kernels` or None
        precompiled a(t) and f(u); compiled from `spec` if not given

    Returns
    -------
    :class:`GridState`
        the levels (u, u+) at time t + dt
    """
    dt = state.dt if dt is None else dt
    kernels = kernels or compile_kernels(spec, bindings)
    alpha = float(kernels.damping(state.t)) * dt / 2
    with np.errstate(over="ignore", invalid="ignore"):
        source = laplacian(state.u_curr, state.grid.h) - kernels.force(state.u_curr)
        u_next = (
            2 * state.u_curr - (1 - alpha) * state.u_prev + dt ** 2 * source
        ) / (1 + alpha)
    if not np.all(np.isfinite(u_next)):
        raise BlowUpError(
            f"The solution blew up between t = {state.t} and t = {state.t + dt}.",
            state.t,
        )
    return GridState(state.u_curr, u_next, state.t + dt, dt, state.grid)


def simulate(cfg):
    """
    Runs `cfg` and yields a :class:`Snapshot` every `stride` steps and at the
    end time. u_t is the centered estimate (u+ - u-)/(2 dt).
    """
    dt, steps = cfg.schedule()
    kernels = compile_kernels(cfg.spec, cfg.bindings)
    state = initial_state(cfg, kernels)
    t0 = state.t
    logging.info(
        f"Simulating n = {cfg.grid.n}, points {cfg.grid.points}, h = {cfg.grid.h}, "
        f"dt = {dt}, {steps} steps from t0 = {t0}."
    )
    for index in range(steps + 1):
        following = step(state, cfg.spec, dt, kernels=kernels)
        following = GridState(
            following.u_prev, following.u_curr, t0 + (index + 1) * dt, dt, cfg.grid
        )
        if index % cfg.stride == 0 or index == steps:
            u_t = (following.u_curr - state.u_prev) / (2 * dt)
            yield Snapshot(t0 + index * dt, state.u_curr, u_t, index, cfg.grid)
        state = following
    logging.info(f"The run ended at t = {t0 + steps * dt}.")


def run(cfg):
    """
    All snapshots of `cfg` as a list. A :class:`BlowUpError` carries the
    snapshots emitted before the blow-up.
    """
    snapshots = []
    try:
        for snapshot in simulate(cfg):
            snapshots.append(snapshot)
    except BlowUpError as error:
        error.snapshots = snapshots
        logging.error(f"{error} {len(snapshots)} snapshots were kept.")
        raise
    return snapshots


SnapshotRecord = namedtuple("SnapshotRecord", ["grid", "dt", "t0", "snapshots"])


def write_snapshots(path, snapshots, dt, t0):
    """
    Writes snapshots to a compressed .npz file with the header arrays
    dims, lengths, points, h, dt and t0.
    """
    if not snapshots:
        raise ValueError("There are no snapshots to write.")
    grid = snapshots[0].grid
    np.savez_compressed(
        path,
        dims=grid.n,
        lengths=np.asarray(grid.lengths),
        points=np.asarray(grid.points),
        h=grid.h,
        dt=dt,
        t0=t0,
        times=np.array([s.t for s in snapshots]),
        steps=np.array([s.step for s in snapshots]),
        u=np.stack([s.u for s in snapshots]),
        u_t=np.stack([s.u_t for s in snapshots]),
    )
    logging.info(f"{len(snapshots)} snapshots written to {path}.")


def read_snapshots(path):
    """Reads a file written by :py:func:`write_snapshots`."""
    with np.load(path) as data:
        grid = GridSpec(
            int(data["dims"]), tuple(data["lengths"]), tuple(data["points"])
        )
        snapshots = [
            Snapshot(float(t), u, u_t, int(index), grid)
            for t, index, u, u_t in zip(
                data["times"], data["steps"], data["u"], data["u_t"]
            )
        ]
        return SnapshotRecord(grid, float(data["dt"]), float(data["t0"]), snapshots)


def snapshots_to_frame(snapshots):
    """Long table with columns t, x1[, x2], u, u_t."""
    grid = snapshots[0].grid
    coordinates = [x.ravel() for x in grid_coordinates(grid)]
    frames = []
    for snapshot in snapshots:
        frame = pd.DataFrame(
            {f"x{k + 1}": x for k, x in enumerate(coordinates)}
        )
        frame.insert(0, "t", snapshot.t)
        frame["u"] = snapshot.u.ravel()
        frame["u_t"] = snapshot.u_t.ravel()
        frames.append(frame)
    return pd.concat(frames, ignore_index=True)


def write_snapshots_csv(path, snapshots):
    """Writes small runs as csv; larger runs should use the .npz format."""
    if not snapshots:
        raise ValueError("There are no snapshots to write.")
    rows = len(snapshots) * math.prod(snapshots[0].grid.points)
    if rows > constants.MAX_CSV_ROWS:
        raise ValueError(
            f"The run has {rows} grid values, more than the csv limit of "
            f"{constants.MAX_CSV_ROWS}. Please use write_snapshots."
        )
    snapshots_to_frame(snapshots).to_csv(path, index=False)
    logging.info(f"{len(snapshots)} snapshots written to {path}.")
