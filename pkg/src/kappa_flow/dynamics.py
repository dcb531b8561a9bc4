"""Semi-discrete right-hand sides, CFL control and RK4 time integration.

The primitive system advances ``(rho, rho u)``; the augmented system
advances ``(rho, rho v, rho w)`` with the shared transport velocity
``U = v - 2 kappa mu grad(log rho)``. Every spatial term is a discrete
divergence of a flux, so total mass (and primitive momentum) telescope.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _accel
from .errors import BlowUpError, VacuumError
from .grid import Grid
from .states import RHO_FLOOR, AugState, Params, PrimState, to_augmented, to_primitive

logger = logging.getLogger(__name__)

FORMULATIONS = ("primitive", "augmented")


@dataclass(frozen=True)
class SchemeConfig:
    formulation: str = "augmented"
    cfl_advective: float = 0.5
    cfl_viscous: float = 0.9
    t_end: float = 0.5
    snapshot_every: float = 0.05

    def __post_init__(self):
        if self.formulation not in FORMULATIONS:
            raise ValueError(f"formulation must be one of {FORMULATIONS}, got {self.formulation!r}")
        for name in ("cfl_advective", "cfl_viscous"):
            val = getattr(self, name)
            if not (0.0 < val <= 1.0):
                raise ValueError(f"{name} must lie in (0, 1], got {val}")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if not self.snapshot_every > 0:
            raise ValueError("snapshot_every must be positive")


@dataclass
class Trajectory:
    """Snapshots of a run, always stored in augmented form."""

    grid: Grid
    params: Params
    formulation: str
    times: list[float] = field(default_factory=list)
    snapshots: list[AugState] = field(default_factory=list)
    steps: int = 0

    def append(self, t: float, state: AugState) -> None:
        if self.times and not t > self.times[-1]:
            raise ValueError("snapshot times must increase strictly")
        if state.grid != self.grid:
            raise ValueError("snapshot on a different grid")
        self.times.append(float(t))
        self.snapshots.append(state)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final(self) -> AugState:
        return self.snapshots[-1]

    def primitive(self, k: int) -> PrimState:
        return to_primitive(self.snapshots[k], self.params)

    def mass(self) -> np.ndarray:
        return np.array([self.grid.integrate(s.rho) for s in self.snapshots])


# numpy right-hand sides ------------------------------------------------------------


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[:, None] * b[None, :]


def _eye_times(grid: Grid, f: np.ndarray) -> np.ndarray:
    T = np.zeros((grid.dim, grid.dim) + grid.shape)
    for k in range(grid.dim):
        T[k, k] = f
    return T


def _rhs_primitive_arrays(grid: Grid, rho, u, p: Params):
    m = rho * u
    drho = -grid.div(m)
    flux = -_outer(m, u) - _eye_times(grid, p.law.pressure(rho))
    flux += 2.0 * p.mu * rho * grid.sym_part(u)
    return drho, grid.div_tensor(flux)


def _rhs_augmented_arrays(grid: Grid, rho, v, w, p: Params):
    mu, kappa, c = p.mu, p.kappa, p.drift_coeff
    U = v - (2.0 * kappa * mu) * grid.grad(np.log(rho))
    drho = -grid.div(rho * U)
    Jv = grid.jacobian(v)
    Jw = grid.jacobian(w)
    Jv_t = Jv.swapaxes(0, 1)
    D = 0.5 * (Jv + Jv_t)
    A = 0.5 * (Jv - Jv_t)
    flux_v = -_outer(rho * v, U) - _eye_times(grid, p.law.pressure(rho))
    flux_v += 2.0 * mu * rho * ((1.0 - kappa) * D + kappa * A - c * Jw)
    flux_w = -_outer(rho * w, U) + 2.0 * mu * rho * (kappa * Jw - c * Jv_t)
    return drho, grid.div_tensor(flux_v), grid.div_tensor(flux_w)


def rhs_primitive(s: PrimState, p: Params):
    """Return ``(d rho/dt, d(rho u)/dt)``."""
    return _rhs_primitive_arrays(s.grid, s.rho, s.u, p)


def rhs_augmented(s: AugState, p: Params):
    """Return ``(d rho/dt, d(rho v)/dt, d(rho w)/dt)``."""
    return _rhs_augmented_arrays(s.grid, s.rho, s.v, s.w, p)


# packed conservative vectors ------------------------------------------------------


def pack(state, formulation: str, p: Params) -> np.ndarray:
    if formulation == "primitive":
        if isinstance(state, AugState):
            state = to_primitive(state, p)
        return np.concatenate([state.rho[None], state.rho * state.u])
    if isinstance(state, PrimState):
        state = to_augmented(state, p)
    return np.concatenate([state.rho[None], state.rho * state.v, state.rho * state.w])


def unpack(q: np.ndarray, grid: Grid, formulation: str, p: Params):
    d = grid.dim
    rho = q[0]
    if formulation == "primitive":
        return PrimState(grid, rho, q[1:1 + d] / rho)
    return AugState(grid, rho, q[1:1 + d] / rho, q[1 + d:] / rho)


def _numpy_rhs(q, grid: Grid, formulation: str, p: Params) -> np.ndarray:
    d = grid.dim
    rho = q[0]
    if formulation == "primitive":
        parts = _rhs_primitive_arrays(grid, rho, q[1:1 + d] / rho, p)
    else:
        parts = _rhs_augmented_arrays(grid, rho, q[1:1 + d] / rho, q[1 + d:] / rho, p)
    return np.concatenate([parts[0][None]] + list(parts[1:]))


def _kernel_args(grid: Grid, p: Params):
    dx = grid.dx[0]
    dy = grid.dx[1] if grid.dim > 1 else dx
    return dx, dy, p.mu, p.kappa, p.law.a, p.law.gamma


def packed_rhs(q, grid: Grid, formulation: str, p: Params, backend: Optional[str] = None):
    backend = backend or _accel.backend_name()
    if backend == "numba":
        from . import _kernels

        return _kernels.RHS[formulation, grid.dim](q, *_kernel_args(grid, p))
    return _numpy_rhs(q, grid, formulation, p)


def _rk4(f: Callable, q, t, dt):
    k1 = f(q, t)
    k2 = f(q + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = f(q + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = f(q + dt * k3, t + dt)
    return q + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _stepper(grid: Grid, formulation: str, p: Params, backend: str, forcing=None):
    """Return ``step(q, t, dt) -> q_new`` for the chosen backend."""
    if backend == "numba" and forcing is None:
        from . import _kernels

        kernel = _kernels.RK4[formulation, grid.dim]
        args = _kernel_args(grid, p)
        return lambda q, t, dt: kernel(q, dt, *args)

    def f(q, t):
        dq = packed_rhs(q, grid, formulation, p, backend)
        if forcing is not None:
            dq = dq + forcing(t)
        return dq

    return lambda q, t, dt: _rk4(f, q, t, dt)


def step_rk4(s, p: Params, dt: float, formulation: Optional[str] = None, backend=None):
    """Advance a state by one classical RK4 step of size ``dt``."""
    if formulation is None:
        formulation = "primitive" if isinstance(s, PrimState) else "augmented"
    backend = backend or _accel.backend_name()
    q = pack(s, formulation, p)
    q = _stepper(s.grid, formulation, p, backend)(q, 0.0, dt)
    _check_packed(q)
    return unpack(q, s.grid, formulation, p)


# time step control ---------------------------------------------------------------------


def _max_speeds(q, grid: Grid, formulation: str, p: Params):
    d = grid.dim
    rho = q[0]
    if formulation == "primitive":
        u = q[1:1 + d] / rho
    else:
        u = (q[1:1 + d] - p.drift_ratio * q[1 + d:]) / rho
    umax = float(np.sqrt(np.max(np.sum(u * u, axis=0))))
    cmax = float(np.sqrt(p.law.a * p.law.gamma * np.max(rho) ** (p.law.gamma - 1.0)))
    return umax, cmax


def _dt_from_speeds(grid: Grid, p: Params, cfg: SchemeConfig, umax, cmax) -> float:
    h = min(grid.dx)
    dt = cfg.cfl_advective * h / (umax + cmax)
    if p.mu > 0:
        dt = min(dt, cfg.cfl_viscous * h * h / (2.0 * grid.dim * p.mu))
    if not (math.isfinite(dt) and dt > 0):
        raise BlowUpError(f"time step is not positive and finite (dt={dt})")
    return dt


def cfl_dt(s, p: Params, cfg: SchemeConfig) -> float:
    """Explicit step bound from advection + sound speed and the parabolic term.

    For ``nu(rho) = mu rho`` the kinematic viscosity is ``mu`` itself, so the
    parabolic bound does not depend on the density.
    """
    formulation = "primitive" if isinstance(s, PrimState) else "augmented"
    q = pack(s, formulation, p)
    return _dt_from_speeds(s.grid, p, cfg, *_max_speeds(q, s.grid, formulation, p))


def _check_packed(q, t=None):
    if not np.all(np.isfinite(q)):
        raise BlowUpError(f"non-finite values at t={t}", time=t)
    rmin = float(np.min(q[0]))
    if rmin <= RHO_FLOOR:
        err = VacuumError(f"density {rmin:g} at or below the vacuum floor at t={t}")
        err.state, err.trajectory, err.time = None, None, t
        raise err


def simulate(
    initial,
    p: Params,
    cfg: SchemeConfig,
    forcing: Optional[Callable[[float], np.ndarray]] = None,
    backend: Optional[str] = None,
) -> Trajectory:
    """Integrate from ``initial`` to ``cfg.t_end`` with RK4.

    ``dt`` is recomputed from the CFL bound every step and shortened to land
    exactly on snapshot times. ``forcing(t)`` optionally returns a packed
    source added to the right-hand side (manufactured solutions).
    """
    backend = backend or _accel.backend_name()
    grid = initial.grid
    formulation = cfg.formulation
    q = pack(initial, formulation, p)
    step = _stepper(grid, formulation, p, backend, forcing)

    traj = Trajectory(grid, p, formulation)
    snap_times = list(np.arange(1, int(np.floor(cfg.t_end / cfg.snapshot_every + 1e-9)) + 1) * cfg.snapshot_every)
    if not snap_times or cfg.t_end - snap_times[-1] > 1e-12 * cfg.t_end:
        snap_times.append(cfg.t_end)
    snap_times[-1] = cfg.t_end

    def as_aug(qq):
        s = unpack(qq, grid, formulation, p)
        return s if isinstance(s, AugState) else to_augmented(s, p)

    traj.append(0.0, as_aug(q))
    t = 0.0
    for target in snap_times:
        while True:
            dt = _dt_from_speeds(grid, p, cfg, *_max_speeds(q, grid, formulation, p))
            remaining = target - t
            landed = dt >= remaining * (1.0 - 1e-12)
            if landed:
                dt = remaining
            q_new = step(q, t, dt)
            traj.steps += 1
            try:
                _check_packed(q_new, t=t + dt)
            except (BlowUpError, VacuumError) as err:
                err.state, err.trajectory = as_aug(q), traj
                raise
            q = q_new
            t = target if landed else t + dt
            if landed:
                break
        traj.append(t, as_aug(q))
    logger.debug("%s run: %d steps to t=%g", formulation, traj.steps, t)
    return traj
