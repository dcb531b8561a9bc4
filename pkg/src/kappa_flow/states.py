"""Primitive ``(rho, u)`` and augmented ``(rho, v, w)`` states and the
algebraic maps between them.

With ``L = grad(log rho)`` (discrete), the augmented velocities are

    v = u + 2 kappa mu L,      w = 2 sqrt(kappa (1 - kappa)) mu L,

and the primitive velocity is recovered as ``u = v - sqrt(kappa/(1-kappa)) w``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import VacuumError
from .grid import Grid, dumps_fields, loads_fields
from .thermo import PressureLaw

RHO_FLOOR = 1e-8

TAG_PRIMITIVE = b"P"
TAG_AUGMENTED = b"A"


@dataclass(frozen=True)
class Params:
    """Viscosity ``mu >= 0``, mixture coefficient ``0 < kappa < 1`` and pressure law."""

    mu: float = 0.1
    kappa: float = 0.5
    law: PressureLaw = field(default_factory=PressureLaw)

    def __post_init__(self):
        if not (math.isfinite(self.mu) and self.mu >= 0):
            raise ValueError(f"mu must be nonnegative, got {self.mu}")
        if not (0.0 < self.kappa < 1.0):
            raise ValueError(f"kappa must lie strictly inside (0, 1), got {self.kappa}")

    @property
    def drift_coeff(self) -> float:
        """``sqrt(kappa (1 - kappa))``."""
        return math.sqrt(self.kappa * (1.0 - self.kappa))

    @property
    def drift_ratio(self) -> float:
        """``sqrt(kappa / (1 - kappa))``, the weight of ``w`` in ``u = v - ratio * w``."""
        return math.sqrt(self.kappa / (1.0 - self.kappa))

    def with_mu(self, mu: float) -> "Params":
        return Params(mu=mu, kappa=self.kappa, law=self.law)


def _check_density(grid: Grid, rho) -> np.ndarray:
    rho = grid.check_scalar(rho)
    if not np.all(np.isfinite(rho)):
        raise VacuumError("density is not finite")
    if not np.all(rho > RHO_FLOOR):
        raise VacuumError(f"density fell below the vacuum floor {RHO_FLOOR:g} (min {rho.min():g})")
    return rho


def _check_velocity(grid: Grid, u, name: str) -> np.ndarray:
    u = grid.check_vector(u)
    if not np.all(np.isfinite(u)):
        raise ValueError(f"{name} has non-finite entries")
    return u


@dataclass(frozen=True, eq=False)
class PrimState:
    grid: Grid
    rho: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rho", _check_density(self.grid, self.rho))
        object.__setattr__(self, "u", _check_velocity(self.grid, self.u, "u"))

    @property
    def momentum(self) -> np.ndarray:
        return self.rho * self.u


@dataclass(frozen=True, eq=False)
class AugState:
    """Augmented state; also used for reference triples ``(r, V, W)``."""

    grid: Grid
    rho: np.ndarray
    v: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rho", _check_density(self.grid, self.rho))
        object.__setattr__(self, "v", _check_velocity(self.grid, self.v, "v"))
        object.__setattr__(self, "w", _check_velocity(self.grid, self.w, "w"))

    def velocity(self, params: Params) -> np.ndarray:
        """Primitive velocity ``v - sqrt(kappa/(1-kappa)) w``."""
        return self.v - params.drift_ratio * self.w

    def restricted_to(self, coarse: Grid) -> "AugState":
        return AugState(
            coarse,
            coarse.restrict(self.rho, self.grid),
            coarse.restrict(self.v, self.grid),
            coarse.restrict(self.w, self.grid),
        )


def log_density_gradient(grid: Grid, rho: np.ndarray) -> np.ndarray:
    return grid.grad(np.log(_check_density(grid, rho)))


def to_augmented(s: PrimState, p: Params) -> AugState:
    L = log_density_gradient(s.grid, s.rho)
    v = s.u + (2.0 * p.kappa * p.mu) * L
    w = (2.0 * p.drift_coeff * p.mu) * L
    return AugState(s.grid, s.rho, v, w)


def to_primitive(s: AugState, p: Params) -> PrimState:
    return PrimState(s.grid, s.rho, s.velocity(p))


# snapshot files --------------------------------------------------------------


def dumps_state(state) -> bytes:
    if isinstance(state, PrimState):
        return dumps_fields(state.grid, [state.rho, state.u], TAG_PRIMITIVE)
    if isinstance(state, AugState):
        return dumps_fields(state.grid, [state.rho, state.v, state.w], TAG_AUGMENTED)
    raise TypeError(f"cannot serialize {type(state).__name__}")


def loads_state(data: bytes):
    grid, values, tag = loads_fields(data)
    d = grid.dim
    comps = np.moveaxis(values, -1, 0)
    if tag == TAG_PRIMITIVE and comps.shape[0] == 1 + d:
        return PrimState(grid, comps[0], comps[1:1 + d])
    if tag == TAG_AUGMENTED and comps.shape[0] == 1 + 2 * d:
        return AugState(grid, comps[0], comps[1:1 + d], comps[1 + d:])
    raise ValueError(f"unknown state tag {tag!r} with {comps.shape[0]} components")


def write_state(path, state) -> None:
    Path(path).write_bytes(dumps_state(state))


def read_state(path):
    return loads_state(Path(path).read_bytes())
