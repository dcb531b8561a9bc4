"""Barotropic pressure law ``p = a rho**gamma`` and its pressure potential."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


def _positive(rho, name="rho"):
    rho = np.asarray(rho, dtype=float)
    if not np.all(rho > 0):
        raise DomainError(f"{name} must be strictly positive (vacuum reached)")
    return rho


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class PressureLaw:
    """``p(rho) = a * rho**gamma`` with ``a > 0`` and ``gamma > 1``.

    The potential is the particular solution ``F = a rho**gamma / (gamma - 1)``
    of ``rho F'(rho) - F(rho) = p(rho)``; it is nonnegative and strictly convex.
    """

    a: float = 1.0
    gamma: float = 2.0

    def __post_init__(self):
        if not (np.isfinite(self.a) and self.a > 0):
            raise ValueError(f"pressure coefficient must be positive, got {self.a}")
        if not (np.isfinite(self.gamma) and self.gamma > 1):
            raise ValueError(f"gamma must exceed 1, got {self.gamma}")

    def pressure(self, rho):
        rho = _positive(rho)
        return _out(self.a * rho**self.gamma)

    def dp(self, rho):
        rho = _positive(rho)
        return _out(self.a * self.gamma * rho ** (self.gamma - 1.0))

    def d2p(self, rho):
        rho = _positive(rho)
        return _out(self.a * self.gamma * (self.gamma - 1.0) * rho ** (self.gamma - 2.0))

    def sound_speed(self, rho):
        return _out(np.sqrt(self.dp(rho)))

    def potential(self, rho):
        rho = _positive(rho)
        return _out(self.a * rho**self.gamma / (self.gamma - 1.0))

    def dpotential(self, rho):
        rho = _positive(rho)
        return _out(self.a * self.gamma * rho ** (self.gamma - 1.0) / (self.gamma - 1.0))

    def d2potential(self, rho):
        """``F'' = p'(rho) / rho``."""
        rho = _positive(rho)
        return _out(self.a * self.gamma * rho ** (self.gamma - 2.0))

    def rel_potential(self, rho, r):
        """Bregman divergence ``F(rho) - F(r) - F'(r) (rho - r)``."""
        rho = _positive(rho)
        r = _positive(r, "r")
        val = self.potential(rho) - self.potential(r) - self.dpotential(r) * (rho - r)
        # exact zero on the diagonal; otherwise clip roundoff below zero
        val = np.where(rho == r, 0.0, np.maximum(val, 0.0))
        return _out(val)
