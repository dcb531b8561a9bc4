"""Manufactured traveling-wave solutions and their symbolic forcing (1D).

    rho*(x, t) = exp(alpha sin(k (x - t))),   u*(x, t) = beta cos(k (x - t))

The forcing is obtained by substituting the exact fields into the continuous
equations with sympy, independently of the discrete operators.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
import sympy as sp

from .grid import Grid
from .states import AugState, Params, PrimState


@lru_cache(maxsize=None)
def _symbolic(formulation: str):
    x, t, alpha, beta, k, mu, kappa, a, gamma = sp.symbols("x t alpha beta k mu kappa a gamma", real=True)
    rho = sp.exp(alpha * sp.sin(k * (x - t)))
    u = beta * sp.cos(k * (x - t))
    p = a * rho**gamma
    dx, dt = (lambda f: sp.diff(f, x)), (lambda f: sp.diff(f, t))
    lrx = dx(sp.log(rho))
    c = sp.sqrt(kappa * (1 - kappa))
    v = u + 2 * kappa * mu * lrx
    w = 2 * c * mu * lrx
    if formulation == "primitive":
        fields = (rho, u)
        sources = (
            dt(rho) + dx(rho * u),
            dt(rho * u) + dx(rho * u * u) + dx(p) - 2 * mu * dx(rho * dx(u)),
        )
    else:
        U = v - 2 * kappa * mu * lrx
        fields = (rho, v, w)
        sources = (
            dt(rho) + dx(rho * U),
            dt(rho * v) + dx(rho * v * U) + dx(p)
            - 2 * mu * (1 - kappa) * dx(rho * dx(v)) + 2 * mu * c * dx(rho * dx(w)),
            dt(rho * w) + dx(rho * w * U)
            - 2 * mu * kappa * dx(rho * dx(w)) + 2 * mu * c * dx(rho * dx(v)),
        )
    args = (x, t, alpha, beta, k, mu, kappa, a, gamma)
    f_fields = [sp.lambdify(args, sp.simplify(f), "numpy") for f in fields]
    f_sources = [sp.lambdify(args, s, "numpy") for s in sources]
    return f_fields, f_sources


def _broadcast(val, x):
    return np.broadcast_to(np.asarray(val, dtype=float), x.shape).copy()


class Manufactured:
    """Exact fields and packed forcing for one grid / parameter set."""

    def __init__(self, grid: Grid, p: Params, formulation: str, alpha: float, beta: float):
        if grid.dim != 1:
            raise ValueError("manufactured solutions are one-dimensional")
        self.grid, self.params, self.formulation = grid, p, formulation
        self.x = grid.coords()[0]
        self._consts = (alpha, beta, 2.0 * np.pi / grid.length[0], p.mu, p.kappa, p.law.a, p.law.gamma)
        self._fields, self._sources = _symbolic(formulation)

    def exact_fields(self, t: float) -> list[np.ndarray]:
        return [_broadcast(f(self.x, t, *self._consts), self.x) for f in self._fields]

    def exact_state(self, t: float):
        f = self.exact_fields(t)
        if self.formulation == "primitive":
            return PrimState(self.grid, f[0], f[1][None])
        return AugState(self.grid, f[0], f[1][None], f[2][None])

    def forcing(self, t: float) -> np.ndarray:
        return np.stack([_broadcast(s(self.x, t, *self._consts), self.x) for s in self._sources])
