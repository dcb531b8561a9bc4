"""Built-in families of smooth positive initial data."""
from __future__ import annotations

import numpy as np

from .grid import Grid
from .states import Params, PrimState

FAMILIES = ("rest", "sine", "fourier")


def _k(grid: Grid, axis: int) -> float:
    return 2.0 * np.pi / grid.length[axis]


def rest(grid: Grid) -> PrimState:
    return PrimState(grid, np.ones(grid.shape), np.zeros((grid.dim,) + grid.shape))


def sine(grid: Grid, amplitude: float) -> PrimState:
    """``rho = 1 + A sin(kx)``, ``u = A sin(kx)`` in 1D.

    In 2D the density is modulated by ``cos(ky)`` and the velocity is the
    rotational field ``A (sin(ky), sin(kx))``, so ``A(v)`` is nonzero."""
    X = grid.coords()
    kx = _k(grid, 0) * X[0]
    if grid.dim == 1:
        return PrimState(grid, 1.0 + amplitude * np.sin(kx), (amplitude * np.sin(kx))[None])
    ky = _k(grid, 1) * X[1]
    rho = 1.0 + amplitude * np.sin(kx) * np.cos(ky)
    u = amplitude * np.stack([np.sin(ky), np.sin(kx)])
    return PrimState(grid, rho, u)


def fourier(grid: Grid, amplitude: float, seed: int, modes: int = 4) -> PrimState:
    """Random smooth data with at most ``modes`` Fourier modes per field.

    Density coefficients are scaled so that ``|rho - 1| <= amplitude``.
    """
    if not 0 < amplitude < 1:
        raise ValueError("amplitude must lie in (0, 1) to keep the density positive")
    rng = np.random.default_rng(seed)
    X = grid.coords()
    phase_arg = [_k(grid, a) * X[a] for a in range(grid.dim)]

    def field():
        wav = rng.integers(-2, 3, size=(modes, grid.dim))
        wav[np.all(wav == 0, axis=1), 0] = 1
        coef = rng.uniform(-1.0, 1.0, size=modes)
        coef *= amplitude / np.sum(np.abs(coef))
        phase = rng.uniform(0.0, 2.0 * np.pi, size=modes)
        out = np.zeros(grid.shape)
        for kvec, c, ph in zip(wav, coef, phase):
            out += c * np.sin(sum(kk * pa for kk, pa in zip(kvec, phase_arg)) + ph)
        return out

    rho = 1.0 + field()
    u = np.stack([field() for _ in range(grid.dim)])
    return PrimState(grid, rho, u)


def make_initial(grid: Grid, family: str, amplitude: float = 0.1, seed: int = 0) -> PrimState:
    if family == "rest":
        return rest(grid)
    if family == "sine":
        return sine(grid, amplitude)
    if family == "fourier":
        return fourier(grid, amplitude, seed)
    raise ValueError(f"unknown initial family {family!r}; choose from {FAMILIES}")


def acoustic_mode(grid: Grid, base: PrimState, p: Params, delta: float) -> PrimState:
    """Add a damped right-running acoustic eigenmode of amplitude ``delta``.

    The mode solves the linearization about the mean density at rest,
    ``lambda^2 + 2 mu k^2 lambda + c^2 k^2 = 0``, with unit velocity
    amplitude along x. Its relative entropy decays like a single exponential.
    """
    rbar = float(np.mean(base.rho))
    c2 = p.law.dp(rbar)
    k = _k(grid, 0)
    lam = -p.mu * k * k + 1j * np.sqrt(complex(c2 * k * k - (p.mu * k * k) ** 2))
    e = np.exp(1j * k * grid.coords()[0])
    drho = delta * rbar * np.real(-1j * k / lam * e)
    du = np.zeros_like(base.u)
    du[0] = delta * np.real(e)
    return PrimState(grid, base.rho + drho, base.u + du)
