"""Uniform periodic grids and centered second-order difference operators.

Fields are plain numpy arrays laid out as

* scalar: ``grid.shape``
* vector: ``(dim,) + grid.shape``
* tensor: ``(dim, dim) + grid.shape`` with ``T[i, j]`` the (row, column) entry

Grid points sit at ``x_k = k * dx`` for ``k = 0 .. n-1`` on every axis, so
that a grid refined by an integer factor contains the coarse points exactly
(restriction is plain injection).
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import GridMismatchError

MAGIC = b"KNSF"
VERSION = 1
MIN_POINTS = 4


@dataclass(frozen=True)
class Grid:
    """Periodic box ``[0, L_1) x ... x [0, L_dim)`` with ``n_k`` points per axis."""

    n: tuple[int, ...]
    length: tuple[float, ...]

    def __post_init__(self):
        n = tuple(int(k) for k in np.atleast_1d(self.n))
        length = tuple(float(v) for v in np.atleast_1d(self.length))
        if len(length) == 1 and len(n) > 1:
            length = length * len(n)
        if len(n) not in (1, 2):
            raise ValueError("only 1D and 2D grids are supported")
        if len(length) != len(n):
            raise ValueError("n and length must have one entry per axis")
        if any(k < MIN_POINTS for k in n):
            raise ValueError(f"need at least {MIN_POINTS} points per axis, got {n}")
        if any(not np.isfinite(v) or v <= 0 for v in length):
            raise ValueError(f"lengths must be positive, got {length}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "length", length)

    @classmethod
    def uniform(cls, dim: int, n: int, length: float = 1.0) -> "Grid":
        return cls((n,) * dim, (length,) * dim)

    @property
    def dim(self) -> int:
        return len(self.n)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n

    @property
    def dx(self) -> tuple[float, ...]:
        return tuple(L / k for L, k in zip(self.length, self.n))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.dx))

    @property
    def volume(self) -> float:
        return float(np.prod(self.length))

    def coords(self) -> list[np.ndarray]:
        """Meshgrid of point coordinates, one array of ``self.shape`` per axis."""
        axes = [np.arange(k) * h for k, h in zip(self.n, self.dx)]
        return list(np.meshgrid(*axes, indexing="ij"))

    def refined(self, factor: int) -> "Grid":
        return Grid(tuple(k * factor for k in self.n), self.length)

    def restrict(self, f: np.ndarray, fine: "Grid") -> np.ndarray:
        """Sample a field living on ``fine`` at the points of this grid."""
        factors = []
        for kc, kf, Lc, Lf in zip(self.n, fine.n, self.length, fine.length):
            if Lc != Lf or kf % kc:
                raise GridMismatchError(f"{fine} is not an integer refinement of {self}")
            factors.append(kf // kc)
        lead = f.ndim - fine.dim
        if f.shape[lead:] != fine.shape:
            raise GridMismatchError("field does not live on the fine grid")
        index = (slice(None),) * lead + tuple(slice(None, None, m) for m in factors)
        return np.ascontiguousarray(f[index])

    # shape checks ---------------------------------------------------------

    def check_scalar(self, f: np.ndarray) -> np.ndarray:
        f = np.asarray(f, dtype=float)
        if f.shape != self.shape:
            raise GridMismatchError(f"scalar field of shape {f.shape} on grid {self.shape}")
        return f

    def check_vector(self, u: np.ndarray) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.dim,) + self.shape:
            raise GridMismatchError(f"vector field of shape {u.shape} on grid {self.shape}")
        return u

    def check_tensor(self, T: np.ndarray) -> np.ndarray:
        T = np.asarray(T, dtype=float)
        if T.shape != (self.dim, self.dim) + self.shape:
            raise GridMismatchError(f"tensor field of shape {T.shape} on grid {self.shape}")
        return T

    # operators ------------------------------------------------------------

    def _d(self, f: np.ndarray, axis: int) -> np.ndarray:
        # axis counts spatial axes; leading component axes are skipped
        ax = f.ndim - self.dim + axis
        return (np.roll(f, -1, axis=ax) - np.roll(f, 1, axis=ax)) / (2.0 * self.dx[axis])

    def grad(self, f: np.ndarray) -> np.ndarray:
        f = self.check_scalar(f)
        return np.stack([self._d(f, k) for k in range(self.dim)])

    def div(self, u: np.ndarray) -> np.ndarray:
        """Flux-form divergence: differences of face averages, which for a
        uniform periodic grid is the centered difference of each component."""
        u = self.check_vector(u)
        return sum(self._d(u[k], k) for k in range(self.dim))

    def div_tensor(self, T: np.ndarray) -> np.ndarray:
        """Row-wise divergence, ``(div T)_i = sum_j d_j T_ij``."""
        T = self.check_tensor(T)
        return np.stack(
            [sum(self._d(T[i, j], j) for j in range(self.dim)) for i in range(self.dim)]
        )

    def jacobian(self, u: np.ndarray) -> np.ndarray:
        """``J[i, j] = d_j u_i``."""
        u = self.check_vector(u)
        return np.stack(
            [np.stack([self._d(u[i], j) for j in range(self.dim)]) for i in range(self.dim)]
        )

    def sym_part(self, u: np.ndarray) -> np.ndarray:
        J = self.jacobian(u)
        return 0.5 * (J + J.swapaxes(0, 1))

    def antisym_part(self, u: np.ndarray) -> np.ndarray:
        J = self.jacobian(u)
        return 0.5 * (J - J.swapaxes(0, 1))

    def integrate(self, f: np.ndarray) -> float:
        f = self.check_scalar(f)
        return float(np.sum(f) * self.cell_volume)

    def l2_norm(self, f: np.ndarray) -> float:
        """Discrete L2 norm of a scalar or vector field."""
        f = np.asarray(f, dtype=float)
        if f.shape[f.ndim - self.dim:] != self.shape:
            raise GridMismatchError("field does not live on this grid")
        return float(np.sqrt(np.sum(f * f) * self.cell_volume))


def dot(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pointwise dot product of two vector fields."""
    return np.sum(a * b, axis=0)


def contract(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Pointwise Frobenius product ``A : B`` of two tensor fields."""
    return np.sum(A * B, axis=(0, 1))


def matvec_grad(u: np.ndarray, J: np.ndarray) -> np.ndarray:
    """``(u . grad) V`` given the Jacobian ``J`` of ``V``: ``sum_j u_j J[i, j]``."""
    return np.einsum("j...,ij...->i...", u, J)


# binary field dump ---------------------------------------------------------


def _header(grid: Grid) -> bytes:
    ints = (VERSION, grid.dim) + grid.n
    return (
        MAGIC
        + struct.pack(f"<{len(ints)}I", *ints)
        + struct.pack(f"<{grid.dim}d", *grid.length)
    )


def pack_fields(grid: Grid, fields: Sequence[np.ndarray]) -> np.ndarray:
    """Interleave scalar/vector fields into an array of shape ``grid.shape + (ncomp,)``."""
    comps = []
    for f in fields:
        f = np.asarray(f, dtype=float)
        if f.shape == grid.shape:
            comps.append(f)
        elif f.shape[1:] == grid.shape:
            comps.extend(f)
        else:
            raise GridMismatchError(f"cannot dump field of shape {f.shape} on {grid.shape}")
    return np.stack(comps, axis=-1)


def dumps_fields(grid: Grid, fields: Sequence[np.ndarray], trailer: bytes = b"") -> bytes:
    values = pack_fields(grid, fields)
    return _header(grid) + values.astype("<f8").tobytes(order="C") + trailer


def loads_fields(data: bytes) -> tuple[Grid, np.ndarray, bytes]:
    """Parse a dump. Returns the grid, values of shape ``grid.shape + (ncomp,)``
    and any trailing bytes that do not form a whole float64."""
    if data[:4] != MAGIC:
        raise ValueError("not a KNSF field dump")
    version, dim = struct.unpack_from("<2I", data, 4)
    if version != VERSION:
        raise ValueError(f"unsupported dump version {version}")
    if dim not in (1, 2):
        raise ValueError(f"bad dimension {dim}")
    n = struct.unpack_from(f"<{dim}I", data, 12)
    off = 12 + 4 * dim
    length = struct.unpack_from(f"<{dim}d", data, off)
    off += 8 * dim
    grid = Grid(n, length)
    ncells = int(np.prod(n))
    body = len(data) - off
    ncomp, rem = divmod(body, 8 * ncells)
    nvals = ncomp * ncells
    values = np.frombuffer(data, dtype="<f8", count=nvals, offset=off)
    trailer = data[off + 8 * nvals:]
    if len(trailer) >= 8:
        raise ValueError("truncated or corrupt field dump")
    return grid, values.reshape(grid.shape + (ncomp,)).astype(float), trailer


def write_fields(path, grid: Grid, fields: Sequence[np.ndarray], trailer: bytes = b"") -> None:
    Path(path).write_bytes(dumps_fields(grid, fields, trailer))


def read_fields(path) -> tuple[Grid, np.ndarray, bytes]:
    return loads_fields(Path(path).read_bytes())
