"""Fused numba kernels for the semi-discrete right-hand sides and RK4 steps.

All kernels work on packed conservative arrays:

* primitive: ``q = [rho, rho u_1, .., rho u_d]``
* augmented: ``q = [rho, rho v_1, .., rho v_d, rho w_1, .., rho w_d]``

with shape ``(nvar, n)`` in 1D and ``(nvar, n1, n2)`` in 2D. They mirror the
numpy operators in :mod:`kappa_flow.dynamics` stencil for stencil; the test
suite checks the two paths agree to roundoff.
"""
import math

import numpy as np

from ._accel import njit

_OPTS = dict(cache=True, nogil=True, fastmath=False)


@njit(**_OPTS)
def _d1(f, h):
    n = f.shape[0]
    out = np.empty(n)
    s = 0.5 / h
    # interior loop kept branch-free so it vectorizes
    for i in range(1, n - 1):
        out[i] = (f[i + 1] - f[i - 1]) * s
    out[0] = (f[1] - f[n - 1]) * s
    out[n - 1] = (f[0] - f[n - 2]) * s
    return out


@njit(**_OPTS)
def _dx2(f, h):
    n1, n2 = f.shape
    out = np.empty((n1, n2))
    s = 0.5 / h
    for i in range(n1):
        ip = i + 1 if i + 1 < n1 else 0
        im = i - 1 if i > 0 else n1 - 1
        for j in range(n2):
            out[i, j] = (f[ip, j] - f[im, j]) * s
    return out


@njit(**_OPTS)
def _dy2(f, h):
    n1, n2 = f.shape
    out = np.empty((n1, n2))
    s = 0.5 / h
    for i in range(n1):
        for j in range(1, n2 - 1):
            out[i, j] = (f[i, j + 1] - f[i, j - 1]) * s
        out[i, 0] = (f[i, 1] - f[i, n2 - 1]) * s
        out[i, n2 - 1] = (f[i, 0] - f[i, n2 - 2]) * s
    return out


# 1D ----------------------------------------------------------------------------


@njit(**_OPTS)
def rhs_prim_1d(q, dx, dy, mu, kappa, a, gamma):
    rho = q[0]
    m = q[1]
    u = m / rho
    p = a * rho**gamma
    ux = _d1(u, dx)
    out = np.empty_like(q)
    out[0] = -_d1(m, dx)
    out[1] = _d1(-m * u - p + 2.0 * mu * rho * ux, dx)
    return out


@njit(**_OPTS)
def rhs_aug_1d(q, dx, dy, mu, kappa, a, gamma):
    c = math.sqrt(kappa * (1.0 - kappa))
    rho = q[0]
    v = q[1] / rho
    w = q[2] / rho
    p = a * rho**gamma
    U = v - 2.0 * kappa * mu * _d1(np.log(rho), dx)
    vx = _d1(v, dx)
    wx = _d1(w, dx)
    out = np.empty_like(q)
    out[0] = -_d1(rho * U, dx)
    out[1] = _d1(-q[1] * U - p + 2.0 * mu * rho * ((1.0 - kappa) * vx - c * wx), dx)
    out[2] = _d1(-q[2] * U + 2.0 * mu * rho * (kappa * wx - c * vx), dx)
    return out


# 2D ----------------------------------------------------------------------------


@njit(**_OPTS)
def _jac2(u0, u1, dx, dy):
    n1, n2 = u0.shape
    J = np.empty((2, 2, n1, n2))
    J[0, 0] = _dx2(u0, dx)
    J[0, 1] = _dy2(u0, dy)
    J[1, 0] = _dx2(u1, dx)
    J[1, 1] = _dy2(u1, dy)
    return J


@njit(**_OPTS)
def rhs_prim_2d(q, dx, dy, mu, kappa, a, gamma):
    rho = q[0]
    u0 = q[1] / rho
    u1 = q[2] / rho
    p = a * rho**gamma
    J = _jac2(u0, u1, dx, dy)
    shear = mu * rho * (J[0, 1] + J[1, 0])
    out = np.empty_like(q)
    out[0] = -(_dx2(q[1], dx) + _dy2(q[2], dy))
    out[1] = _dx2(-q[1] * u0 - p + 2.0 * mu * rho * J[0, 0], dx) + _dy2(-q[1] * u1 + shear, dy)
    out[2] = _dx2(-q[2] * u0 + shear, dx) + _dy2(-q[2] * u1 - p + 2.0 * mu * rho * J[1, 1], dy)
    return out


@njit(**_OPTS)
def rhs_aug_2d(q, dx, dy, mu, kappa, a, gamma):
    c = math.sqrt(kappa * (1.0 - kappa))
    rho = q[0]
    v0 = q[1] / rho
    v1 = q[2] / rho
    w0 = q[3] / rho
    w1 = q[4] / rho
    p = a * rho**gamma
    lr = np.log(rho)
    U0 = v0 - 2.0 * kappa * mu * _dx2(lr, dx)
    U1 = v1 - 2.0 * kappa * mu * _dy2(lr, dy)
    J = _jac2(v0, v1, dx, dy)
    K = _jac2(w0, w1, dx, dy)
    out = np.empty_like(q)
    out[0] = -(_dx2(rho * U0, dx) + _dy2(rho * U1, dy))
    s = 2.0 * mu * rho
    h = 0.5 * (1.0 - 2.0 * kappa)
    for i in range(2):
        Tv0 = -q[1 + i] * U0 + s * (0.5 * J[i, 0] + h * J[0, i] - c * K[i, 0])
        Tv1 = -q[1 + i] * U1 + s * (0.5 * J[i, 1] + h * J[1, i] - c * K[i, 1])
        if i == 0:
            Tv0 = Tv0 - p
        else:
            Tv1 = Tv1 - p
        out[1 + i] = _dx2(Tv0, dx) + _dy2(Tv1, dy)
        Tw0 = -q[3 + i] * U0 + s * (kappa * K[i, 0] - c * J[0, i])
        Tw1 = -q[3 + i] * U1 + s * (kappa * K[i, 1] - c * J[1, i])
        out[3 + i] = _dx2(Tw0, dx) + _dy2(Tw1, dy)
    return out


# RK4 steps (one per kernel: numba cannot branch between array ranks) ----------


@njit(**_OPTS)
def rk4_prim_1d(q, dt, dx, dy, mu, kappa, a, gamma):
    k1 = rhs_prim_1d(q, dx, dy, mu, kappa, a, gamma)
    k2 = rhs_prim_1d(q + 0.5 * dt * k1, dx, dy, mu, kappa, a, gamma)
    k3 = rhs_prim_1d(q + 0.5 * dt * k2, dx, dy, mu, kappa, a, gamma)
    k4 = rhs_prim_1d(q + dt * k3, dx, dy, mu, kappa, a, gamma)
    return q + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@njit(**_OPTS)
def rk4_aug_1d(q, dt, dx, dy, mu, kappa, a, gamma):
    k1 = rhs_aug_1d(q, dx, dy, mu, kappa, a, gamma)
    k2 = rhs_aug_1d(q + 0.5 * dt * k1, dx, dy, mu, kappa, a, gamma)
    k3 = rhs_aug_1d(q + 0.5 * dt * k2, dx, dy, mu, kappa, a, gamma)
    k4 = rhs_aug_1d(q + dt * k3, dx, dy, mu, kappa, a, gamma)
    return q + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@njit(**_OPTS)
def rk4_prim_2d(q, dt, dx, dy, mu, kappa, a, gamma):
    k1 = rhs_prim_2d(q, dx, dy, mu, kappa, a, gamma)
    k2 = rhs_prim_2d(q + 0.5 * dt * k1, dx, dy, mu, kappa, a, gamma)
    k3 = rhs_prim_2d(q + 0.5 * dt * k2, dx, dy, mu, kappa, a, gamma)
    k4 = rhs_prim_2d(q + dt * k3, dx, dy, mu, kappa, a, gamma)
    return q + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


@njit(**_OPTS)
def rk4_aug_2d(q, dt, dx, dy, mu, kappa, a, gamma):
    k1 = rhs_aug_2d(q, dx, dy, mu, kappa, a, gamma)
    k2 = rhs_aug_2d(q + 0.5 * dt * k1, dx, dy, mu, kappa, a, gamma)
    k3 = rhs_aug_2d(q + 0.5 * dt * k2, dx, dy, mu, kappa, a, gamma)
    k4 = rhs_aug_2d(q + dt * k3, dx, dy, mu, kappa, a, gamma)
    return q + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


RHS = {
    ("primitive", 1): rhs_prim_1d,
    ("augmented", 1): rhs_aug_1d,
    ("primitive", 2): rhs_prim_2d,
    ("augmented", 2): rhs_aug_2d,
}

RK4 = {
    ("primitive", 1): rk4_prim_1d,
    ("augmented", 1): rk4_aug_1d,
    ("primitive", 2): rk4_prim_2d,
    ("augmented", 2): rk4_aug_2d,
}
