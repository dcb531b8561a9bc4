"""Kappa-entropy, relative entropy and the itemized relative entropy inequality.

All functionals are evaluated with the same centered operators the solver
uses, so budgets close up to consistency error only.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import cumulative_simpson, cumulative_trapezoid

from .errors import GridMismatchError
from .grid import Grid, contract, dot, matvec_grad
from .states import AugState, Params
from .thermo import PressureLaw

RHS_KEYS = tuple(f"rhs_{k}" for k in range(1, 9))
LHS_KEYS = tuple(f"lhs_{k}" for k in range(1, 4))


@dataclass(frozen=True)
class EntropyReport:
    time: float
    kinetic_v: float
    kinetic_w: float
    potential: float
    dissipation_A: float
    dissipation_D: float
    dissipation_p: float

    @property
    def total(self) -> float:
        return self.kinetic_v + self.kinetic_w + self.potential

    @property
    def dissipation(self) -> float:
        return self.dissipation_A + self.dissipation_D + self.dissipation_p

    def row(self) -> dict:
        return {
            "time": self.time,
            "kinetic_v": self.kinetic_v,
            "kinetic_w": self.kinetic_w,
            "potential": self.potential,
            "total": self.total,
            "dissipation_A": self.dissipation_A,
            "dissipation_D": self.dissipation_D,
            "dissipation_p": self.dissipation_p,
        }


def kappa_entropy(s: AugState, p: Params, time: float = 0.0) -> EntropyReport:
    g = s.grid
    law = p.law
    rho, v, w = s.rho, s.v, s.w
    kappa, mu = p.kappa, p.mu
    Jv = g.jacobian(v)
    Jw = g.jacobian(w)
    A = 0.5 * (Jv - Jv.swapaxes(0, 1))
    D = 0.5 * (Jv + Jv.swapaxes(0, 1))
    B = np.sqrt(1.0 - kappa) * D - np.sqrt(kappa) * Jw
    grad_rho = g.grad(rho)
    return EntropyReport(
        time=float(time),
        kinetic_v=g.integrate(0.5 * rho * dot(v, v)),
        kinetic_w=g.integrate(0.5 * rho * dot(w, w)),
        potential=g.integrate(law.potential(rho)),
        dissipation_A=2.0 * kappa * mu * g.integrate(rho * contract(A, A)),
        dissipation_D=2.0 * mu * g.integrate(rho * contract(B, B)),
        dissipation_p=2.0 * kappa * mu * g.integrate(law.dp(rho) / rho * dot(grad_rho, grad_rho)),
    )


def _same_grid(s: AugState, ref: AugState) -> Grid:
    if s.grid != ref.grid:
        raise GridMismatchError("state and reference live on different grids")
    return s.grid


def relative_entropy(s: AugState, ref: AugState, p: Params) -> float:
    """``1/2 int rho (|w - W|^2 + |v - V|^2) + int (F(rho) - F(r) - F'(r)(rho - r))``."""
    g = _same_grid(s, ref)
    dv = s.v - ref.v
    dw = s.w - ref.w
    kinetic = 0.5 * s.rho * (dot(dv, dv) + dot(dw, dw))
    return g.integrate(kinetic + p.law.rel_potential(s.rho, ref.rho))


# itemized inequality -----------------------------------------------------------------


@dataclass(frozen=True)
class RefDerivatives:
    """Time derivatives of a reference triple: ``d_t V``, ``d_t W``, ``d_t F'(r)``."""

    dV: np.ndarray
    dW: np.ndarray
    dFr: np.ndarray


@dataclass(frozen=True)
class RelEntropyReport:
    """Instantaneous relative entropy and the integrands (in time) of every
    line of the inequality. ``defect_rate`` is the rate of
    ``RHS - (dE/dt + LHS)`` excluding ``dE/dt``, i.e. ``sum(rhs) - sum(lhs)``."""

    time: float
    value: float
    lhs: dict = field(default_factory=dict)
    rhs: dict = field(default_factory=dict)

    @property
    def rate_balance(self) -> float:
        return sum(self.rhs.values()) - sum(self.lhs.values())


def relative_inequality_audit(
    s: AugState,
    ref: AugState,
    dref: Optional[RefDerivatives],
    p: Params,
    time: float = 0.0,
) -> RelEntropyReport:
    """Evaluate every term of the relative entropy inequality at one instant.

    ``ref`` is the test triple ``(r, V, W)``; ``W`` need not be a gradient.
    The velocity transporting the modulated quantities is ``v - sqrt(k/(1-k)) w``.
    """
    if dref is None:
        raise ValueError("reference time derivatives are required")
    g = _same_grid(s, ref)
    law = p.law
    mu, kappa = p.mu, p.kappa
    sig, c = p.drift_ratio, p.drift_coeff
    sk, s1k = np.sqrt(kappa), np.sqrt(1.0 - kappa)
    for name in ("dV", "dW"):
        g.check_vector(getattr(dref, name))
    g.check_scalar(dref.dFr)

    rho, v, w = s.rho, s.v, s.w
    r, V, W = ref.rho, ref.v, ref.w
    u_eff = v - sig * w
    U_eff = V - sig * W

    JV, JW = g.jacobian(V), g.jacobian(W)
    Jv, Jw = g.jacobian(v), g.jacobian(w)

    def sym(J):
        return 0.5 * (J + J.swapaxes(0, 1))

    def asym(J):
        return 0.5 * (J - J.swapaxes(0, 1))

    grad_rho, grad_r = g.grad(rho), g.grad(r)
    glog_rho, glog_r = g.grad(np.log(rho)), g.grad(np.log(r))
    grad_Fr = g.grad(law.dpotential(r))
    dp_rho, dp_r = law.dp(rho), law.dp(r)

    B_ref = s1k * sym(JV) - sk * JW
    B_diff = s1k * sym(JV - Jv) - sk * (JW - Jw)
    A_dv = asym(Jv - JV)

    rhs = {
        "rhs_1": g.integrate(
            rho * (dot(matvec_grad(u_eff, JW), W - w) + dot(matvec_grad(u_eff, JV), V - v))
        ),
        "rhs_2": g.integrate(rho * (dot(dref.dW, W - w) + dot(dref.dV, V - v))),
        "rhs_3": g.integrate(dref.dFr * (r - rho) - dot(grad_Fr, rho * u_eff - r * U_eff)),
        "rhs_4": g.integrate((law.pressure(r) - law.pressure(rho)) * g.div(U_eff)),
        "rhs_5": -kappa * g.integrate(dp_rho * dot(grad_rho, 2.0 * mu * grad_r / r - W / c)),
        "rhs_6": 2.0 * mu * g.integrate(rho * contract(B_ref, B_diff)),
        "rhs_7": 2.0 * kappa * mu * g.integrate(rho * contract(asym(JV), asym(JV - Jv)))
        + 2.0 * kappa * mu * g.integrate(rho / r * dp_r * dot(grad_r, grad_r / r - grad_rho / rho)),
        "rhs_8": 2.0 * c * mu * g.integrate(
            rho * (contract(asym(JW), A_dv) - contract(asym(Jw - JW), asym(JV)))
        ),
    }
    B_lhs = s1k * sym(Jv - JV) - sk * (Jw - JW)
    lhs = {
        "lhs_1": 2.0 * kappa * mu * g.integrate(rho * contract(A_dv, A_dv)),
        "lhs_2": 2.0 * mu * g.integrate(rho * contract(B_lhs, B_lhs)),
        "lhs_3": 2.0 * kappa * mu * g.integrate(
            rho * dot(dp_rho * glog_rho - dp_r * glog_r, glog_rho - glog_r)
        ),
    }
    return RelEntropyReport(float(time), relative_entropy(s, ref, p), lhs, rhs)


def cumulative_integral(y: Sequence[float], t: Sequence[float]) -> np.ndarray:
    """Running integral from ``t[0]``; Simpson when there are enough samples."""
    y = np.asarray(y, dtype=float)
    t = np.asarray(t, dtype=float)
    if len(t) < 3:
        return cumulative_trapezoid(y, t, initial=0.0)
    return cumulative_simpson(y, x=t, initial=0.0)


@dataclass
class RelativeAudit:
    """Time-integrated relative entropy inequality along a pair of trajectories.

    ``lines[key][k]`` is the value of that line integrated over ``[0, times[k]]``
    and ``defect = sum(rhs) - (E - E(0)) - sum(lhs)``, which the inequality
    predicts to be nonnegative up to consistency error.
    """

    times: np.ndarray
    values: np.ndarray
    lines: dict
    defect: np.ndarray

    def rows(self) -> list[dict]:
        out = []
        for k, t in enumerate(self.times):
            row = {"time": float(t), "E": float(self.values[k])}
            for key in RHS_KEYS + LHS_KEYS:
                row[key] = float(self.lines[key][k])
            row["defect"] = float(self.defect[k])
            out.append(row)
        return out


def integrate_audit(reports: Sequence[RelEntropyReport]) -> RelativeAudit:
    times = np.array([rep.time for rep in reports])
    values = np.array([rep.value for rep in reports])
    lines = {}
    for key in RHS_KEYS:
        lines[key] = cumulative_integral([rep.rhs[key] for rep in reports], times)
    for key in LHS_KEYS:
        lines[key] = cumulative_integral([rep.lhs[key] for rep in reports], times)
    rhs_total = sum(lines[key] for key in RHS_KEYS)
    lhs_total = sum(lines[key] for key in LHS_KEYS)
    defect = rhs_total - (values - values[0]) - lhs_total
    return RelativeAudit(times, values, lines, defect)


def finite_difference_derivatives(refs: Sequence[AugState], times, p: Params) -> list[RefDerivatives]:
    """Second-order (centered inside, one-sided at the ends) time derivatives
    of ``V``, ``W`` and ``F'(r)`` along sampled reference states."""
    times = np.asarray(times, dtype=float)
    V = np.stack([s.v for s in refs])
    W = np.stack([s.w for s in refs])
    Fr = np.stack([p.law.dpotential(s.rho) for s in refs])
    edge = 2 if len(times) > 2 else 1
    dV = np.gradient(V, times, axis=0, edge_order=edge)
    dW = np.gradient(W, times, axis=0, edge_order=edge)
    dF = np.gradient(Fr, times, axis=0, edge_order=edge)
    return [RefDerivatives(dV[k], dW[k], dF[k]) for k in range(len(times))]


# kappa-entropy budget ------------------------------------------------------------------


@dataclass
class EntropyBudget:
    """``budget[k] = total(t_k) - total(0) + int_0^{t_k} dissipation``; the
    continuous identity makes it zero, so it measures consistency error."""

    reports: list
    times: np.ndarray
    dissipated: np.ndarray
    budget: np.ndarray

    @property
    def scale(self) -> float:
        return max(abs(self.reports[0].total), 1e-300)


def entropy_budget(snapshots: Sequence[AugState], times, p: Params) -> EntropyBudget:
    reports = [kappa_entropy(s, p, t) for s, t in zip(snapshots, times)]
    times = np.asarray(times, dtype=float)
    dissipated = cumulative_integral([rep.dissipation for rep in reports], times)
    total = np.array([rep.total for rep in reports])
    return EntropyBudget(reports, times, dissipated, total - total[0] + dissipated)


# pointwise identity ---------------------------------------------------------------------


def identity5_terms(rho, r, g_rho, g_r, law: PressureLaw):
    """Both sides of the pressure identity used to close the Gronwall argument.

    ``g_rho`` and ``g_r`` are the values of ``grad log rho`` and ``grad log r``
    (last axis = components). The gradient of
    ``p(rho) - p(r) - p'(r)(rho - r)`` is expanded by the chain rule with
    ``grad rho = rho g_rho`` and ``grad r = r g_r``.
    Returns ``(lhs, rhs, scale)`` where ``scale`` bounds the magnitude of
    the individual terms.
    """
    rho = np.asarray(rho, dtype=float)
    r = np.asarray(r, dtype=float)
    g_rho = np.asarray(g_rho, dtype=float)
    g_r = np.asarray(g_r, dtype=float)
    if g_rho.ndim == rho.ndim:
        g_rho = g_rho[..., None]
        g_r = g_r[..., None]
    dp_rho, dp_r, d2p_r = (np.asarray(f) for f in (law.dp(rho), law.dp(r), law.d2p(r)))

    def vdot(a, b):
        return np.sum(a * b, axis=-1)

    diff = g_rho - g_r
    lhs = rho * vdot(dp_rho[..., None] * g_rho - dp_r[..., None] * g_r, diff)
    grad_bregman = (
        (rho * (dp_rho - dp_r))[..., None] * g_rho - (d2p_r * r * (rho - r))[..., None] * g_r
    )
    t1 = rho * dp_rho * vdot(diff, diff)
    t2 = vdot(grad_bregman, g_r)
    t3 = -(rho * (dp_rho - dp_r) - d2p_r * (rho - r) * r) * vdot(g_r, g_r)
    rhs = t1 + t2 + t3
    gg = vdot(g_rho, g_rho) + vdot(g_r, g_r)
    scale = rho * (np.abs(dp_rho) + np.abs(dp_r)) * gg + np.abs(d2p_r) * np.abs(rho - r) * r * gg
    return lhs, rhs, scale


def identity5_residual(rho, r, g_rho, g_r, law: PressureLaw):
    """``lhs - rhs`` of the pointwise pressure identity; zero up to roundoff."""
    lhs, rhs, _ = identity5_terms(rho, r, g_rho, g_r, law)
    out = lhs - rhs
    return float(out) if np.ndim(out) == 0 else out
