"""End-to-end acceptance criteria, each reported as one PASS/FAIL line.

Every test wraps its assertions in ``criterion(...)`` so a failure is still
recorded before pytest sees it. Runtimes are asserted against the budgets.
"""
import contextlib
import time
from pathlib import Path

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, smooth_scalar, smooth_vector
from kappa_flow import cli
from kappa_flow import entropy as ent
from kappa_flow.config import load_config
from kappa_flow.dynamics import SchemeConfig, simulate
from kappa_flow.grid import Grid
from kappa_flow.harness import run_experiment
from kappa_flow.initial import make_initial
from kappa_flow.states import AugState, Params, PrimState, to_augmented, to_primitive
from kappa_flow.thermo import PressureLaw

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

pytestmark = pytest.mark.slow


@contextlib.contextmanager
def criterion(number, name, budget=None):
    start = time.perf_counter()
    ok = False
    try:
        yield
        elapsed = time.perf_counter() - start
        assert budget is None or elapsed < budget, f"took {elapsed:.1f}s, budget {budget}s"
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        line = f"criterion {number:>2} {name}: {'PASS' if ok else 'FAIL'} ({elapsed:.1f}s)"
        ACCEPTANCE_LINES.append(line)
        print(line)


def assert_checks(res):
    assert res.passed, res.failed_checks()


def test_pressure_identity():
    rng = np.random.default_rng(1)
    with criterion(1, "pressure identity", budget=1.0):
        m = 10_000
        for gamma in (1.5, 2.0, 3.0):
            law = PressureLaw(1.0, gamma)
            rho, r = rng.uniform(0.05, 10.0, m), rng.uniform(0.05, 10.0, m)
            g1, g2 = rng.normal(size=(m, 3)), rng.normal(size=(m, 3))
            lhs, rhs, scale = ent.identity5_terms(rho, r, g1, g2, law)
            assert np.max(np.abs(lhs - rhs) / scale) <= 1e-12, gamma


def test_potential_ode():
    rng = np.random.default_rng(2)
    with criterion(2, "pressure potential ODE", budget=1.0):
        rho = np.exp(rng.uniform(np.log(1e-3), np.log(1e3), 1000))
        for gamma in (1.2, 1.5, 2.0, 3.0):
            law = PressureLaw(rng.uniform(0.5, 2.0), gamma)
            lhs = rho * law.dpotential(rho) - law.potential(rho)
            p = law.pressure(rho)
            assert np.max(np.abs(lhs - p) / p) <= 1e-12, gamma


def test_transform_round_trip():
    rng = np.random.default_rng(3)
    with criterion(3, "state transform round trip"):
        for dim, n in ((1, 64), (2, 32)):
            g = Grid.uniform(dim, n)
            for kappa in (0.1, 0.5, 0.9):
                p = Params(0.2, kappa)
                s = PrimState(g, 1.0 + 0.4 * np.tanh(smooth_scalar(g, rng)), smooth_vector(g, rng, 0.5))
                back = to_primitive(to_augmented(s, p), p)
                assert np.array_equal(back.rho, s.rho)
                assert np.max(np.abs(back.u - s.u)) <= 1e-14 * np.max(np.abs(s.u))
                a = to_augmented(s, p)
                again = to_augmented(to_primitive(a, p), p)
                assert np.max(np.abs(again.v - a.v)) <= 1e-14 * np.max(np.abs(a.v))
                assert np.max(np.abs(again.w - a.w)) <= 1e-14 * np.max(np.abs(a.w))
                # degenerations are exact, not approximate
                inv = to_augmented(s, Params(0.0, kappa))
                assert np.array_equal(inv.v, s.u) and np.all(inv.w == 0.0)
                flat = to_augmented(PrimState(g, np.full(g.shape, 1.7), s.u), p)
                assert np.array_equal(flat.v, s.u) and np.all(flat.w == 0.0)
                flat_back = to_primitive(AugState(g, np.full(g.shape, 1.7), s.u, np.zeros_like(s.u)), p)
                assert np.array_equal(flat_back.u, s.u)


def test_formulation_equivalence():
    with criterion(4, "formulation equivalence", budget=60.0):
        p = Params(0.1, 0.5, PressureLaw(1.0, 2.0))
        gaps, scales = [], []
        for n in (64, 128, 256):
            g = Grid.uniform(1, n)
            init = make_initial(g, "sine", 0.1)
            prim = to_primitive(simulate(init, p, SchemeConfig("primitive", t_end=0.5, snapshot_every=0.5)).final, p)
            aug = to_primitive(simulate(init, p, SchemeConfig("augmented", t_end=0.5, snapshot_every=0.5)).final, p)
            gap = np.sqrt(g.l2_norm(aug.rho - prim.rho) ** 2 + g.l2_norm(aug.u - prim.u) ** 2)
            gaps.append(gap)
            scales.append(np.sqrt(g.l2_norm(prim.rho) ** 2 + g.l2_norm(prim.u) ** 2))
        orders = np.log2(np.array(gaps[:-1]) / np.array(gaps[1:]))
        print("gaps", gaps, "orders", orders)
        assert np.all(orders >= 1.8)
        assert gaps[-1] < 1e-4 * scales[-1]


def test_entropy_budget():
    with criterion(5, "kappa-entropy budget", budget=120.0):
        viscous = run_experiment(load_config(CONFIGS / "entropy_audit_1d.ini"))
        assert_checks(viscous)
        assert "total_decreasing" in viscous.checks
        assert min(viscous.metrics["budget_orders"]) >= 1.8
        inviscid = run_experiment(load_config(CONFIGS / "entropy_audit_inviscid.ini"))
        assert_checks(inviscid)
        assert "total_decreasing" not in inviscid.checks


def test_conservation():
    rng = np.random.default_rng(6)
    with criterion(6, "mass and momentum conservation"):
        for dim, n in ((1, 64), (2, 32)):
            g = Grid.uniform(dim, n)
            init = PrimState(g, 1.0 + 0.3 * np.tanh(smooth_scalar(g, rng)), smooth_vector(g, rng, 0.3))
            for mu in (0.0, 0.1):
                p = Params(mu, 0.5)
                for formulation in ("primitive", "augmented"):
                    traj = simulate(init, p, SchemeConfig(formulation, t_end=0.3, snapshot_every=0.05))
                    m = traj.mass()
                    assert np.max(np.abs(m - m[0])) <= 1e-12 * abs(m[0])
                    if formulation == "primitive":
                        mom = np.array([[g.integrate(c) for c in to_primitive(s, p).momentum]
                                        for s in traj.snapshots])
                        scale = max(1.0, np.max(np.abs(mom)))
                        assert np.max(np.abs(mom - mom[0])) <= 1e-11 * scale


def test_weak_strong():
    with criterion(7, "weak-strong stability", budget=180.0):
        res = run_experiment(load_config(CONFIGS / "weak_strong.ini"))
        print(res.metrics)
        assert_checks(res)
        for name in ("E0_quadratic", "gronwall_envelope", "fit_r2", "C_stable"):
            assert res.checks[name]


def test_inviscid_sweep():
    with criterion(8, "vanishing viscosity sweep", budget=300.0):
        res = run_experiment(load_config(CONFIGS / "inviscid_sweep.ini"))
        print(res.metrics)
        assert_checks(res)
        for name in ("sup_E_decreasing", "decay_rate_positive", "envelope_holds", "c0_stable"):
            assert res.checks[name]


def test_manufactured():
    with criterion(9, "manufactured convergence", budget=120.0):
        res = run_experiment(load_config(CONFIGS / "manufactured.ini"))
        assert_checks(res)
        for formulation, names in (("primitive", ("rho", "u")), ("augmented", ("rho", "v", "w"))):
            for v in names:
                fit = res.fits[f"{formulation}_{v}"]
                assert 1.8 <= fit.rate <= 2.2 and fit.r_squared >= 0.98, (formulation, v, fit)


def test_two_dimensional_smoke():
    with criterion(10, "2D audit and 1D rotation-free", budget=300.0):
        res2 = run_experiment(load_config(CONFIGS / "entropy_audit_2d.ini"))
        assert_checks(res2)
        assert res2.metrics["max_dissipation_A"] > 0.0
        res1 = run_experiment(load_config(CONFIGS / "entropy_audit_1d.ini"))
        assert res1.checks["dissipation_A_zero_1d"]
        assert all(row["dissipation_A"] == 0.0 for row in res1.tables["entropy.csv"])


def test_determinism(tmp_path):
    def run(name, kind, config, *extra):
        out = tmp_path / name
        code = cli.main([kind, "--config", str(config), "--out", str(out), *extra])
        assert code == cli.EXIT_PASS, code
        return {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.suffix == ".csv"}

    with criterion(11, "determinism"):
        audit = tmp_path / "audit.ini"
        audit.write_text(
            "[grid]\nn = 256\n[params]\nmu = 0.1\n[scheme]\nt_end = 0.2\nsnapshot_every = 0.02\n"
            "[experiment]\nkind = entropy_audit\nfamily = fourier\namplitude = 0.2\n"
        )
        a = run("a", "entropy_audit", audit, "--seed", "9")
        b = run("b", "entropy_audit", audit, "--seed", "9")
        c = run("c", "entropy_audit", audit, "--seed", "9", "--threads", "2")
        assert a and a == b == c
        s1 = run("s1", "inviscid_sweep", CONFIGS / "inviscid_sweep.ini")
        s2 = run("s2", "inviscid_sweep", CONFIGS / "inviscid_sweep.ini")
        assert s1 == s2
