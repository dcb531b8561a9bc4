"""Time the numba kernels against the pure-numpy operators.

    python3 benchmarks/bench_backends.py [--repeat 20]

Reports the median wall time per RHS evaluation and per RK4 step for both
formulations in 1D and 2D, checks the two backends agree, and prints the
speedup.
"""
import argparse
import time

import numpy as np

from kappa_flow.dynamics import _stepper, pack, packed_rhs
from kappa_flow.grid import Grid
from kappa_flow.initial import make_initial
from kappa_flow.states import Params

CASES = [(1, 1024), (1, 4096), (2, 64), (2, 128)]


def median_time(fn, repeat):
    fn()  # warm-up (and JIT compile)
    samples = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - t0)
    return float(np.median(samples))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    p = Params(mu=0.1, kappa=0.5)
    print(f"{'case':<24}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}{'max diff':>12}")
    for dim, n in CASES:
        g = Grid.uniform(dim, n)
        s = make_initial(g, "fourier", 0.2, seed=1)
        for form in ("primitive", "augmented"):
            q = pack(s, form, p)
            a = packed_rhs(q, g, form, p, "numpy")
            b = packed_rhs(q, g, form, p, "numba")
            diff = float(np.max(np.abs(a - b)))
            t_np = median_time(lambda: packed_rhs(q, g, form, p, "numpy"), args.repeat)
            t_nb = median_time(lambda: packed_rhs(q, g, form, p, "numba"), args.repeat)
            label = f"rhs {form[:4]} {dim}D n={n}"
            print(f"{label:<24}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}{t_np / t_nb:>10.1f}{diff:>12.1e}")
            step_np = _stepper(g, form, p, "numpy")
            step_nb = _stepper(g, form, p, "numba")
            t_np = median_time(lambda: step_np(q, 0.0, 1e-5), args.repeat)
            t_nb = median_time(lambda: step_nb(q, 0.0, 1e-5), args.repeat)
            label = f"rk4 {form[:4]} {dim}D n={n}"
            print(f"{label:<24}{1e3 * t_np:>12.3f}{1e3 * t_nb:>12.3f}{t_np / t_nb:>10.1f}{'':>12}")


if __name__ == "__main__":
    main()
