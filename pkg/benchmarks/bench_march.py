"""Compare the compiled and pure-Python marching kernels.

Usage: python3 benchmarks/bench_march.py [--repeat N]
"""

import argparse
import time
from fractions import Fraction

import numpy as np

from tdcfie import BoundarySignal, ModeParams, SolverConfig, _march_py, kernels, solve_mode
from tdcfie.oracles import dense_volterra_solve

try:
    from tdcfie import _march
except ImportError:
    _march = None


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def with_backend(mod, fn):
    saved = kernels.march_pece, kernels.march_implicit
    kernels.march_pece, kernels.march_implicit = mod.march_pece, mod.march_implicit
    try:
        return fn()
    finally:
        kernels.march_pece, kernels.march_implicit = saved


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    sig = BoundarySignal.non_oscillatory()
    cases = {
        "solve_mode n=0 dt=97/12800": lambda: solve_mode(ModeParams(0, 1.0, 0.5), sig, SolverConfig(dt=Fraction(97, 12800), t_end=10)),
        "solve_mode n=4 dt=97/6400": lambda: solve_mode(ModeParams(4, 0.5, 0.5), sig, SolverConfig(dt=Fraction(97, 6400), t_end=10)),
        "dense oracle n=0 h=1/400": lambda: dense_volterra_solve(ModeParams(0, 0.5, 0.3), sig, Fraction(1, 400), 10),
    }
    rng = np.random.default_rng(0)
    n, M = 20_000, 264
    g = rng.standard_normal(n + 1)
    d, pred, corr = rng.standard_normal(M) * 1e-3, rng.standard_normal(6) * 1e-3, rng.standard_normal(6) * 1e-3

    class _Out:
        def __init__(self, values):
            self.values = values

    def kernel_only():
        f = np.zeros(n + 1)
        f[:M] = g[:M]
        kernels.march_pece(f, g, d, pred, corr, 0.75, M, n, 1)
        return _Out(f)

    cases["march_pece kernel, 20000 steps"] = kernel_only
    backends = [("python", _march_py)] + ([("cython", _march)] if _march is not None else [])
    print(f"{'case':32s}" + "".join(f"{name:>12s}" for name, _ in backends) + ("     speedup" if len(backends) == 2 else ""))
    for label, fn in cases.items():
        ref = None
        row = []
        for _, mod in backends:
            out = with_backend(mod, fn)
            if ref is None:
                ref = out.values
            else:
                assert np.allclose(ref, out.values, rtol=1e-12, atol=1e-12)
            row.append(best_of(lambda: with_backend(mod, fn), args.repeat))
        line = f"{label:32s}" + "".join(f"{t:11.4f}s" for t in row)
        if len(row) == 2:
            line += f"{row[0] / row[1]:11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
