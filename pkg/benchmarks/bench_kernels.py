#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Two workloads mirror the simulator's hot loop:
  solve   one Hermitian solve per call at the per-AP/per-UE system sizes
  bisect  a full power bisection (~45 shifted-power evaluations per call)

Run:  python3 benchmarks/bench_kernels.py
"""

import time

import numpy as np

from fdcfsim.kernels import _pykernels

try:
    from fdcfsim.kernels import _ckernels
except ImportError:
    _ckernels = None

from fdcfsim.numerics import RngStream, bisect_power_multiplier, complex_gaussian


def make_system(n, m, seed):
    rng = RngStream(seed, 0)
    g = complex_gaussian(rng, (n, n), 1.0)
    a = g @ g.conj().T + 0.1 * np.eye(n)
    b = complex_gaussian(rng, (n, m), 1.0)
    return a, b


def time_solves(backend, n, m, reps):
    a, b = make_system(n, m, n)
    backend.cholesky_solve(a, b)  # warmup
    t0 = time.perf_counter()
    for _ in range(reps):
        backend.cholesky_solve(a, b)
    return (time.perf_counter() - t0) / reps


def time_bisect(backend, n, m, reps):
    a, b = make_system(n, m, n + 100)
    budget = 0.5 * backend.shifted_power(a, b, 1.0)

    def run_once():
        return bisect_power_multiplier(lambda s: backend.shifted_power(a, b, s), budget, tol=1e-6)

    run_once()
    t0 = time.perf_counter()
    for _ in range(reps):
        run_once()
    return (time.perf_counter() - t0) / reps


def main():
    backends = [("python", _pykernels)]
    if _ckernels is not None:
        backends.append(("cython", _ckernels))
    else:
        print("compiled kernels unavailable; benchmarking the fallback only")

    print(f"{'workload':<10} {'size':<10}", *(f"{name:>12}" for name, _ in backends),
          "speedup" if len(backends) == 2 else "")
    for n, m in ((2, 2), (4, 4), (4, 16), (8, 16), (32, 32)):
        times = [time_solves(be, n, m, 2000) for _, be in backends]
        row = [f"{'solve':<10}", f"{n}x{n},{m}rhs".ljust(10)]
        row += [f"{t * 1e6:10.1f}us" for t in times]
        if len(times) == 2:
            row.append(f"{times[0] / times[1]:6.1f}x")
        print(" ".join(row))
    for n, m in ((2, 2), (4, 16)):
        times = [time_bisect(be, n, m, 100) for _, be in backends]
        row = [f"{'bisect':<10}", f"{n}x{n},{m}rhs".ljust(10)]
        row += [f"{t * 1e6:10.1f}us" for t in times]
        if len(times) == 2:
            row.append(f"{times[0] / times[1]:6.1f}x")
        print(" ".join(row))


if __name__ == "__main__":
    main()
