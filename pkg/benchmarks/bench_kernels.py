"""Benchmark the numba kernels against the pure-numpy fallbacks.

Run as a script:  python benchmarks/bench_kernels.py
Select the package-wide backend with CHAOSLAB_BACKEND=numpy|numba|auto.
"""
import time

import numpy as np

from chaoslab import _kernels


def timeit(fn, *args, repeat=3):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    print(f"numba available: {_kernels.window_mismatch_counts_numba is not None}")
    print(f"package backend in use: {'numba' if _kernels.USING_NUMBA else 'numpy'}")

    print("\nwindow_mismatch_counts (eta-ball enumeration core)")
    for n, m in ((16, 3), (18, 3), (20, 3)):
        t_np, ref = timeit(_kernels.window_mismatch_counts_numpy, n, m)
        line = f"  n={n:2d} m={m}: numpy {t_np*1e3:8.2f} ms"
        if _kernels.window_mismatch_counts_numba is not None:
            _kernels.window_mismatch_counts_numba(n, m)  # warm the compile cache
            t_nb, out = timeit(_kernels.window_mismatch_counts_numba, n, m)
            assert np.array_equal(ref, out)
            line += f"   numba {t_nb*1e3:8.2f} ms   speedup {t_np / t_nb:5.1f}x"
        print(line)

    print("\ntent_orbit (sequential map iteration)")
    for steps in (10_000, 100_000, 1_000_000):
        t_np, ref = timeit(_kernels.tent_orbit_numpy, 0.2345, 1.99, steps)
        line = f"  steps={steps:8d}: python-loop {t_np*1e3:8.2f} ms"
        if _kernels.tent_orbit_numba is not None:
            _kernels.tent_orbit_numba(0.2345, 1.99, steps)
            t_nb, out = timeit(_kernels.tent_orbit_numba, 0.2345, 1.99, steps)
            assert np.array_equal(ref, out)
            line += f"   numba {t_nb*1e3:8.2f} ms   speedup {t_np / t_nb:5.1f}x"
        print(line)


if __name__ == "__main__":
    main()
