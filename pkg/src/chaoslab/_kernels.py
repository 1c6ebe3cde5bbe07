"""Hot numeric kernels with a numba fast path and a pure-numpy fallback.

The backend is chosen at import time from the environment variable
``CHAOSLAB_BACKEND``:

* unset or ``auto`` -- use numba when importable, else numpy;
* ``numba``         -- require numba (ImportError if missing);
* ``numpy``         -- force the pure-numpy fallback.

Both paths are kept importable (``*_numpy`` / ``*_numba`` suffixes) so the
benchmark and the parity tests can compare them directly.
"""
from __future__ import annotations

import os

import numpy as np

_MODE = os.environ.get("CHAOSLAB_BACKEND", "auto").lower()
if _MODE not in ("auto", "numba", "numpy"):
    raise ValueError(f"CHAOSLAB_BACKEND must be auto|numba|numpy, got {_MODE!r}")

if _MODE == "numpy":
    _HAVE_NUMBA = False
else:
    try:
        from numba import njit

        _HAVE_NUMBA = True
    except ImportError:
        if _MODE == "numba":
            raise
        _HAVE_NUMBA = False

USING_NUMBA = _HAVE_NUMBA


def window_mismatch_counts_numpy(n: int, m: int) -> np.ndarray:
    """For every difference mask d in [0, 2^n): number of the n-m+1 length-m
    windows of d containing a set bit. Vectorized over all masks."""
    masks = np.arange(1 << n, dtype=np.int64)
    window = np.int64((1 << m) - 1)
    counts = np.zeros(1 << n, dtype=np.int64)
    for j in range(n - m + 1):
        counts += ((masks >> j) & window) != 0
    return counts


if _HAVE_NUMBA:

    @njit(cache=True)
    def _window_mismatch_counts_jit(n, m):  # pragma: no cover - compiled
        total = 1 << n
        window = (1 << m) - 1
        nwin = n - m + 1
        counts = np.zeros(total, dtype=np.int64)
        for d in range(total):
            c = 0
            for j in range(nwin):
                if (d >> j) & window:
                    c += 1
            counts[d] = c
        return counts

    def window_mismatch_counts_numba(n: int, m: int) -> np.ndarray:
        return _window_mismatch_counts_jit(n, m)

else:
    window_mismatch_counts_numba = None


def tent_orbit_numpy(x0: float, a: float, n: int) -> np.ndarray:
    out = np.empty(n, dtype=np.float64)
    x = x0
    for i in range(n):
        out[i] = x
        x = a * (x if x < 1.0 - x else 1.0 - x)
    return out


def logistic_orbit_numpy(x0: float, r: float, n: int) -> np.ndarray:
    out = np.empty(n, dtype=np.float64)
    x = x0
    for i in range(n):
        out[i] = x
        x = r * x * (1.0 - x)
    return out


if _HAVE_NUMBA:

    @njit(cache=True)
    def _tent_orbit_jit(x0, a, n):  # pragma: no cover - compiled
        out = np.empty(n, dtype=np.float64)
        x = x0
        for i in range(n):
            out[i] = x
            x = a * (x if x < 1.0 - x else 1.0 - x)
        return out

    @njit(cache=True)
    def _logistic_orbit_jit(x0, r, n):  # pragma: no cover - compiled
        out = np.empty(n, dtype=np.float64)
        x = x0
        for i in range(n):
            out[i] = x
            x = r * x * (1.0 - x)
        return out

    def tent_orbit_numba(x0: float, a: float, n: int) -> np.ndarray:
        return _tent_orbit_jit(x0, a, n)

    def logistic_orbit_numba(x0: float, r: float, n: int) -> np.ndarray:
        return _logistic_orbit_jit(x0, r, n)

else:
    tent_orbit_numba = None
    logistic_orbit_numba = None


if USING_NUMBA:
    window_mismatch_counts = window_mismatch_counts_numba
    tent_orbit = tent_orbit_numba
    logistic_orbit = logistic_orbit_numba
else:
    window_mismatch_counts = window_mismatch_counts_numpy
    tent_orbit = tent_orbit_numpy
    logistic_orbit = logistic_orbit_numpy
