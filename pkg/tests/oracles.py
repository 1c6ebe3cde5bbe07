"""Independent oracles shared by the tests.

These deliberately avoid the library's estimator code paths: densities come
from integer run-length arithmetic at run boundaries, counting comes from
direct per-block string comparison.
"""
from fractions import Fraction

import numpy as np


def boundary_ratios(runs, horizon, want_agree=True):
    """count(kind, n)/n at every run boundary n <= horizon, by pure integer
    sums over the run-length schedule."""
    ratios = []
    total = 0
    agree_total = 0
    for length, agree in runs:
        length = min(length, horizon - total)
        if length <= 0:
            break
        total += length
        if agree:
            agree_total += length
        count = agree_total if want_agree else total - agree_total
        ratios.append((total, Fraction(count, total)))
    return ratios


def boundary_extrema(runs, horizon, burn_in, want_agree=True):
    """(max, min) of count/n over run boundaries at or beyond the burn-in."""
    ratios = [r for n, r in boundary_ratios(runs, horizon, want_agree) if n >= burn_in]
    return max(ratios), min(ratios)


def count_eta_ball_direct(a0: str, m: int, eta: float) -> int:
    """Direct per-block enumeration with string slices; quadratic and slow,
    usable up to n ~ 14."""
    n = len(a0)
    nwin = n - m + 1
    count = 0
    for v in range(1 << n):
        block = format(v, f"0{n}b")
        disagree = sum(1 for j in range(nwin) if block[j : j + m] != a0[j : j + m])
        if disagree < eta * nwin:
            count += 1
    return count


def plugin_entropy_direct(track, word_len, stride):
    """Plug-in word entropy via a Counter over explicit tuples."""
    from collections import Counter

    words = Counter()
    for start in range(0, len(track) - word_len + 1, stride):
        words[tuple(int(x) for x in track[start : start + word_len])] += 1
    total = sum(words.values())
    h = 0.0
    for cnt in words.values():
        p = cnt / total
        h -= p * np.log2(p)
    return h / word_len
