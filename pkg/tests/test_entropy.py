import math
import warnings
from fractions import Fraction

import numpy as np
import pytest

from hypothesis import given, settings
from hypothesis import strategies as st

import chaoslab as c
from chaoslab import _kernels
from chaoslab.entropy import UndersampledWarning
from chaoslab.errors import GuardExceeded, ValidationError
from oracles import count_eta_ball_direct, plugin_entropy_direct


class TestBinaryEntropy:
    def test_half_is_one_bit(self):
        assert c.binary_entropy(0.5) == 1.0

    def test_endpoints_zero(self):
        assert c.binary_entropy(0.0) == 0.0
        assert c.binary_entropy(1.0) == 0.0

    def test_quarter(self):
        assert math.isclose(c.binary_entropy(0.25), 0.8112781244591328, rel_tol=1e-12)

    def test_domain(self):
        with pytest.raises(ValidationError):
            c.binary_entropy(1.5)

    @given(st.floats(0.001, 0.999))
    @settings(max_examples=50, deadline=None)
    def test_symmetric_and_bounded(self, p):
        assert math.isclose(c.binary_entropy(p), c.binary_entropy(1 - p), rel_tol=1e-9)
        assert 0 < c.binary_entropy(p) <= 1


class TestBlockCountEntropy:
    def test_family_signature(self):
        q = c.QSchedule((2, 2, 2))
        report = c.block_count_entropy((q.family_size(k), q.n(k)) for k in (1, 2, 3))
        assert list(report.rates) == [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)]

    def test_full_shift_one_bit(self):
        report = c.block_count_entropy([(2**8, 8)])
        assert report.rates[0] == Fraction(1)

    def test_singleton_zero(self):
        report = c.block_count_entropy([(1, 10)])
        assert report.rates[0] == 0

    def test_non_power_of_two_float(self):
        report = c.block_count_entropy([(3, 2)])
        assert math.isclose(report.rates[0], math.log2(3) / 2)


class TestCylinderEntropy:
    def test_constant_track(self):
        assert c.empirical_cylinder_entropy(np.zeros(5000, dtype=int), 4) == 0.0

    def test_fair_bits_near_one(self):
        bits = np.random.default_rng(7).integers(0, 2, 100000)
        h = c.empirical_cylinder_entropy(bits, 8)
        assert abs(h - 1.0) <= 0.05

    def test_matches_direct_counter(self):
        bits = np.random.default_rng(3).integers(0, 3, 4000)
        for stride in (1, 4):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                ours = c.empirical_cylinder_entropy(bits, 4, stride=stride)
            assert math.isclose(ours, plugin_entropy_direct(bits, 4, stride), rel_tol=1e-12)

    def test_undersampled_warns_not_fails(self):
        with pytest.warns(UndersampledWarning):
            c.empirical_cylinder_entropy(np.ones(200, dtype=int), 8, alphabet=2)


class TestPipka:
    def test_feasibility_frozen_grid(self):
        # frozen from direct substitution into the inequality
        expected = {0.25: (5, 0.01), 0.5: (7, 0.005), 0.81: (15, 0.005), 0.9: (36, 0.005)}
        for eta, (m, eps) in expected.items():
            params = c.solve_pipka(eta, 1.0, 2)
            assert params.feasible
            assert (params.m, params.eps) == (m, eps)
            assert params.margin > 0
            # independent substitution of both constraints
            root = math.sqrt(eta)
            lhs = 2 * c.binary_entropy(root) / params.m + params.eps * 7
            assert lhs < (1 - root) * 1.0
            assert params.eps < 1 - root

    def test_explicit_pair_feasible_at_081(self):
        root = math.sqrt(0.81)
        lhs = 2 * c.binary_entropy(root) / 15 + 0.005 * (3 * 2 + 1)
        assert lhs < (1 - root) * 1.0

    def test_tiny_eta_allows_m_one(self):
        params = c.solve_pipka(1e-4, 1.0, 2)
        assert params.feasible and params.m == 1

    def test_h_zero_infeasible(self):
        params = c.solve_pipka(0.5, 0.0, 2)
        assert not params.feasible
        assert params.m is None

    def test_smallest_m_with_largest_feasible_eps(self):
        params = c.solve_pipka(0.81, 1.0, 2, eps_grid=(0.001, 0.005, 0.02))
        # eps = 0.001 leaves slack 0.093, so m must exceed 2H(0.9)/0.093 =
        # 10.09: smallest strict m is 11, and only eps = 0.001 fits there
        assert params.m == 11
        assert params.eps == 0.001


class TestCountEtaBall:
    def test_eta_above_one_counts_everything(self):
        assert c.count_eta_ball("0" * 8, 2, 1.5) == 256

    def test_tiny_eta_counts_only_center(self):
        # strictly fewer than one window must differ: only a0 itself
        for n, m in ((8, 2), (8, 3), (10, 2)):
            assert c.count_eta_ball("0" * n, m, 1.0 / (n - m + 1)) == 1

    def test_frozen_example(self):
        assert c.count_eta_ball("0" * 8, 2, 0.5) == 31

    def test_cross_check_direct_enumeration(self):
        for n, m, eta in ((8, 2, 0.25), (8, 3, 0.5), (10, 2, 0.75), (9, 3, 0.5)):
            direct = count_eta_ball_direct("0" * n, m, eta)
            assert c.count_eta_ball("0" * n, m, eta) == direct

    def test_independent_of_center_block(self):
        for a0 in ("01010101", "11110000", "10010110"):
            assert c.count_eta_ball(a0, 2, 0.5) == c.count_eta_ball("0" * 8, 2, 0.5)
            assert count_eta_ball_direct(a0, 2, 0.5) == 31

    def test_monotone_in_eta(self):
        counts = [c.count_eta_ball("0" * 10, 3, eta) for eta in (0.1, 0.3, 0.5, 0.7, 0.9, 1.1)]
        assert counts == sorted(counts)
        assert counts[-1] == 1024

    def test_guard(self):
        with pytest.raises(GuardExceeded):
            c.count_eta_ball("0" * 21, 2, 0.5)
        with pytest.raises(ValidationError):
            c.count_eta_ball("0" * 8, 9, 0.5)

    def test_exact_rational_threshold(self):
        # eta exactly 1/W sits on the strict boundary: only the center block
        # qualifies, whether eta arrives as a Fraction or its float image
        n, m = 10, 2
        w = n - m + 1
        assert c.count_eta_ball("0" * n, m, Fraction(1, w)) == 1
        direct = count_eta_ball_direct("0" * n, m, 1 / w)
        assert c.count_eta_ball("0" * n, m, 1 / w) == direct


class TestEtaBallBound:
    def test_flag_true_with_solver_params(self):
        params = c.solve_pipka(0.81, 1.0, 2)
        n = 4096  # large n: log2(m)/n shrinks into the solver's margin
        delta = params.margin / 8
        bound = c.eta_ball_bound(n, params.m, 0.81, params.eps, 1.0, 2, delta)
        assert bound.flag

    def test_flag_false_with_large_delta(self):
        params = c.solve_pipka(0.81, 1.0, 2)
        bound = c.eta_ball_bound(4096, params.m, 0.81, params.eps, 1.0, 2, 0.4)
        assert not bound.flag

    def test_monotone_in_eps_and_m(self):
        values_eps = [
            c.eta_ball_bound(64, 4, 0.5, eps, 1.0, 2, 0.01).log2_value
            for eps in (0.001, 0.01, 0.05, 0.1)
        ]
        assert values_eps == sorted(values_eps)
        values_m = [
            c.eta_ball_bound(64, m, 0.5, 0.01, 1.0, 2, 0.01).log2_value
            for m in (1, 2, 4, 8, 16)
        ]
        assert values_m == sorted(values_m, reverse=True)

    def test_eps_domain(self):
        with pytest.raises(ValidationError):
            c.eta_ball_bound(64, 4, 0.81, 0.2, 1.0, 2, 0.01)  # eps >= 1 - 0.9


class TestKernelBackends:
    def test_window_counts_parity(self):
        for n, m in ((8, 2), (10, 3), (12, 5)):
            numpy_counts = _kernels.window_mismatch_counts_numpy(n, m)
            assert int(numpy_counts[0]) == 0
            if _kernels.window_mismatch_counts_numba is not None:
                numba_counts = _kernels.window_mismatch_counts_numba(n, m)
                assert np.array_equal(numpy_counts, numba_counts)

    def test_orbit_parity(self):
        xs = _kernels.tent_orbit_numpy(0.2345, 1.97, 500)
        ys = _kernels.logistic_orbit_numpy(0.2345, 3.91, 500)
        if _kernels.tent_orbit_numba is not None:
            assert np.array_equal(xs, _kernels.tent_orbit_numba(0.2345, 1.97, 500))
            assert np.array_equal(ys, _kernels.logistic_orbit_numba(0.2345, 3.91, 500))

    def test_numpy_backend_env_flag(self):
        import subprocess
        import sys

        code = (
            "import chaoslab as c\n"
            "assert not c.USING_NUMBA\n"
            "print(c.count_eta_ball('0'*8, 2, 0.5))\n"
        )
        out = subprocess.run(
            [sys.executable, "-c", code],
            capture_output=True,
            text=True,
            env={"PATH": "/usr/bin:/bin", "CHAOSLAB_BACKEND": "numpy"},
        )
        assert out.returncode == 0, out.stderr
        assert out.stdout.strip() == "31"
