import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy import special

from fracdiff import ConvergenceError
from fracdiff.expsum.kernel import (build_expsum, eval_expsum, fit_expsum, kernel_exact, select_truncation,
                                    truncation_bounds)
from fracdiff.util.special import c_alpha


def brute_force_tails(alpha, rho_step, M, N, t, extra=500):
    upper = np.arange(N + 1, N + extra + 1) * rho_step
    lower = np.arange(-M - extra, -M) * rho_step
    term = lambda r: rho_step * np.exp((1 - alpha) * r - t * np.exp(r))
    return float(np.sum(term(upper))), float(np.sum(term(lower)))


class TestBuild:
    def test_terms(self):
        approx = build_expsum(0.5, 1.0, 0, 0)
        assert approx.terms == [(1.0, 1.0)]
        approx = build_expsum(0.5, 0.5, 0, 2)
        assert approx.weights[2] == pytest.approx(0.5 * np.exp(0.5), rel=1e-12)
        assert approx.rates[2] == pytest.approx(np.e, rel=1e-12)
        approx = build_expsum(0.25, 0.5, 2, 0)
        assert approx.weights[0] == pytest.approx(0.5 * np.exp(-0.75), rel=1e-12)
        assert approx.rates[0] == pytest.approx(np.exp(-1), rel=1e-12)

    def test_invariants(self):
        approx = build_expsum(0.3, 0.25, 40, 30)
        assert approx.n_terms == 71 == len(approx.weights)
        assert list(approx.indices[[0, -1]]) == [-40, 30]
        assert np.all(approx.weights > 0)
        assert np.all(np.diff(approx.rates) > 0) and approx.rates[0] > 0
        with pytest.raises(ValueError):
            approx.weights[0] = 1.0

    def test_invalid(self):
        for args in ((0.5, 0, 1, 1), (0.5, -0.25, 1, 1), (0.5, 0.25, -1, 1), (0.5, 0.25, 1, 2.5),
                     (0.5, 1.0, 0, 800), (1.5, 0.25, 1, 1)):
            with pytest.raises(ValueError):
                build_expsum(*args)

    def test_large_term_count_warns(self):
        with pytest.warns(UserWarning):
            approx = build_expsum(0.5, 0.25, 1500, 1000)
        assert approx.n_terms == 2501


class TestKernel:
    def test_exact(self):
        assert kernel_exact(0.5, 1.0) == pytest.approx(1.7724538509, rel=1e-10)
        assert kernel_exact(0.5, 4.0) == pytest.approx(0.8862269255, rel=1e-10)
        assert c_alpha(0.25) * kernel_exact(0.25, 2.0) == pytest.approx(0.1640011, rel=1e-6)
        assert kernel_exact(0.5, np.array([1.0, 4.0])).shape == (2,)
        for t in (0.0, -1.0):
            with pytest.raises(ValueError):
                kernel_exact(0.5, t)

    def test_single_term(self):
        assert eval_expsum(build_expsum(0.5, 1.0, 0, 0), 0.0) == 1.0

    def test_matches_exact_kernel(self):
        approx = build_expsum(0.5, 0.25, 240, 60)
        assert eval_expsum(approx, 1.0) == pytest.approx(np.sqrt(np.pi), rel=1e-10)
        t = np.geomspace(1e-3, 10, 30)
        assert_allclose(eval_expsum(approx, t), kernel_exact(0.5, t), rtol=1e-8)

    def test_error_is_explained_by_tails(self):
        approx = build_expsum(0.5, 0.25, 60, 60)
        bound = truncation_bounds(approx, 1.0)
        assert bound.condition_satisfied
        error = np.sqrt(np.pi) - eval_expsum(approx, 1.0)
        assert 0 < error <= (bound.upper_tail + bound.lower_tail) * (1 + 1e-9) + 1e-14

    def test_positive_and_decreasing(self):
        approx = build_expsum(0.5, 0.25, 60, 60)
        values = eval_expsum(approx, np.concatenate([[0.0], np.geomspace(1e-3, 1e6, 60)]))
        assert np.all(values > 0)
        assert np.all(np.diff(values) < 0)
        assert values[-1] <= np.sum(approx.weights) * np.exp(-approx.rates[0] * 1e6)
        with pytest.raises(ValueError):
            eval_expsum(approx, -1.0)

    def test_halving_rho_step(self):
        M, N = select_truncation(0.5, 0.5, 1e-2, 1.0, 1e-13)
        t = np.geomspace(1e-2, 1.0, 50)
        exact = kernel_exact(0.5, t)
        errors = [np.max(np.abs(eval_expsum(build_expsum(0.5, h, k * M, k * N), t) - exact) / exact)
                  for h, k in ((0.5, 1), (0.25, 2))]
        assert errors[0] >= 10 * errors[1]


class TestTruncationBounds:
    def test_upper_tail_example(self):
        bound = truncation_bounds(build_expsum(0.5, 0.5, 4, 2), 1.0)
        assert bound.condition_satisfied
        gamma_tail = special.gammaincc(0.5, np.e) * special.gamma(0.5)
        assert bound.upper_tail == pytest.approx(gamma_tail, rel=1e-10)
        brute = np.sum(0.5 * np.exp(0.25 * np.arange(3, 201) - np.exp(0.5 * np.arange(3, 201))))
        assert brute <= bound.upper_tail

    def test_condition_fails(self):
        bound = truncation_bounds(build_expsum(0.5, 0.5, 0, 2), 1.0)
        assert not bound.condition_satisfied
        assert bound.upper_tail >= 0 and bound.lower_tail >= 0

    def test_vanishing_upper_tail(self):
        assert truncation_bounds(build_expsum(0.5, 0.5, 0, 100), 1.0).upper_tail < 1e-300

    def test_domain(self):
        for t in (0.0, -1.0):
            with pytest.raises(ValueError):
                truncation_bounds(build_expsum(0.5, 0.5, 1, 1), t)

    @pytest.mark.parametrize('alpha', [0.25, 0.5, 0.75])
    @pytest.mark.parametrize('rho_step', [0.25, 0.5, 1.0])
    def test_tails_are_dominated(self, alpha, rho_step):
        checked = 0
        for M, N in ((10, 4), (20, 8), (40, 16)):
            approx = build_expsum(alpha, rho_step, M, N)
            for t in (0.05, 0.3, 1.0):
                bound = truncation_bounds(approx, t)
                if not bound.condition_satisfied:
                    continue
                upper, lower = brute_force_tails(alpha, rho_step, M, N, t)
                assert upper <= bound.upper_tail * (1 + 1e-10)
                assert lower <= bound.lower_tail * (1 + 1e-10)
                checked += 1
        assert checked > 0


class TestSelectTruncation:
    def test_loose_tolerance(self):
        assert select_truncation(0.5, 0.5, 0.1, 1.0, 10.0) == (2, 4)

    def test_bounds_hold_at_both_ends(self):
        M, N = select_truncation(0.5, 0.25, 1e-2, 1.0, 1e-8)
        approx = build_expsum(0.5, 0.25, M, N)
        for t in (1e-2, 1.0):
            bound = truncation_bounds(approx, t)
            assert bound.condition_satisfied
            assert bound.upper_tail <= 1e-8 and bound.lower_tail <= 1e-8
        smaller = build_expsum(0.5, 0.25, M, N - 1)
        assert truncation_bounds(smaller, 1e-2).upper_tail > 1e-8

    def test_tails_are_incomplete_gammas(self):
        approx = build_expsum(0.25, 0.5, 12, 6)
        for t in (1e-2, 0.3, 1.0):
            bound = truncation_bounds(approx, t)
            upper = t ** -0.75 * special.gamma(0.75) * special.gammaincc(0.75, t * np.exp(6 * 0.5))
            lower = t ** -0.75 * special.gamma(0.75) * special.gammainc(0.75, t * np.exp(-12 * 0.5))
            assert bound.upper_tail == pytest.approx(upper, rel=1e-10)
            assert bound.lower_tail == pytest.approx(lower, rel=1e-10)

    def test_fit_records_range(self):
        approx = fit_expsum(0.5, 0.25, 1e-2, 1.0, 1e-8)
        assert (approx.delta, approx.t_max) == (1e-2, 1.0)
        t = np.geomspace(1e-2, 1.0, 40)
        assert np.max(np.abs(eval_expsum(approx, t) - kernel_exact(0.5, t)) / kernel_exact(0.5, t)) <= 1e-7

    def test_invalid(self):
        for args in ((0.5, 0.25, 1.0, 1.0, 1e-8), (0.5, 0.25, 0.0, 1.0, 1e-8), (0.5, 0.25, 1e-2, 1.0, 0.0),
                     (0.5, 0.0, 1e-2, 1.0, 1e-8)):
            with pytest.raises(ValueError):
                select_truncation(*args)

    def test_unreachable(self):
        with pytest.raises(ConvergenceError):
            select_truncation(0.5, 0.25, 1e-2, 1.0, 1e-12, max_index=3)
