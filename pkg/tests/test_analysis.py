import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from beliefavg.analysis import (CASE1, CASE2, NEITHER, alpha_values, average_error,
                                classify_trace, detect_quantized_consensus, finite_time_bound,
                                first_classified, fit_rate, mass_report, matrix_seminorm,
                                quantized_target, seminorm_inf, time_to_threshold)
from beliefavg.observations import round_to_grid
from beliefavg.protocols import PUSH_SUM, QUANTIZED, QuantizationConfig, init_state
from beliefavg.weights import WeightMatrix
from fractions import Fraction as F

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
vec = st.integers(1, 8).flatmap(lambda n: arrays(float, n, elements=finite))


def stochastic(rng, n):
    a = rng.random((n, n)) * (rng.random((n, n)) < 0.7)
    a[np.arange(n), rng.integers(0, n, n)] += 0.1
    return a / a.sum(axis=1, keepdims=True)


class TestSeminorm:
    def test_examples(self):
        assert seminorm_inf([1, 1, 1]) == 0
        assert seminorm_inf([0, 1]) == 0.5
        assert seminorm_inf([3, -1, 2]) == 2

    @given(vec, finite, st.floats(-100, 100, allow_nan=False))
    def test_shift_and_scale(self, x, c, a):
        tol = 1e-9 * (1 + np.abs(x).max() + abs(c)) * (1 + abs(a))
        assert seminorm_inf(x + c) == pytest.approx(seminorm_inf(x), abs=tol)
        assert seminorm_inf(a * x) == pytest.approx(abs(a) * seminorm_inf(x), abs=tol)

    @given(st.integers(1, 8).flatmap(lambda n: st.tuples(arrays(float, n, elements=finite),
                                                         arrays(float, n, elements=finite))))
    def test_triangle(self, xy):
        x, y = xy
        assert seminorm_inf(x + y) <= seminorm_inf(x) + seminorm_inf(y) + 1e-9 * (1 + np.abs(x).max() + np.abs(y).max())


class TestMatrixSeminorm:
    def test_examples(self):
        assert matrix_seminorm(np.eye(2)) == 1
        assert matrix_seminorm([[0.5, 0.5], [0.5, 0.5]]) == 0

    @settings(max_examples=200)
    @given(st.integers(1, 8), st.integers(0, 2**32 - 1))
    def test_submultiplicative_and_bounded(self, n, seed):
        rng = np.random.default_rng(seed)
        A, B = stochastic(rng, n), stochastic(rng, n)
        assert matrix_seminorm(A) <= 1 + 1e-12
        assert matrix_seminorm(A @ B) <= matrix_seminorm(A) * matrix_seminorm(B) + 1e-12

    def test_contraction_bound_on_vectors(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            A = stochastic(rng, 6)
            x = rng.normal(size=6)
            assert seminorm_inf(A @ x) <= matrix_seminorm(A) * seminorm_inf(x) + 1e-12


def test_average_error_examples():
    assert average_error([2, 2], 2) == 0
    assert average_error([1, 3], 2) == 1
    assert average_error([0], 5) == 5


class TestFitRate:
    t = np.arange(1, 10_001)

    def test_power_law(self):
        fit = fit_rate(self.t, values=7.0 / self.t)
        assert fit.slope == pytest.approx(-1, abs=1e-9)
        assert fit.t_lo == 1000 and fit.t_hi == 10_000

    @pytest.mark.parametrize("k", [0.5, 1.5, 2.0])
    def test_recovers_exponents(self, k):
        assert fit_rate(self.t, values=3.0 * self.t ** -k).slope == pytest.approx(-k, rel=1e-6)

    def test_geometric_decay_is_steeper(self):
        t = np.arange(1, 101)
        fit = fit_rate(t, 10, 100, values=2.0 * 0.9 ** t)
        # independent evaluation: least squares of t*log(0.9) on log t over [10, 100]
        lx, ly = np.log(t[9:]), t[9:] * math.log(0.9)
        expect = np.cov(lx, ly, bias=True)[0, 1] / lx.var()
        assert fit.slope == pytest.approx(expect, rel=1e-9)
        assert fit.slope < -3

    def test_constant(self):
        assert fit_rate(self.t, values=np.full(10_000, 4.0)).slope == pytest.approx(0, abs=1e-9)

    def test_window_too_short(self):
        with pytest.raises(ValueError):
            fit_rate(self.t, 5, 9, values=1.0 / self.t)


class TestClassification:
    def test_examples(self):
        assert detect_quantized_consensus([5.2, 5.7, 5.9], 0.3, 5.5) == CASE1
        assert detect_quantized_consensus([5.9, 6.1], [0.3, 0.3], 6.0) == CASE2
        assert detect_quantized_consensus([0, 10], 0.3, 5.0) == NEITHER

    def test_trace_helpers(self):
        v = classify_trace([[0, 10], [5.9, 6.1], [6.0, 6.2]], [0.3, 0.3], 6.0)
        assert v == [NEITHER, CASE2, CASE1]
        assert first_classified(v) == 2
        assert first_classified([NEITHER]) is None

    @settings(max_examples=300)
    @given(st.floats(0, 100), st.floats(0.01, 1.0), st.integers(0, 2**32 - 1))
    def test_case1_within_one_plus_half_delta(self, xbar, delta, seed):
        rng = np.random.default_rng(seed)
        beliefs = xbar + rng.uniform(-3, 3, 4)
        xbar = beliefs.mean()
        target = quantized_target(beliefs, delta).value
        assert abs(target - xbar) <= delta / 2 + 1e-9
        base = math.floor(target)
        y = base + rng.random(4) * 0.999
        if detect_quantized_consensus(y, 0.2, target) == CASE1:
            assert (np.abs(y - xbar) < 1 + delta / 2 + 1e-9).all()

    def test_alpha_values(self):
        W = WeightMatrix.from_fractions([[F(4, 5), F(1, 5)], [F(1, 5), F(4, 5)]])
        assert alpha_values(W, 0.01) == pytest.approx([0.21, 0.21])
        W = WeightMatrix.from_fractions([[F(51, 100), F(49, 100)], [F(49, 100), F(51, 100)]])
        assert alpha_values(W, 0.001) == pytest.approx([0.491, 0.491])
        with pytest.raises(ValueError):
            alpha_values(W, 0.02)


def test_quantized_target_examples():
    assert quantized_target([1.0, 2.0], 0.1) == pytest.approx((1.5, 0))
    assert quantized_target([1.04], 0.1) == pytest.approx((1.0, 0.04))
    assert quantized_target([1.04, 2.06], 0.1) == pytest.approx((1.55, 0), abs=1e-12)


@given(arrays(float, 5, elements=st.floats(-1e3, 1e3)), st.sampled_from([0.01, 0.1, 1.0]))
def test_quantized_target_within_half_delta(b, delta):
    v, dev = quantized_target(b, delta)
    assert dev <= delta / 2 + 1e-9
    assert v == pytest.approx(float(np.mean(round_to_grid(b, delta))))


class TestFiniteTimeBound:
    def test_example(self):
        assert finite_time_bound(1, 1, 0.5, 1, 0, 4).bound == pytest.approx(0.5625)

    def test_limits(self):
        assert finite_time_bound(1, 1, 0.5, 1, 0, 1e9).bound < 1e-8
        assert finite_time_bound(5, 2, 0.0, 1, 3, 7).bound == pytest.approx(6 / 7)

    def test_threshold(self):
        b = finite_time_bound(1, 1, 0.5, 1, 0, 4, delta=0.05)
        assert b.t_min == pytest.approx(math.log(2 / (0.05 * (1 - 2 * math.exp(-2)))) / 2)
        with pytest.raises(ValueError):
            finite_time_bound(1, 0.2, 0.5, 1, 0, 4, delta=0.05)


def test_mass_report_examples():
    assert mass_report(init_state([1, 2])) == (3, 3, None)
    assert mass_report(init_state([1, 2, 3], PUSH_SUM)).v == 3
    r = mass_report(init_state([1.26], QUANTIZED, QuantizationConfig("truncation", 0.1)))
    assert r.y == pytest.approx(1.3) and r.z == pytest.approx(1.3) and r.v is None


def test_time_to_threshold():
    class T:
        t = np.arange(1, 6)
        seminorm = np.array([3.0, 1.0, 0.4, 0.6, 0.1])
    assert time_to_threshold(T, 0.5) == 3
    assert time_to_threshold(T, 0.01) is None
