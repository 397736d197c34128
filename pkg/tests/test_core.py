import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.stats import beta as beta_dist
from scipy.stats import norm

from banditindex import (
    BernoulliArmState,
    BoundViolationError,
    CalibrationSpec,
    IndexResult,
    NormalArmState,
    calibrate_index,
    default_bounds_bmab,
    default_bounds_nmab,
    required_iterations,
)
from tests.conftest import BOUND_UPPER_1_2_09


class TestStates:
    def test_bernoulli_valid(self):
        s = BernoulliArmState(1.0, 2.0)
        assert s.mean == 0.5

    @pytest.mark.parametrize("sigma,n", [(0.0, 1.0), (2.0, 2.0), (3.0, 2.0), (-1.0, 2.0)])
    def test_bernoulli_invalid(self, sigma, n):
        with pytest.raises(ValueError):
            BernoulliArmState(sigma, n)

    def test_normal_valid(self):
        s = NormalArmState(0.0, 4.0, 2.0)
        assert s.sd == 0.5

    @pytest.mark.parametrize("mu,n,tau", [(0.0, 0.0, 1.0), (0.0, 1.0, 0.0), (math.inf, 1.0, 1.0)])
    def test_normal_invalid(self, mu, n, tau):
        with pytest.raises(ValueError):
            NormalArmState(mu, n, tau)

    def test_spec_invalid(self):
        with pytest.raises(ValueError):
            CalibrationSpec(1.0, 0.0, 1e-6)
        with pytest.raises(ValueError):
            CalibrationSpec(0.0, 1.0, 0.0)


class TestRequiredIterations:
    def test_power_of_two(self):
        assert required_iterations(0, 1, 2**-10) == 10

    def test_fractional(self):
        assert required_iterations(0.5, 1, 1e-4) == 13

    def test_already_small(self):
        assert required_iterations(0, 1, 1.5) == 0

    def test_zero_width(self):
        assert required_iterations(0.3, 0.3, 1e-9) == 0

    def test_bad_epsilon(self):
        with pytest.raises(ValueError):
            required_iterations(0, 1, 0.0)

    def test_bad_order(self):
        with pytest.raises(ValueError):
            required_iterations(1, 0, 1e-3)


class TestCalibrateIndex:
    def test_zero_evaluations_when_within_tolerance(self):
        oracle_calls = []
        result = calibrate_index(lambda lam: oracle_calls.append(lam) or 1.0,
                                 CalibrationSpec(0.0, 1.0, 1.0))
        assert (result.lower, result.upper, result.evaluations) == (0.0, 1.0, 0)
        assert not oracle_calls

    def test_sign_flip_quarter(self):
        result = calibrate_index(lambda lam: max(0.25 - lam, 0.0),
                                 CalibrationSpec(0.0, 1.0, 2**-10))
        assert result.evaluations == 10
        assert result.lower <= 0.25 <= result.upper
        assert result.width <= 2**-10

    def test_midpoint_property(self):
        r = IndexResult(0.2, 0.4, 3)
        assert r.midpoint == pytest.approx(0.3)

    def test_bound_violation_at_upper(self):
        with pytest.raises(BoundViolationError):
            calibrate_index(lambda lam: 1.0, CalibrationSpec(0.0, 1.0, 1e-3),
                            validate_bounds=True)

    def test_bound_violation_at_lower(self):
        with pytest.raises(BoundViolationError):
            calibrate_index(lambda lam: 0.0, CalibrationSpec(0.0, 1.0, 1e-3),
                            validate_bounds=True)

    def test_randomized_oracles_contain_change_point(self):
        rng = np.random.default_rng(42)
        for _ in range(100):
            lo, width = rng.uniform(-5, 5), rng.uniform(0.1, 10)
            hi = lo + width
            point = rng.uniform(lo, hi)
            eps = 10.0 ** rng.uniform(-8, -2)
            kind = rng.integers(3)
            if kind == 0:
                oracle = lambda lam: max(point - lam, 0.0)
            elif kind == 1:
                oracle = lambda lam: 1.0 if lam < point else 0.0
            else:
                oracle = lambda lam: max(point - lam, 0.0) ** 2
            result = calibrate_index(oracle, CalibrationSpec(lo, hi, eps))
            assert result.lower <= point <= result.upper
            assert result.width <= eps
            assert result.evaluations == required_iterations(lo, hi, eps)

    @given(
        lo=st.floats(-10, 10),
        width=st.floats(1e-6, 20),
        frac=st.floats(0.0, 1.0),
        eps=st.floats(1e-9, 1.0),
    )
    @settings(max_examples=200, deadline=None)
    def test_containment_property(self, lo, width, frac, eps):
        hi = lo + width
        point = lo + frac * width
        result = calibrate_index(
            lambda lam: 1.0 if lam < point else 0.0, CalibrationSpec(lo, hi, eps)
        )
        assert result.lower <= point or math.isclose(result.lower, point)
        assert point <= result.upper or math.isclose(result.upper, point)


class TestBmabBounds:
    def test_uniform_prior_quadratic_root(self):
        lo, hi = default_bounds_bmab(BernoulliArmState(1, 2), 0.9)
        assert lo == 0.5
        assert hi == pytest.approx(BOUND_UPPER_1_2_09, abs=2e-6)

    def test_gamma_zero(self):
        assert default_bounds_bmab(BernoulliArmState(1, 2), 0.0) == (0.5, 0.5)

    @pytest.mark.parametrize("sigma,n,gamma", [(1, 2, 0.99), (3, 7, 0.9), (0.5, 1.5, 0.8)])
    def test_upper_at_most_one(self, sigma, n, gamma):
        lo, hi = default_bounds_bmab(BernoulliArmState(sigma, n), gamma)
        assert lo <= hi <= 1.0

    def test_upper_solves_revelation_equation(self):
        # independent route: quadrature for the partial expectation, brentq root
        a, b, gamma = 2.0, 3.0, 0.9
        state = BernoulliArmState(2.0, 5.0)
        mean = state.mean
        coef = gamma / (1 - gamma)

        def excess(lam):
            part = quad(lambda th: (th - lam) * beta_dist.pdf(th, a, b), lam, 1)[0]
            return mean - lam + coef * part

        root = brentq(excess, mean, 1.0)
        _, hi = default_bounds_bmab(state, gamma)
        assert hi == pytest.approx(root, abs=2e-6)


class TestNmabBounds:
    def test_degenerate_posterior(self):
        lo, hi = default_bounds_nmab(NormalArmState(0.0, 1e9, 1.0), 0.9)
        assert lo == 0.0
        assert abs(hi) < 1e-3

    def test_location_shift(self):
        lo0, hi0 = default_bounds_nmab(NormalArmState(0.0, 3.0, 1.0), 0.9)
        lo5, hi5 = default_bounds_nmab(NormalArmState(5.0, 3.0, 1.0), 0.9)
        assert lo5 == pytest.approx(lo0 + 5.0, abs=1e-12)
        assert hi5 == pytest.approx(hi0 + 5.0, abs=1e-5)

    def test_standard_normal_root(self):
        # independent route for mu=0, n=1: mu - lam + 9*(phi(lam) - lam*(1-Phi(lam))) = 0
        def excess(lam):
            return -lam + 9.0 * (norm.pdf(lam) - lam * norm.sf(lam))

        root = brentq(excess, 0.0, 5.0)
        lo, hi = default_bounds_nmab(NormalArmState(0.0, 1.0, 1.0), 0.9)
        assert lo == 0.0
        assert hi > 0.6
        assert hi == pytest.approx(root, abs=2e-6)
