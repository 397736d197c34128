import numpy as np
import pytest

from banditindex import (
    BernoulliArmState,
    BmabDpConfig,
    bmab_gi,
    bmab_value_sign,
    default_bmab_horizon,
    max_remaining_reward,
)
from tests.conftest import GOLDEN_BMAB


class TestValueFunction:
    def test_retirement_everywhere_at_lam_one(self):
        state = BernoulliArmState(1, 2)
        for N in (1, 5, 50):
            assert bmab_value_sign(state, 0.9, 1.0, BmabDpConfig(N)) == 0.0

    def test_myopic_single_stage(self):
        v = bmab_value_sign(BernoulliArmState(1, 2), 0.0, 0.3, BmabDpConfig(1))
        assert v == pytest.approx(0.2)

    def test_continuation_carries_option_value(self):
        # two-stage expansion: at lam = mean the immediate term is 0 but the
        # success branch (mean 2/3 > lam) makes the continuation positive
        v = bmab_value_sign(BernoulliArmState(1, 2), 0.9, 0.5, BmabDpConfig(100))
        assert v > 0.0

    def test_nonincreasing_in_lam(self):
        rng = np.random.default_rng(3)
        config = BmabDpConfig(60)
        for _ in range(50):
            n = rng.uniform(1.0, 20.0)
            sigma = rng.uniform(0.1, 0.9) * n
            state = BernoulliArmState(sigma, n)
            gamma = rng.uniform(0.0, 0.95)
            lam1 = rng.uniform(0.0, 1.0)
            lam2 = lam1 + rng.uniform(0.0, 1.0 - lam1)
            v1 = bmab_value_sign(state, gamma, lam1, config)
            v2 = bmab_value_sign(state, gamma, lam2, config)
            assert v1 >= v2

    def test_rejects_nonfinite_lam(self):
        with pytest.raises(ValueError):
            bmab_value_sign(BernoulliArmState(1, 2), 0.9, float("nan"), BmabDpConfig(5))


class TestIndex:
    def test_myopic_gamma_zero(self):
        r = bmab_gi(BernoulliArmState(1, 2), 0.0, 1e-6)
        assert (r.lower, r.upper, r.evaluations) == (0.5, 0.5, 0)

    def test_golden_value(self, golden_bmab_09):
        assert golden_bmab_09.width < 5e-6
        assert golden_bmab_09.midpoint == pytest.approx(GOLDEN_BMAB[0.9], abs=5e-6)

    def test_epsilon_floor(self):
        with pytest.raises(ValueError):
            bmab_gi(BernoulliArmState(1, 2), 0.9, 1e-12)

    def test_explicit_bounds_validated(self):
        from banditindex import BoundViolationError

        with pytest.raises(BoundViolationError):
            # interval entirely above the index: oracle is zero at its lower end
            bmab_gi(BernoulliArmState(1, 2), 0.9, 1e-5, BmabDpConfig(100),
                    bounds=(0.9, 0.99))

    def test_bounds_provider_hook(self, golden_bmab_09):
        provider_calls = []

        def provider(state, gamma):
            provider_calls.append((state, gamma))
            return state.mean, 0.76

        r = bmab_gi(BernoulliArmState(1, 2), 0.9, 5e-6, BmabDpConfig(2000),
                    bounds=provider)
        assert provider_calls
        assert r.lower <= golden_bmab_09.midpoint <= r.upper + 5e-6

    def test_index_within_analytic_bounds(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            n = rng.uniform(1.0, 15.0)
            state = BernoulliArmState(rng.uniform(0.1, 0.9) * n, n)
            gamma = rng.uniform(0.0, 0.95)
            r = bmab_gi(state, gamma, 1e-5, BmabDpConfig(100))
            assert state.mean - 1e-5 <= r.midpoint <= 1.0

    def test_default_horizons(self):
        assert default_bmab_horizon(0.9) == 200
        assert default_bmab_horizon(0.95) == 800
        assert default_bmab_horizon(0.99) == 800


class TestBoundValidity:
    """The produced default interval safely brackets: V positive just below
    the lower bound, zero just above the upper bound."""

    @pytest.mark.parametrize("sigma,n,gamma", [(1, 2, 0.9), (2, 5, 0.8), (4.5, 6, 0.95)])
    def test_oracle_signs_at_bounds(self, sigma, n, gamma):
        from banditindex import default_bounds_bmab

        state = BernoulliArmState(sigma, n)
        lo, hi = default_bounds_bmab(state, gamma)
        eps = 1e-4
        config = BmabDpConfig(200)
        assert bmab_value_sign(state, gamma, lo - eps, config) > 0.0
        assert bmab_value_sign(state, gamma, hi + eps, config) == 0.0


class TestMonotonicity:
    CONFIG = BmabDpConfig(200)
    EPS = 1e-5

    def gi(self, sigma, n, gamma):
        return bmab_gi(BernoulliArmState(sigma, n), gamma, self.EPS, self.CONFIG).midpoint

    def test_increasing_in_sigma(self):
        for gamma in (0.5, 0.9):
            values = [self.gi(s, 5, gamma) for s in (1, 2, 3, 4)]
            assert all(b >= a - self.EPS for a, b in zip(values, values[1:]))

    def test_scaling_nonincreasing_in_c(self):
        for gamma in (0.5, 0.9):
            values = [self.gi(c * 1.0, c * 2.0, gamma) for c in (0.5, 1.0, 2.0)]
            assert all(b <= a + self.EPS for a, b in zip(values, values[1:]))

    def test_nonincreasing_in_n_at_fixed_sigma(self):
        for gamma in (0.5, 0.9):
            values = [self.gi(1.0, n, gamma) for n in (2.0, 3.0, 4.0, 5.0)]
            assert all(b <= a + self.EPS for a, b in zip(values, values[1:]))

    def test_horizon_error_monotone_on_table_grid(self, golden_bmab_09):
        errors = []
        for N in (20, 60, 100, 200):
            r = bmab_gi(BernoulliArmState(1, 2), 0.9, 5e-6, BmabDpConfig(N))
            errors.append(abs(r.midpoint - golden_bmab_09.midpoint))
        assert all(b <= a + 1e-5 for a, b in zip(errors, errors[1:]))


class TestMaxRemainingReward:
    def test_paper_rrn_values(self):
        assert max_remaining_reward(0.9, 20) == pytest.approx(1.21577, abs=5e-6)
        assert max_remaining_reward(0.99, 20) == pytest.approx(81.79069, abs=5e-6)

    def test_stage_zero(self):
        assert max_remaining_reward(0.9, 0) == pytest.approx(10.0)

    def test_invalid(self):
        with pytest.raises(ValueError):
            max_remaining_reward(1.0, 5)
        with pytest.raises(ValueError):
            max_remaining_reward(0.9, -1)
