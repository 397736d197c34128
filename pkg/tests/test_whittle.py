import pytest

from banditindex import (
    BernoulliArmState,
    BmabDpConfig,
    bmab_gi,
    whittle_fh_index,
    whittle_fh_value,
)
from tests.conftest import GOLDEN_BMAB

TWO_STAGE_POINT = 0.8 / 1.45  # hand-solved: 0.5 - lam + 0.45*(2/3 - lam) = 0


def tree_value(sigma, n, gamma, lam, s):
    """Exhaustive-enumeration oracle: optimal stopping over the full binary
    outcome tree, plain recursion with no shared state arrays."""
    if s == 0:
        return 0.0
    p = sigma / n
    cont = p * tree_value(sigma + 1, n + 1, gamma, lam, s - 1) + (1 - p) * tree_value(
        sigma, n + 1, gamma, lam, s - 1
    )
    return max(sigma / n - lam + gamma * cont, 0.0)


class TestValue:
    def test_empty_horizon(self):
        for lam in (-1.0, 0.0, 0.5, 2.0):
            assert whittle_fh_value(BernoulliArmState(1, 2), 0.9, lam, 0) == 0.0

    def test_single_step_myopic(self):
        v = whittle_fh_value(BernoulliArmState(1, 2), 0.9, 0.3, 1)
        assert v == pytest.approx(0.2)

    def test_two_stage_calibration_point(self):
        v = whittle_fh_value(BernoulliArmState(1, 2), 0.9, TWO_STAGE_POINT, 2)
        assert v == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("s", [1, 2, 3])
    def test_matches_enumeration_tree(self, s):
        for lam in (0.2, 0.45, 0.6, 0.9):
            dp = whittle_fh_value(BernoulliArmState(1, 2), 0.9, lam, s)
            tree = tree_value(1.0, 2.0, 0.9, lam, s)
            assert dp == pytest.approx(tree, abs=1e-12)

    def test_negative_horizon_rejected(self):
        with pytest.raises(ValueError):
            whittle_fh_value(BernoulliArmState(1, 2), 0.9, 0.5, -1)


class TestIndex:
    def test_single_step_is_mean(self):
        r = whittle_fh_index(BernoulliArmState(1, 2), 0.9, 1, 1e-6)
        assert (r.lower, r.upper, r.evaluations) == (0.5, 0.5, 0)

    def test_two_stage_hand_tree(self):
        r = whittle_fh_index(BernoulliArmState(1, 2), 0.9, 2, 1e-6)
        assert r.midpoint == pytest.approx(TWO_STAGE_POINT, abs=2e-6)

    @pytest.mark.parametrize("s", [2, 3])
    def test_small_s_matches_enumeration_calibration(self, s):
        eps = 1e-6
        r = whittle_fh_index(BernoulliArmState(1, 2), 0.9, s, eps)
        lo, hi = 0.5, 1.0
        while hi - lo > eps:
            mid = 0.5 * (lo + hi)
            if tree_value(1.0, 2.0, 0.9, mid, s) > 0:
                lo = mid
            else:
                hi = mid
        assert r.midpoint == pytest.approx(0.5 * (lo + hi), abs=2 * eps)

    def test_nondecreasing_in_s_bounded_by_gi(self, golden_bmab_09):
        eps = 1e-5
        values = [
            whittle_fh_index(BernoulliArmState(1, 2), 0.9, s, eps).midpoint
            for s in (1, 2, 5, 20, 100)
        ]
        assert all(b >= a - eps for a, b in zip(values, values[1:]))
        assert all(v <= golden_bmab_09.midpoint + eps for v in values)

    def test_always_at_least_mean(self):
        for s in (1, 2, 5, 40):
            r = whittle_fh_index(BernoulliArmState(2, 5), 0.95, s, 1e-5)
            assert r.midpoint >= 0.4 - 1e-5

    def test_converges_to_gittins(self, golden_bmab_09):
        r = whittle_fh_index(BernoulliArmState(1, 2), 0.9, 400, 5e-6)
        assert abs(r.midpoint - golden_bmab_09.midpoint) < 1e-4

    def test_requires_positive_horizon(self):
        with pytest.raises(ValueError):
            whittle_fh_index(BernoulliArmState(1, 2), 0.9, 0, 1e-6)
