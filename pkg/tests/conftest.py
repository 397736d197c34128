"""Shared fixtures and frozen reference values.

Golden index values were produced by the calibration pipeline itself at the
benchmark settings and cross-checked against the independent finite-horizon
recursion (see test_acceptance), then frozen here so any regression in the
DP or calibration trips loudly.
"""

import pytest

from banditindex import BernoulliArmState, BmabDpConfig, bmab_gi

# nu(1, 2, gamma) at N=2000, epsilon=5e-6 (midpoints).
GOLDEN_BMAB = {
    0.9: 0.7028900858203997,
    0.99: 0.8698601206087915,
}

# Canonical nu(0, 1, gamma, 1) at N=200, xi=6, delta=0.005, epsilon=5e-5.
GOLDEN_NMAB_BENCH = {
    0.9: 0.7465916769444905,
    0.99: 1.575857909305041,
}

# Single-stage-revelation upper bound for (sigma=1, n=2, gamma=0.9):
# root of 4.5*(1-lam)^2 = lam - 0.5, i.e. (10 - sqrt(10))/9.
BOUND_UPPER_1_2_09 = 0.7597469266479578


@pytest.fixture(scope="session")
def golden_bmab_09():
    result = bmab_gi(BernoulliArmState(1, 2), 0.9, 5e-6, BmabDpConfig(2000))
    assert abs(result.midpoint - GOLDEN_BMAB[0.9]) < 5e-6
    return result
