"""Finite-horizon Whittle indices for Bernoulli arms.

With ``s`` plays remaining, the safe arm's relative value per stage is 0 and
the recursion terminates at exactly V_0 = 0, so unlike the infinite-horizon
index there is no terminal approximation.  The index is non-decreasing in
``s`` and converges to the Gittins index, which also makes this module a
small exact oracle for the Bernoulli DP.

This module intentionally has its own backward recursion rather than reusing
the Bernoulli evaluator, so the two can cross-check each other.
"""

from __future__ import annotations

import math

import numpy as np

from .core import (
    BernoulliArmState,
    CalibrationSpec,
    IndexResult,
    calibrate_index,
    check_discount,
    default_bounds_bmab,
)
from .bmab import MIN_EPSILON

__all__ = ["whittle_fh_value", "whittle_fh_index"]


def _value_by_remaining(state: BernoulliArmState, gamma, lam, s, means):
    values = np.zeros(s + 1)
    for pulls in range(s - 1, -1, -1):
        m = means[pulls]
        cont = m * values[1 : pulls + 2] + (1.0 - m) * values[: pulls + 1]
        values = np.maximum(m - lam + gamma * cont, 0.0)
    return float(values[0])


def whittle_fh_value(
    state: BernoulliArmState, gamma: float, lam: float, s: int
) -> float:
    """Relative value of the s-plays-remaining OAB at the root, V_0 = 0 exact."""
    gamma = check_discount(gamma)
    if s < 0:
        raise ValueError(f"remaining horizon s must be >= 0, got {s}")
    if not math.isfinite(lam):
        raise ValueError(f"lam must be finite, got {lam}")
    if s == 0:
        return 0.0
    means = [
        (state.sigma + np.arange(k + 1)) / (state.n + k) for k in range(s)
    ]
    return _value_by_remaining(state, gamma, lam, s, means)


def whittle_fh_index(
    state: BernoulliArmState, gamma: float, s: int, epsilon: float
) -> IndexResult:
    """Whittle index of a Bernoulli arm with s plays remaining.

    Equals the posterior mean exactly at s=1 (and for gamma=0 at any s);
    otherwise located by calibration between the mean and the
    single-stage-revelation upper bound of the infinite-horizon index.
    """
    gamma = check_discount(gamma)
    if s < 1:
        raise ValueError(f"index requires s >= 1, got {s}")
    if epsilon < MIN_EPSILON:
        raise ValueError(
            f"epsilon below the {MIN_EPSILON} floating-point floor: {epsilon}"
        )
    mean = state.mean
    if s == 1 or gamma == 0.0:
        return IndexResult(lower=mean, upper=mean, evaluations=0)
    lo, hi = default_bounds_bmab(state, gamma)
    means = [
        (state.sigma + np.arange(k + 1)) / (state.n + k) for k in range(s)
    ]

    def value(lam: float) -> float:
        return _value_by_remaining(state, gamma, lam, s, means)

    spec = CalibrationSpec(lower=lo, upper=hi, epsilon=epsilon)
    return calibrate_index(value, spec)
