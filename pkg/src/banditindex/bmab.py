"""Exact (up to horizon truncation) OAB value function and index for Bernoulli arms.

The OAB state space after ``s`` pulls from prior (sigma, n) is the triangle
(sigma + j, n + s) for j = 0..s, so stage ``s`` holds s+1 states and a
horizon of N stages holds (N+1)(N+2)/2 states in total.  Backward induction
keeps only one stage array at a time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np

from .core import (
    BernoulliArmState,
    CalibrationSpec,
    IndexResult,
    calibrate_index,
    check_discount,
    default_bounds_bmab,
)

__all__ = [
    "BmabDpConfig",
    "BmabEvaluator",
    "default_bmab_horizon",
    "bmab_value_sign",
    "bmab_gi",
    "max_remaining_reward",
]

# Below this accuracy, double-precision accumulation over long horizons can
# no longer be trusted.
MIN_EPSILON = 1e-9


@dataclass(frozen=True)
class BmabDpConfig:
    """Horizon of the OAB dynamic programme (number of stages N >= 1)."""

    horizon: int

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")

    @property
    def state_count(self) -> int:
        n = self.horizon
        return (n + 2) * (n + 1) // 2


def default_bmab_horizon(gamma: float) -> int:
    """Horizon giving errors below display precision: 200 up to gamma=0.9,
    800 up to gamma=0.99 (also used beyond, where accuracy degrades)."""
    return 200 if gamma <= 0.9 else 800


class BmabEvaluator:
    """Reusable OAB value evaluator for one (state, gamma, horizon) triple.

    Posterior means for every stage are precomputed once so repeated
    evaluations inside a calibration only pay for the backward sweep.
    """

    def __init__(self, state: BernoulliArmState, gamma: float, horizon: int):
        self.state = state
        self.gamma = check_discount(gamma)
        self.horizon = int(horizon)
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {horizon}")
        self._means = [
            (state.sigma + np.arange(s + 1)) / (state.n + s)
            for s in range(self.horizon + 1)
        ]
        # No-further-learning value of a stage-N state in stage-local units:
        # max(mean - lam, 0)/(1-gamma).  (Its time-0 value carries a further
        # gamma^N, which the backward discounting applies implicitly.)
        self._terminal_scale = 1.0 / (1.0 - gamma) if gamma else 0.0

    def value(self, lam: float) -> float:
        """Relative OAB value V(sigma, n, gamma, lam) >= 0 at the root."""
        if not math.isfinite(lam):
            raise ValueError(f"lam must be finite, got {lam}")
        gamma = self.gamma
        values = self._terminal_scale * np.maximum(self._means[self.horizon] - lam, 0.0)
        for s in range(self.horizon - 1, -1, -1):
            means = self._means[s]
            cont = means * values[1:] + (1.0 - means) * values[:-1]
            values = np.maximum(means - lam + gamma * cont, 0.0)
        return float(values[0])


def bmab_value_sign(
    state: BernoulliArmState,
    gamma: float,
    lam: float,
    config: BmabDpConfig,
) -> float:
    """Relative OAB value at the root; positive means the risky arm is
    preferred to a safe arm paying ``lam``, zero means retirement."""
    return BmabEvaluator(state, gamma, config.horizon).value(lam)


def _resolve_bounds(state, gamma, bounds) -> Tuple[float, float, bool]:
    if bounds is None:
        lo, hi = default_bounds_bmab(state, gamma)
        return lo, hi, False
    if callable(bounds):
        lo, hi = bounds(state, gamma)
    else:
        lo, hi = bounds
    return float(lo), float(hi), True


def bmab_gi(
    state: BernoulliArmState,
    gamma: float,
    epsilon: float,
    config: Optional[BmabDpConfig] = None,
    bounds: Union[None, Tuple[float, float], Sequence[float], "callable"] = None,
) -> IndexResult:
    """Gittins index of a Bernoulli arm by calibration, truncated at horizon N.

    ``bounds`` may be a bracketing (lower, upper) pair or a callable
    ``(state, gamma) -> (lower, upper)`` replacing the default bounds
    provider; caller-supplied bounds are sign-checked and raise
    :class:`~banditindex.core.BoundViolationError` if unsafe.  With gamma=0
    the index is the posterior mean exactly and no DP runs.
    """
    gamma = check_discount(gamma)
    if epsilon < MIN_EPSILON:
        raise ValueError(
            f"epsilon below the {MIN_EPSILON} floating-point floor: {epsilon}"
        )
    if gamma == 0.0:
        m = state.mean
        return IndexResult(lower=m, upper=m, evaluations=0)
    if config is None:
        config = BmabDpConfig(default_bmab_horizon(gamma))
    lo, hi, validate = _resolve_bounds(state, gamma, bounds)
    evaluator = BmabEvaluator(state, gamma, config.horizon)
    spec = CalibrationSpec(lower=lo, upper=hi, epsilon=epsilon)
    return calibrate_index(evaluator.value, spec, validate_bounds=validate)


def max_remaining_reward(gamma: float, horizon: int) -> float:
    """gamma^N/(1-gamma): supremum of discounted reward after stage N for
    rewards in [0, 1].  Bounds the truncation error of the horizon-N index."""
    gamma = check_discount(gamma)
    if horizon < 0:
        raise ValueError(f"horizon must be >= 0, got {horizon}")
    return gamma**horizon / (1.0 - gamma)
