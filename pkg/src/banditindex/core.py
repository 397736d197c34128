"""Domain types, the bisection calibration engine, and initial index bounds.

The central object is the one-armed bandit (OAB): a risky arm with a
conjugate informational state played against a safe arm of fixed reward
``lam``.  The index of the risky arm is the smallest ``lam`` at which the
relative value of the OAB is zero.  Because the relative value is
non-increasing in ``lam``, the index is located by bisection on a bracketing
interval, with the DP value function of the relevant reward family acting as
a sign oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Tuple

from scipy.special import betainc, ndtr

__all__ = [
    "BoundViolationError",
    "BernoulliArmState",
    "NormalArmState",
    "CalibrationSpec",
    "IndexResult",
    "check_discount",
    "required_iterations",
    "calibrate_index",
    "default_bounds_bmab",
    "default_bounds_nmab",
]

# Root-solve tolerance for the single-stage-revelation upper bounds.
_BOUND_TOL = 1e-6

_SQRT_2PI = math.sqrt(2.0 * math.pi)


class BoundViolationError(ValueError):
    """The initial calibration interval does not safely bracket the index."""


def check_discount(gamma: float) -> float:
    """Validate a discount factor: 0 <= gamma < 1 (safe-arm value finite)."""
    gamma = float(gamma)
    if not 0.0 <= gamma < 1.0:
        raise ValueError(f"discount factor must lie in [0, 1), got {gamma}")
    return gamma


@dataclass(frozen=True)
class BernoulliArmState:
    """Conjugate state of a Bernoulli arm: Beta(sigma, n - sigma) belief.

    ``sigma`` is the Bayesian sum of rewards and ``n`` the Bayesian
    observation count; both are real and must satisfy 0 < sigma < n so that
    both Beta shape parameters are positive.
    """

    sigma: float
    n: float

    def __post_init__(self):
        if not (0.0 < self.sigma < self.n):
            raise ValueError(
                f"Bernoulli arm state requires 0 < sigma < n, got "
                f"sigma={self.sigma}, n={self.n}"
            )

    @property
    def mean(self) -> float:
        """Posterior mean reward sigma/n, always in (0, 1)."""
        return self.sigma / self.n


@dataclass(frozen=True)
class NormalArmState:
    """State of a Gaussian arm with known observation precision ``tau``.

    ``mu`` is the posterior mean, ``n`` the Bayesian observation count
    (posterior precision of the mean is ``n``), and ``tau`` the precision of
    individual observations.
    """

    mu: float
    n: float
    tau: float = 1.0

    def __post_init__(self):
        if not math.isfinite(self.mu):
            raise ValueError(f"mu must be finite, got {self.mu}")
        if not self.n > 0.0:
            raise ValueError(f"observation count n must be > 0, got {self.n}")
        if not self.tau > 0.0:
            raise ValueError(f"observation precision tau must be > 0, got {self.tau}")

    @property
    def sd(self) -> float:
        """Posterior standard deviation of the unknown mean, sqrt(1/n)."""
        return math.sqrt(1.0 / self.n)


@dataclass(frozen=True)
class CalibrationSpec:
    """Bisection interval [lower, upper] and required accuracy epsilon."""

    lower: float
    upper: float
    epsilon: float

    def __post_init__(self):
        if self.lower > self.upper:
            raise ValueError(
                f"calibration interval has lower > upper: "
                f"[{self.lower}, {self.upper}]"
            )
        if not self.epsilon > 0.0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon}")


@dataclass(frozen=True)
class IndexResult:
    """Final bracketing interval of a calibration run.

    ``evaluations`` counts the value-function sign evaluations performed by
    the bisection loop.  The reported index is the interval midpoint, which
    lies within epsilon/2 of the calibration point.
    """

    lower: float
    upper: float
    evaluations: int

    @property
    def midpoint(self) -> float:
        return 0.5 * (self.lower + self.upper)

    @property
    def width(self) -> float:
        return self.upper - self.lower


def required_iterations(lower: float, upper: float, epsilon: float) -> int:
    """Number of value evaluations bisection needs to reach width <= epsilon.

    Returns ceil(log(epsilon/(upper-lower)) / log(0.5)), floored at 0.  The
    quotient is snapped to the nearest integer when within 1e-9 of it so that
    exact powers of two do not round up spuriously.
    """
    if not epsilon > 0.0:
        raise ValueError(f"epsilon must be > 0, got {epsilon}")
    if upper < lower:
        raise ValueError(f"upper < lower: [{lower}, {upper}]")
    width = upper - lower
    if width <= epsilon:
        return 0
    q = math.log(epsilon / width) / math.log(0.5)
    nearest = round(q)
    if abs(q - nearest) < 1e-9:
        return max(int(nearest), 0)
    return max(math.ceil(q), 0)


def calibrate_index(
    sign_oracle: Callable[[float], float],
    spec: CalibrationSpec,
    *,
    validate_bounds: bool = False,
) -> IndexResult:
    """Bisect a non-increasing sign oracle down to an interval of width <= epsilon.

    ``sign_oracle`` maps lam to the non-negative relative OAB value: positive
    while the risky arm is preferred, zero once retirement is optimal.  The
    returned interval contains the calibration point min{lam : V(lam) = 0}
    provided the initial interval did.

    With ``validate_bounds=True`` the oracle is first evaluated at both
    endpoints (these calls are not counted in ``evaluations``); a
    non-positive value at ``lower`` or a positive value at ``upper`` raises
    :class:`BoundViolationError`.  Meant for caller-supplied intervals;
    analytically safe bounds skip it.
    """
    lower, upper, eps = spec.lower, spec.upper, spec.epsilon
    if validate_bounds and upper - lower > eps:
        if not sign_oracle(lower) > 0.0:
            raise BoundViolationError(
                f"oracle is not positive at lower bound {lower}; "
                f"the index may lie below the initial interval"
            )
        if sign_oracle(upper) > 0.0:
            raise BoundViolationError(
                f"oracle is positive at upper bound {upper}; "
                f"the index may lie above the initial interval"
            )
    evaluations = 0
    while upper - lower > eps:
        mid = 0.5 * (lower + upper)
        if mid <= lower or mid >= upper:
            # Interval no longer representable at double precision.
            break
        evaluations += 1
        if sign_oracle(mid) > 0.0:
            lower = mid
        else:
            upper = mid
    return IndexResult(lower=lower, upper=upper, evaluations=evaluations)


def _bisect_upper_root(excess: Callable[[float], float], lo: float, hi: float) -> float:
    """Upper end of a width-_BOUND_TOL interval around the root of a
    decreasing scalar function with excess(lo) >= 0 >= excess(hi)."""
    if excess(hi) > 0.0:
        return hi
    while hi - lo > _BOUND_TOL:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if excess(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return hi


def _beta_sf(x: float, a: float, b: float) -> float:
    """P(theta > x) for theta ~ Beta(a, b), with x clamped to [0, 1]."""
    if x <= 0.0:
        return 1.0
    if x >= 1.0:
        return 0.0
    return 1.0 - betainc(a, b, x)


def default_bounds_bmab(state: BernoulliArmState, gamma: float) -> Tuple[float, float]:
    """Initial calibration interval for a Bernoulli arm.

    Lower bound is the posterior mean (the index never falls below the
    immediate expected reward).  Upper bound is the single-stage-revelation
    value: the lam solving

        sigma/n - lam + (gamma/(1-gamma)) * E[(theta - lam)+] = 0

    under theta ~ Beta(sigma, n - sigma), clamped to 1.  This assumes all
    information arrives after one pull, which can only increase the value of
    continuing, so the solution bounds the index from above.
    """
    gamma = check_discount(gamma)
    mean = state.mean
    if gamma == 0.0:
        return mean, mean
    a = state.sigma
    b = state.n - state.sigma
    coef = gamma / (1.0 - gamma)

    def excess(lam: float) -> float:
        # E[(theta-lam)+] = mean*P(Beta(a+1,b) > lam) - lam*P(Beta(a,b) > lam)
        partial = mean * _beta_sf(lam, a + 1.0, b) - lam * _beta_sf(lam, a, b)
        return mean - lam + coef * partial

    upper = _bisect_upper_root(excess, mean, 1.0)
    return mean, min(upper, 1.0)


def gaussian_partial_expectation(mean: float, sd: float, lam: float) -> float:
    """E[(theta - lam)+] for theta ~ Normal(mean, sd**2), in closed form."""
    z = (mean - lam) / sd
    pdf = math.exp(-0.5 * z * z) / _SQRT_2PI
    return (mean - lam) * ndtr(z) + sd * pdf


def default_bounds_nmab(state: NormalArmState, gamma: float) -> Tuple[float, float]:
    """Initial calibration interval for a Gaussian arm.

    Lower bound is the posterior mean mu.  Upper bound solves the
    single-stage-revelation equation

        mu - lam + (gamma/(1-gamma)) * E[(theta - lam)+] = 0

    with theta ~ Normal(mu, 1/n), using the closed-form Gaussian partial
    expectation.  The root is bracketed in [mu, mu + 20*sd*gamma/(1-gamma)].
    """
    gamma = check_discount(gamma)
    mean = state.mu
    if gamma == 0.0:
        return mean, mean
    sd = state.sd
    coef = gamma / (1.0 - gamma)

    def excess(lam: float) -> float:
        return mean - lam + coef * gaussian_partial_expectation(mean, sd, lam)

    upper = _bisect_upper_root(excess, mean, mean + 20.0 * sd * coef)
    return mean, upper
