"""Discretized OAB value function and index for Gaussian arms with known precision.

The posterior-mean dimension is discretized onto the grid Omega (origin mu_a,
mesh delta, extent xi posterior standard deviations) and the observation-count
dimension advances by tau per stage.  Transitions below the grid retire (value
0, exact for the index); transitions above the grid are valued by a
closed-form no-further-learning tail expectation.

Propositions used for pruning: within a stage, value 0 at some grid point
implies 0 at every lower point; across stages, a positive value at the root
grid point at any later stage implies a positive root value, ending the
backward pass early.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import ndtr

from .core import (
    CalibrationSpec,
    IndexResult,
    NormalArmState,
    calibrate_index,
    check_discount,
    default_bounds_nmab,
)
from .bmab import MIN_EPSILON

__all__ = [
    "NmabDpConfig",
    "MuGrid",
    "TransitionRow",
    "build_omega",
    "transition_row",
    "NmabDp",
    "nmab_value_sign",
    "nmab_gi",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# Sweep block size for the within-stage top-down scan.
_SCAN_CHUNK = 64


@dataclass(frozen=True)
class NmabDpConfig:
    """Discretization of the Gaussian OAB.

    ``horizon``: number of stages N; ``xi``: grid extent in posterior
    standard deviations; ``delta``: mesh width; ``prune``: enable the
    monotonicity shortcuts (identical index results, fewer state
    evaluations).
    """

    horizon: int = 140
    xi: float = 3.0
    delta: float = 0.01
    prune: bool = True

    def __post_init__(self):
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if not self.xi > 0.0:
            raise ValueError(f"xi must be > 0, got {self.xi}")
        if not self.delta > 0.0:
            raise ValueError(f"delta must be > 0, got {self.delta}")


def _ceil_steps(x: float) -> int:
    """ceil(x) robust to floating-point representation of near-integers."""
    nearest = round(x)
    if abs(x - nearest) < 1e-9 * max(1.0, abs(x)):
        return int(nearest)
    return int(math.ceil(x))


@dataclass(frozen=True, eq=False)
class MuGrid:
    """Uniform posterior-mean grid: origin, origin+step, ..., origin+count*step."""

    origin: float
    step: float
    points: np.ndarray

    @property
    def top(self) -> float:
        return float(self.points[-1])

    def __len__(self) -> int:
        return len(self.points)


def build_omega(mu_a: float, n_a: float, xi: float, delta: float) -> MuGrid:
    """Grid Omega for an arm at (mu_a, n_a): ceil(xi*sigma/delta) steps of
    width delta upward from mu_a, with sigma = sqrt(1/n_a)."""
    if not n_a > 0.0:
        raise ValueError(f"n_a must be > 0, got {n_a}")
    if not (xi > 0.0 and delta > 0.0):
        raise ValueError(f"xi and delta must be > 0, got xi={xi}, delta={delta}")
    sigma = math.sqrt(1.0 / n_a)
    steps = _ceil_steps(xi * sigma / delta)
    points = mu_a + delta * np.arange(steps + 1)
    return MuGrid(origin=mu_a, step=delta, points=points)


@dataclass(frozen=True, eq=False)
class TransitionRow:
    """One-step distribution of the successor posterior mean over the grid.

    ``probabilities[j]`` is the mass of the cell [mu_j - delta/2,
    mu_j + delta/2); ``floor_mass`` and ``ceil_mass`` absorb the two tails.
    Entries and tails sum to 1 up to CDF round-off.
    """

    probabilities: np.ndarray
    floor_mass: float
    ceil_mass: float


def transition_row(mu: float, n: float, tau: float, grid: MuGrid) -> TransitionRow:
    """Transition probabilities from (mu, n) to (mu+, n+tau) for mu+ in the grid.

    Uses the predictive distribution Y ~ N(mu, 1/n + 1/tau) and the reward
    values y_l, y_u that move the posterior mean to the successor cell edges:

        y = (edge * (n + tau) - n * mu) / tau
    """
    if not (n > 0.0 and tau > 0.0):
        raise ValueError(f"n and tau must be > 0, got n={n}, tau={tau}")
    delta = grid.step
    pred_sd = math.sqrt(1.0 / n + 1.0 / tau)
    edges = np.concatenate((grid.points - 0.5 * delta, [grid.top + 0.5 * delta]))
    y_edges = (edges * (n + tau) - n * mu) / tau
    cdf = ndtr((y_edges - mu) / pred_sd)
    return TransitionRow(
        probabilities=np.diff(cdf),
        floor_mass=float(cdf[0]),
        ceil_mass=float(1.0 - cdf[-1]),
    )


class NmabDp:
    """Backward-induction engine for one arm at (mu_a, n_a) with fixed gamma, tau.

    Stage transition kernels depend only on the offset between grid points,
    so each stage needs a single kernel vector; these are precomputed once
    and shared by every lam evaluation of a calibration.

    ``floor_extension_steps`` extends the grid below mu_a (retirement then
    happens below the extended bottom); used to validate that flooring at
    mu_a itself is exact.
    """

    def __init__(
        self,
        mu_a: float,
        n_a: float,
        gamma: float,
        tau: float,
        config: NmabDpConfig,
        floor_extension_steps: int = 0,
    ):
        state = NormalArmState(mu_a, n_a, tau)  # validates
        self.state = state
        self.gamma = check_discount(gamma)
        self.config = config
        base = build_omega(mu_a, n_a, config.xi, config.delta)
        ext = int(floor_extension_steps)
        if ext < 0:
            raise ValueError("floor_extension_steps must be >= 0")
        if ext:
            points = (mu_a - ext * config.delta) + config.delta * np.arange(
                ext + len(base)
            )
            self.grid = MuGrid(origin=float(points[0]), step=config.delta, points=points)
        else:
            self.grid = base
        self.root_index = ext

        n_stages = config.horizon
        delta = config.delta
        size = len(self.grid)
        # Posterior-mean step scale per stage: sd of mu+ given (mu, n_s).
        ns = n_a + tau * np.arange(n_stages)
        self._step_sd = np.sqrt(tau / (ns * (ns + tau)))
        # Cell edges (d - 1/2)*delta for offsets d = -(size-1) .. size, giving
        # the 2*size-1 cell masses for offsets -(size-1) .. size-1.
        edge_offs = np.arange(-(size - 1), size + 1) - 0.5
        self._kernels = [
            np.diff(ndtr(edge_offs * delta / sd)) for sd in self._step_sd
        ]

    # -- value evaluation ---------------------------------------------------

    def value(self, lam: float, prune: Optional[bool] = None) -> float:
        """Approximate relative OAB value at the root.

        With pruning enabled only the sign of the result is meaningful (the
        backward pass may stop early at a later stage's positive root
        value); disable pruning for the fully evaluated root value.
        """
        return self.value_counted(lam, prune)[0]

    def value_counted(
        self, lam: float, prune: Optional[bool] = None
    ) -> Tuple[float, int]:
        """Like :meth:`value`, plus the number of Bellman state evaluations."""
        if not math.isfinite(lam):
            raise ValueError(f"lam must be finite, got {lam}")
        if prune is None:
            prune = self.config.prune
        return self._pruned(lam) if prune else self._full(lam)

    def _terminal(self, lam: float) -> np.ndarray:
        # No-further-learning perpetuity in stage-local units (the stage-N
        # discount is applied implicitly by the backward pass).
        scale = 1.0 / (1.0 - self.gamma) if self.gamma else 0.0
        return scale * np.maximum(self.grid.points - lam, 0.0)

    def _ceiling_term(self, stage: int, lam: float) -> np.ndarray:
        """Tail value of transitions above the grid top.

        Beyond-grid successors are treated as terminal states there: the
        no-further-learning perpetuity, integrated in closed form over
        mu+ > top + delta/2 (or mu+ > lam when lam exceeds that edge).
        """
        gamma = self.gamma
        disc = 1.0 / (1.0 - gamma) if gamma else 0.0
        if disc == 0.0:
            return np.zeros(len(self.grid))
        sd = self._step_sd[stage]
        cut = max(self.grid.top + 0.5 * self.grid.step, lam)
        z = (cut - self.grid.points) / sd
        pdf = np.exp(-0.5 * z * z) / _SQRT_2PI
        return disc * ((self.grid.points - lam) * ndtr(-z) + sd * pdf)

    def _stage_rows(self, windows, kernel, ceiling, lam, lo: int, hi: int):
        """Bellman values for grid rows [lo, hi) of one stage."""
        cont = windows[lo:hi] @ kernel + ceiling[lo:hi]
        return np.maximum(
            self.grid.points[lo:hi] - lam + self.gamma * cont, 0.0
        )

    def _full(self, lam: float) -> Tuple[float, int]:
        size = len(self.grid)
        values = self._terminal(lam)
        evaluated = 0
        for stage in range(self.config.horizon - 1, -1, -1):
            padded = np.zeros(3 * size - 2)
            padded[size - 1 : 2 * size - 1] = values
            windows = sliding_window_view(padded, 2 * size - 1)
            ceiling = self._ceiling_term(stage, lam)
            values = self._stage_rows(
                windows, self._kernels[stage], ceiling, lam, 0, size
            )
            evaluated += size
        return float(values[self.root_index]), evaluated

    def stage_values(self, lam: float) -> list:
        """Fully evaluated value vectors for stages 0..N (diagnostics only)."""
        size = len(self.grid)
        values = self._terminal(lam)
        out = [values]
        for stage in range(self.config.horizon - 1, -1, -1):
            padded = np.zeros(3 * size - 2)
            padded[size - 1 : 2 * size - 1] = values
            windows = sliding_window_view(padded, 2 * size - 1)
            ceiling = self._ceiling_term(stage, lam)
            values = self._stage_rows(
                windows, self._kernels[stage], ceiling, lam, 0, size
            )
            out.append(values)
        out.reverse()
        return out

    def _pruned(self, lam: float) -> Tuple[float, int]:
        size = len(self.grid)
        root = self.root_index
        values = self._terminal(lam)
        # Lowest grid index with a positive value (boundary of the zero prefix).
        boundary = int(np.searchsorted(self.grid.points, lam, side="right"))
        evaluated = 0
        if values[root] > 0.0:
            return float(values[root]), evaluated
        for stage in range(self.config.horizon - 1, 0, -1):
            padded = np.zeros(3 * size - 2)
            padded[size - 1 : 2 * size - 1] = values
            windows = sliding_window_view(padded, 2 * size - 1)
            kernel = self._kernels[stage]
            ceiling = self._ceiling_term(stage, lam)
            new_values = np.zeros(size)
            # States at or above the previous boundary cannot be skipped.
            new_values[boundary:] = self._stage_rows(
                windows, kernel, ceiling, lam, boundary, size
            )
            evaluated += size - boundary
            # Top-down scan below it; stop at the first retiring state.
            new_boundary = 0
            hi = boundary
            while hi > 0:
                lo = max(0, hi - _SCAN_CHUNK)
                chunk = self._stage_rows(windows, kernel, ceiling, lam, lo, hi)
                evaluated += hi - lo
                zeros = np.flatnonzero(chunk == 0.0)
                if zeros.size:
                    first_zero = lo + int(zeros[-1])
                    new_values[first_zero + 1 : hi] = chunk[zeros[-1] + 1 :]
                    new_boundary = first_zero + 1
                    break
                new_values[lo:hi] = chunk
                hi = lo
            values = new_values
            boundary = new_boundary
            if values[root] > 0.0:
                return float(values[root]), evaluated
        # Stage 0: only the root state matters.
        padded = np.zeros(3 * size - 2)
        padded[size - 1 : 2 * size - 1] = values
        windows = sliding_window_view(padded, 2 * size - 1)
        ceiling = self._ceiling_term(0, lam)
        root_value = self._stage_rows(
            windows, self._kernels[0], ceiling, lam, root, root + 1
        )
        evaluated += 1
        return float(root_value[0]), evaluated


def nmab_value_sign(
    mu_a: float,
    n_a: float,
    gamma: float,
    tau: float,
    lam: float,
    config: NmabDpConfig,
) -> float:
    """Approximate relative OAB value at the root for a Gaussian arm; with
    config.prune only the sign is meaningful."""
    return NmabDp(mu_a, n_a, gamma, tau, config).value(lam)


def nmab_gi(
    state: NormalArmState,
    gamma: float,
    epsilon: float,
    config: Optional[NmabDpConfig] = None,
    method: str = "transform",
) -> IndexResult:
    """Gittins index of a Gaussian arm by calibration.

    ``method="transform"`` (default) computes the canonical index
    nu(0, n/tau, gamma, tau=1) and maps it back by the invariance
    nu = mu + nu_canonical / sqrt(tau); for tau < 1 the canonical run
    tightens epsilon by sqrt(tau) since the map inflates errors.
    ``method="direct"`` calibrates at the given (mu, n, tau) without the
    transform, for cross-validation.
    """
    gamma = check_discount(gamma)
    if epsilon < MIN_EPSILON:
        raise ValueError(
            f"epsilon below the {MIN_EPSILON} floating-point floor: {epsilon}"
        )
    if config is None:
        config = NmabDpConfig()
    if gamma == 0.0:
        return IndexResult(lower=state.mu, upper=state.mu, evaluations=0)
    if method == "direct":
        lo, hi = default_bounds_nmab(state, gamma)
        dp = NmabDp(state.mu, state.n, gamma, state.tau, config)
        spec = CalibrationSpec(lower=lo, upper=hi, epsilon=epsilon)
        return calibrate_index(dp.value, spec)
    if method != "transform":
        raise ValueError(f"method must be 'transform' or 'direct', got {method!r}")
    root_tau = math.sqrt(state.tau)
    canonical = NormalArmState(0.0, state.n / state.tau, 1.0)
    eps_c = epsilon * root_tau if state.tau < 1.0 else epsilon
    lo, hi = default_bounds_nmab(canonical, gamma)
    dp = NmabDp(0.0, canonical.n, gamma, 1.0, config)
    spec = CalibrationSpec(lower=lo, upper=hi, epsilon=eps_c)
    result = calibrate_index(dp.value, spec)
    return IndexResult(
        lower=state.mu + result.lower / root_tau,
        upper=state.mu + result.upper / root_tau,
        evaluations=result.evaluations,
    )
