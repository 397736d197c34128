"""Monte Carlo comparison of index policies against baselines on a Bayesian MAB.

Each replication draws the true arm parameters from their priors and
pre-draws every arm's reward stream indexed by pull count, so all policies
in a replication see identical randomness (common random numbers) and an
arm's posterior after a given action/outcome sequence is policy-invariant.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import check_discount
from .tables import IndexTable

__all__ = [
    "CoverageError",
    "MabInstance",
    "SimulationReport",
    "GittinsPolicy",
    "GreedyPolicy",
    "RandomPolicy",
    "run_policy_comparison",
    "default_sim_horizon",
]

# Truncation bias target: discounted tail below 1e-3 of the max single-step reward.
_TRUNCATION_FRACTION = 1e-3


class CoverageError(ValueError):
    """The index table does not cover a reachable arm state."""


def default_sim_horizon(gamma: float, max_reward: float = 1.0) -> int:
    """Smallest horizon T with gamma^T/(1-gamma) < 1e-3 * max_reward."""
    gamma = check_discount(gamma)
    if gamma == 0.0:
        return 1
    bound = _TRUNCATION_FRACTION * max_reward * (1.0 - gamma)
    return max(1, math.ceil(math.log(bound) / math.log(gamma)))


@dataclass(frozen=True)
class MabInstance:
    """A k-armed Bayesian bandit instance.

    ``priors`` holds one (sigma0, n0) pair per Bernoulli arm or one
    (mu0, n0, tau) triple per Normal arm.  ``sim_horizon`` defaults to the
    truncation rule above for Bernoulli rewards; Normal rewards are
    unbounded, so it must be given explicitly there.
    """

    k: int
    family: str
    priors: tuple
    gamma: float
    sim_horizon: Optional[int] = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if self.family not in ("bernoulli", "normal"):
            raise ValueError(f"family must be 'bernoulli' or 'normal', got {self.family!r}")
        if len(self.priors) != self.k:
            raise ValueError(f"need {self.k} priors, got {len(self.priors)}")
        check_discount(self.gamma)
        if self.family == "normal" and self.sim_horizon is None:
            raise ValueError(
                "normal rewards are unbounded; sim_horizon must be given explicitly"
            )

    @property
    def horizon(self) -> int:
        if self.sim_horizon is not None:
            return self.sim_horizon
        return default_sim_horizon(self.gamma)

    @property
    def truncation_bound(self) -> float:
        """gamma^T/(1-gamma): bound on the discounted reward ignored by truncation."""
        if self.gamma == 0.0:
            return 0.0
        return self.gamma**self.horizon / (1.0 - self.gamma)


class GittinsPolicy:
    """Pick the arm with the largest stored index, ties to the lowest arm.

    Requires an :class:`IndexTable` covering every reachable state; a miss
    raises :class:`CoverageError` naming the state (no silent fallback).
    """

    name = "gi"

    def __init__(self, table: IndexTable):
        self.table = table

    def select(self, posteriors, rng) -> int:
        best, best_index = 0, None
        for arm, key in enumerate(posteriors):
            try:
                value = self.table.values[key]
            except KeyError:
                raise CoverageError(
                    f"index table does not cover arm state {key}; "
                    f"extend the table's T"
                ) from None
            if best_index is None or value > best_index:
                best, best_index = arm, value
        return best


class GreedyPolicy:
    """Pick the arm with the largest posterior mean, ties to the lowest arm."""

    name = "greedy"

    def select(self, posteriors, rng) -> int:
        means = [self._mean(key) for key in posteriors]
        return int(np.argmax(means))

    @staticmethod
    def _mean(key) -> float:
        if len(key) == 2:  # (sigma, n)
            return key[0] / key[1]
        return key[0]  # (mu, n, tau)


class RandomPolicy:
    """Uniform-random arm choice from the policy's own deterministic stream."""

    name = "random"

    def __init__(self, k: int):
        self.k = k

    def select(self, posteriors, rng) -> int:
        return int(rng.integers(self.k))


@dataclass
class SimulationReport:
    """Per-policy Bayes-return estimates plus the raw per-replication returns."""

    policies: List[str]
    mean_return: Dict[str, float]
    std_error: Dict[str, float]
    replications: int
    seed: int
    truncation_bound: float
    returns: Dict[str, np.ndarray] = field(repr=False, default_factory=dict)

    def to_csv(self) -> str:
        lines = ["policy,mean_return,std_error,replications,seed"]
        for name in self.policies:
            lines.append(
                f"{name},{self.mean_return[name]:.6f},{self.std_error[name]:.6f},"
                f"{self.replications},{self.seed}"
            )
        return "\n".join(lines) + "\n"


def _replication(instance: MabInstance, policies, seed_seq) -> np.ndarray:
    """Discounted return of each policy on one draw of arms and rewards."""
    theta_rng, reward_rng, *policy_rngs = [
        np.random.default_rng(s) for s in seed_seq.spawn(2 + len(policies))
    ]
    T = instance.horizon
    k = instance.k
    if instance.family == "bernoulli":
        thetas = np.array(
            [theta_rng.beta(s0, n0 - s0) for (s0, n0) in instance.priors]
        )
        rewards = (reward_rng.random((k, T)) < thetas[:, None]).astype(float)
    else:
        thetas = np.array(
            [
                theta_rng.normal(mu0, math.sqrt(1.0 / n0))
                for (mu0, n0, _tau) in instance.priors
            ]
        )
        sds = np.array([math.sqrt(1.0 / tau) for (_mu0, _n0, tau) in instance.priors])
        rewards = thetas[:, None] + sds[:, None] * reward_rng.standard_normal((k, T))

    discounts = instance.gamma ** np.arange(T)
    out = np.empty(len(policies))
    for p, (policy, prng) in enumerate(zip(policies, policy_rngs)):
        posteriors = [tuple(map(float, prior)) for prior in instance.priors]
        pulls = [0] * k
        total = 0.0
        for t in range(T):
            arm = policy.select(posteriors, prng)
            y = rewards[arm][pulls[arm]]
            pulls[arm] += 1
            total += discounts[t] * y
            if instance.family == "bernoulli":
                sigma, n = posteriors[arm]
                posteriors[arm] = (sigma + y, n + 1.0)
            else:
                mu, n, tau = posteriors[arm]
                posteriors[arm] = ((n * mu + tau * y) / (n + tau), n + tau, tau)
        out[p] = total
    return out


def _chunk(args) -> np.ndarray:
    instance, policies, seeds = args
    return np.vstack([_replication(instance, policies, s) for s in seeds])


def run_policy_comparison(
    instance: MabInstance,
    policies: Sequence,
    replications: int,
    seed: int,
    workers: int = 1,
) -> SimulationReport:
    """Estimate each policy's Bayes return over common-random-number replications.

    Replication r's generators derive deterministically from (seed, r), so
    the report is identical for any worker count.
    """
    if replications < 1:
        raise ValueError(f"replications must be >= 1, got {replications}")
    names = [p.name for p in policies]
    if len(set(names)) != len(names):
        raise ValueError(f"duplicate policy names: {names}")
    seqs = np.random.SeedSequence(seed).spawn(replications)
    if workers > 1:
        chunks = np.array_split(np.arange(replications), workers * 4)
        tasks = [
            (instance, list(policies), [seqs[i] for i in idx])
            for idx in chunks
            if len(idx)
        ]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = np.vstack(list(pool.map(_chunk, tasks)))
    else:
        results = np.vstack([_replication(instance, policies, s) for s in seqs])
    means = results.mean(axis=0)
    stds = results.std(axis=0, ddof=1) if replications > 1 else np.zeros(len(names))
    errs = stds / math.sqrt(replications)
    return SimulationReport(
        policies=list(names),
        mean_return={n: float(m) for n, m in zip(names, means)},
        std_error={n: float(e) for n, e in zip(names, errs)},
        replications=replications,
        seed=seed,
        truncation_bound=instance.truncation_bound,
        returns={n: results[:, i].copy() for i, n in enumerate(names)},
    )
