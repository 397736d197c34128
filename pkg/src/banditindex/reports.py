"""Convergence studies: index error against a high-accuracy benchmark while
one approximation parameter is relaxed.

Errors are reported as benchmark minus approximation, so horizon/extent
truncation shows up positive (underestimation) and coarser meshes negative
(overestimation).  Wall times are informational only.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Dict, List, Sequence

from .core import BernoulliArmState, NormalArmState, check_discount
from .bmab import BmabDpConfig, bmab_gi, max_remaining_reward
from .nmab import NmabDpConfig, nmab_gi

__all__ = [
    "ConvergenceRow",
    "bmab_horizon_study",
    "nmab_convergence_study",
    "rows_to_csv",
    "NMAB_BENCHMARK_CONFIG",
    "BMAB_SWEEP_DEFAULT",
    "NMAB_SWEEPS_DEFAULT",
]

NMAB_BENCHMARK_CONFIG = NmabDpConfig(horizon=200, xi=6.0, delta=0.005)

BMAB_SWEEP_DEFAULT = (20, 60, 100, 200, 400, 800)
NMAB_SWEEPS_DEFAULT = {
    "N": (20, 40, 60, 80, 100, 120, 140),
    "delta": (0.08, 0.04, 0.02, 0.01),
    "xi": (2.0, 2.5, 3.0),
}


@dataclass(frozen=True)
class ConvergenceRow:
    """One swept parameter value: per-gamma signed errors and extras."""

    param: str
    value: float
    time_s: float
    errors: Dict[float, float]
    extras: Dict[str, float]


def bmab_horizon_study(
    sigma: float,
    n: float,
    gammas: Sequence[float],
    horizons: Sequence[int],
    benchmark_horizon: int = 2000,
    epsilon: float = 5e-6,
) -> List[ConvergenceRow]:
    """Error of the horizon-truncated Bernoulli index for each N and gamma,
    with the maximum-remaining-reward bound alongside."""
    state = BernoulliArmState(sigma, n)
    gammas = [check_discount(g) for g in gammas]
    benchmarks = {
        g: bmab_gi(state, g, epsilon, BmabDpConfig(benchmark_horizon)).midpoint
        for g in gammas
    }
    rows = []
    for N in horizons:
        t0 = time.perf_counter()
        errors = {
            g: benchmarks[g] - bmab_gi(state, g, epsilon, BmabDpConfig(N)).midpoint
            for g in gammas
        }
        elapsed = time.perf_counter() - t0
        extras = {f"rrn_g{g:g}": max_remaining_reward(g, N) for g in gammas}
        rows.append(ConvergenceRow("N", float(N), elapsed, errors, extras))
    return rows


def nmab_convergence_study(
    param: str,
    values: Sequence[float],
    gammas: Sequence[float],
    benchmark: NmabDpConfig = NMAB_BENCHMARK_CONFIG,
    epsilon: float = 5e-5,
) -> List[ConvergenceRow]:
    """Error of the canonical Gaussian index nu(0, 1, gamma, 1) as one
    discretization parameter (N, delta or xi) is relaxed from the benchmark."""
    if param not in ("N", "delta", "xi"):
        raise ValueError(f"param must be 'N', 'delta' or 'xi', got {param!r}")
    state = NormalArmState(0.0, 1.0, 1.0)
    gammas = [check_discount(g) for g in gammas]
    benchmarks = {
        g: nmab_gi(state, g, epsilon, benchmark).midpoint for g in gammas
    }
    rows = []
    for value in values:
        if param == "N":
            config = replace(benchmark, horizon=int(value))
        elif param == "delta":
            config = replace(benchmark, delta=float(value))
        else:
            config = replace(benchmark, xi=float(value))
        t0 = time.perf_counter()
        errors = {
            g: benchmarks[g] - nmab_gi(state, g, epsilon, config).midpoint
            for g in gammas
        }
        elapsed = time.perf_counter() - t0
        rows.append(ConvergenceRow(param, float(value), elapsed, errors, {}))
    return rows


def rows_to_csv(
    rows: List[ConvergenceRow],
    param: str,
    gammas: Sequence[float],
    include_rrn: bool = False,
) -> str:
    """Fixed-format CSV: swept value, wall time, then per-gamma error (and,
    for horizon studies, RRN) columns in the given gamma order."""
    headers = [param, "time_s"]
    for g in gammas:
        headers.append(f"error_g{g:g}")
        if include_rrn:
            headers.append(f"rrn_g{g:g}")
    lines = [",".join(headers)]
    for row in rows:
        cells = [f"{row.value:g}", f"{row.time_s:.3f}"]
        for g in gammas:
            cells.append(f"{row.errors[g]:.6f}")
            if include_rrn:
                cells.append(f"{row.extras[f'rrn_g{g:g}']:.6f}")
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"
