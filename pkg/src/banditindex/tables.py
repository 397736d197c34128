"""Bulk index tables over arm-state grids, with warm starts, parallel rows,
monotone interpolation for off-grid queries, and CSV persistence.

Work is partitioned statically by success count (one Sigma-row per task),
each row processed in ascending n so the previous index seeds the next
state's upper bound.  Partitioning never crosses rows, so results are
bit-identical for any worker count.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .core import BernoulliArmState, IndexResult, NormalArmState, check_discount
from .bmab import BmabDpConfig, bmab_gi, default_bmab_horizon
from .nmab import NmabDpConfig, nmab_gi

__all__ = [
    "OutOfRangeError",
    "BmabGridSpec",
    "NmabSequenceSpec",
    "IndexTable",
    "InterpolationResult",
    "bmab_table",
    "nmab_sequence",
    "interpolate",
    "gamma_bracket",
    "prior_grid_tables",
    "save_table",
    "load_table",
]

FORMAT_VERSION = 1


class OutOfRangeError(ValueError):
    """Query lies outside the monotone hull of the table keys."""


@dataclass(frozen=True)
class BmabGridSpec:
    """Bernoulli state grid {(sigma0+i, n0+j): 0 <= i <= j <= T}."""

    sigma0: float
    n0: float
    T: int

    def __post_init__(self):
        if not (0.0 < self.sigma0 < self.n0):
            raise ValueError(
                f"prior must satisfy 0 < sigma0 < n0, got ({self.sigma0}, {self.n0})"
            )
        if self.T < 0:
            raise ValueError(f"T must be >= 0, got {self.T}")

    def states(self) -> List[Tuple[float, float]]:
        return [
            (self.sigma0 + i, self.n0 + j)
            for i in range(self.T + 1)
            for j in range(i, self.T + 1)
        ]


@dataclass(frozen=True)
class NmabSequenceSpec:
    """Canonical-argument sequence n0/tau, n0/tau + 1, ..., n0/tau + T."""

    n0: float
    tau: float
    T: int
    gamma: float

    def __post_init__(self):
        if not (self.n0 > 0.0 and self.tau > 0.0):
            raise ValueError(
                f"n0 and tau must be > 0, got ({self.n0}, {self.tau})"
            )
        if self.T < 0:
            raise ValueError(f"T must be >= 0, got {self.T}")
        check_discount(self.gamma)

    def canonical_ns(self) -> List[float]:
        return [self.n0 / self.tau + k for k in range(self.T + 1)]


@dataclass
class IndexTable:
    """Computed index midpoints keyed by arm state, with provenance metadata.

    ``kind`` is "bmab" (keys (sigma, n)) or "nmab" (keys (n,), canonical
    tau=1 values at mu=0).
    """

    kind: str
    values: Dict[tuple, float]
    meta: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("bmab", "nmab"):
            raise ValueError(f"kind must be 'bmab' or 'nmab', got {self.kind!r}")

    @property
    def gamma(self) -> float:
        return float(self.meta["gamma"])

    @property
    def epsilon(self) -> float:
        return float(self.meta["epsilon"])

    def sorted_items(self) -> List[Tuple[tuple, float]]:
        return sorted(self.values.items())


def _meta_number(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def _bmab_row(args) -> List[Tuple[tuple, IndexResult]]:
    """All states of one Sigma-row, ascending n, warm-started upper bounds."""
    spec, gamma, epsilon, horizon, i = args
    sigma = spec.sigma0 + i
    config = BmabDpConfig(horizon)
    out = []
    prev_upper: Optional[float] = None
    for j in range(i, spec.T + 1):
        state = BernoulliArmState(sigma, spec.n0 + j)
        try:
            if prev_upper is None:
                result = bmab_gi(state, gamma, epsilon, config)
            else:
                # The index is non-increasing in n at fixed sigma, so the
                # previous interval's upper end still bounds this state.
                result = bmab_gi(
                    state, gamma, epsilon, config, bounds=(state.mean, prev_upper)
                )
        except ValueError as exc:
            raise ValueError(
                f"table generation failed at state (sigma={sigma}, n={state.n}): {exc}"
            ) from exc
        prev_upper = result.upper
        out.append(((sigma, state.n), result))
    return out


def bmab_table(
    spec: BmabGridSpec,
    gamma: float,
    epsilon: float,
    dp: Optional[BmabDpConfig] = None,
    workers: int = 1,
) -> IndexTable:
    """Gittins indices for every state of the grid.

    Rows (fixed sigma) are independent tasks; with ``workers`` > 1 they run
    in separate processes.  Output is identical for any worker count.
    """
    gamma = check_discount(gamma)
    horizon = dp.horizon if dp is not None else default_bmab_horizon(gamma)
    tasks = [(spec, gamma, epsilon, horizon, i) for i in range(spec.T + 1)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_bmab_row, tasks))
    else:
        rows = [_bmab_row(t) for t in tasks]
    values = {key: res.midpoint for row in rows for key, res in row}
    meta = {
        "format_version": str(FORMAT_VERSION),
        "kind": "bmab",
        "gamma": _meta_number(gamma),
        "epsilon": _meta_number(epsilon),
        "N": str(horizon),
        "sigma0": _meta_number(float(spec.sigma0)),
        "n0": _meta_number(float(spec.n0)),
        "T": str(spec.T),
    }
    return IndexTable(kind="bmab", values=values, meta=meta)


def nmab_sequence(
    spec: NmabSequenceSpec,
    epsilon: float,
    dp: Optional[NmabDpConfig] = None,
) -> IndexTable:
    """Canonical indices nu(0, n, gamma, 1) along the arm's n-sequence.

    Values are non-increasing in n, so each run seeds the next one's upper
    bound.  Consumers map back to arm coordinates via
    nu = mu + value/sqrt(tau).
    """
    if dp is None:
        dp = NmabDpConfig()
    gamma = spec.gamma
    values: Dict[tuple, float] = {}
    prev_upper: Optional[float] = None
    for n in spec.canonical_ns():
        state = NormalArmState(0.0, n, 1.0)
        result = nmab_gi(state, gamma, epsilon, dp)
        if prev_upper is not None and result.lower > prev_upper:
            raise RuntimeError(
                f"index sequence not non-increasing at n={n}; "
                f"got interval above previous upper bound {prev_upper}"
            )
        prev_upper = result.upper
        values[(n,)] = result.midpoint
    meta = {
        "format_version": str(FORMAT_VERSION),
        "kind": "nmab",
        "gamma": _meta_number(gamma),
        "epsilon": _meta_number(epsilon),
        "N": str(dp.horizon),
        "xi": _meta_number(dp.xi),
        "delta": _meta_number(dp.delta),
        "n0": _meta_number(float(spec.n0)),
        "tau": _meta_number(float(spec.tau)),
        "T": str(spec.T),
    }
    return IndexTable(kind="nmab", values=values, meta=meta)


@dataclass(frozen=True)
class InterpolationResult:
    """Rigorous bracket [lower, upper] plus a linear point estimate.

    ``approximate`` marks the large-n fallback where the posterior mean is
    returned instead of a table bracket.
    """

    lower: float
    upper: float
    estimate: float
    approximate: bool = False

    @property
    def width(self) -> float:
        return self.upper - self.lower


def _bmab_interpolate(table: IndexTable, sigma: float, n: float) -> InterpolationResult:
    keys = table.values.keys()
    if (sigma, n) in table.values:
        v = table.values[(sigma, n)]
        return InterpolationResult(v, v, v, False)
    n_values = sorted({k[1] for k in keys})
    if n > n_values[-1]:
        # Tight posteriors: the mean approximates the index; flagged, not silent.
        mean = sigma / n
        return InterpolationResult(mean, mean, mean, True)
    if n < n_values[0]:
        raise OutOfRangeError(f"query n={n} below the table range {n_values[0]}")
    n_lo = max(v for v in n_values if v <= n)
    n_hi = min(v for v in n_values if v >= n)
    mean = sigma / n

    def bracket_state(n_grid: float, side: str) -> Tuple[float, float]:
        # Upper bound needs a grid mean >= query mean at smaller n; lower
        # bound a grid mean <= query mean at larger n.
        sigmas = sorted(k[0] for k in keys if k[1] == n_grid)
        target = mean * n_grid
        if side == "upper":
            cands = [s for s in sigmas if s >= target - 1e-12]
        else:
            cands = [s for s in sigmas if s <= target + 1e-12]
        if not cands:
            raise OutOfRangeError(
                f"query (sigma={sigma}, n={n}) has no {side}-bracketing state "
                f"in the row n={n_grid}"
            )
        return ((min(cands) if side == "upper" else max(cands)), n_grid)

    lo_state = bracket_state(n_hi, "lower")
    hi_state = bracket_state(n_lo, "upper")
    lower = table.values[lo_state]
    upper = table.values[hi_state]
    m_lo = lo_state[0] / lo_state[1]
    m_hi = hi_state[0] / hi_state[1]
    if m_hi > m_lo:
        t = min(max((mean - m_lo) / (m_hi - m_lo), 0.0), 1.0)
    else:
        t = 0.5
    return InterpolationResult(lower, upper, lower + t * (upper - lower), False)


def _nmab_interpolate(table: IndexTable, n: float) -> InterpolationResult:
    if (n,) in table.values:
        v = table.values[(n,)]
        return InterpolationResult(v, v, v, False)
    ns = sorted(k[0] for k in table.values)
    if n > ns[-1]:
        return InterpolationResult(0.0, 0.0, 0.0, True)
    if n < ns[0]:
        raise OutOfRangeError(f"query n={n} below the table range {ns[0]}")
    n_lo = max(v for v in ns if v <= n)
    n_hi = min(v for v in ns if v >= n)
    # Canonical index is non-increasing in n.
    lower = table.values[(n_hi,)]
    upper = table.values[(n_lo,)]
    t = (n - n_lo) / (n_hi - n_lo) if n_hi > n_lo else 0.5
    return InterpolationResult(lower, upper, upper + t * (lower - upper), False)


def interpolate(table: IndexTable, query: tuple) -> InterpolationResult:
    """Monotone bracket and point estimate for an off-grid arm state.

    Bernoulli tables: query (sigma, n).  The bracket uses the two ordering
    relations (index increasing in sigma at fixed n, non-increasing under
    proportional scaling of (sigma, n)): the lower endpoint comes from the
    adjacent larger-n row at a grid mean <= the query mean, the upper from
    the smaller-n row at a grid mean >= it.  Exact key hits return the
    stored value with a zero-width interval; n beyond the table range falls
    back to the posterior mean, flagged ``approximate``.
    """
    if table.kind == "bmab":
        sigma, n = query
        return _bmab_interpolate(table, float(sigma), float(n))
    (n,) = query
    return _nmab_interpolate(table, float(n))


def gamma_bracket(
    table_low: IndexTable, table_high: IndexTable, query: tuple
) -> Tuple[float, float]:
    """[nu(gamma1), nu(gamma2)] bracketing the index at any gamma between.

    Both tables must share the same key grid; the index is non-decreasing
    in gamma.
    """
    if table_low.values.keys() != table_high.values.keys():
        raise ValueError("gamma bracket requires identical state grids")
    if table_low.gamma > table_high.gamma:
        raise ValueError(
            f"tables out of order: gamma {table_low.gamma} > {table_high.gamma}"
        )
    if query in table_low.values:
        return table_low.values[query], table_high.values[query]
    lo = interpolate(table_low, query)
    hi = interpolate(table_high, query)
    return lo.lower, hi.upper


def prior_grid_tables(
    sigma0_values: Sequence[float],
    n0_values: Sequence[float],
    T: int,
    gamma: float,
    epsilon: float,
    dp: Optional[BmabDpConfig] = None,
    workers: int = 1,
) -> Dict[Tuple[float, float], IndexTable]:
    """One table per (sigma0, n0) prior pair; invalid pairs are skipped.

    Queries for an arbitrary prior pick the matching table and defer to
    :func:`interpolate`.
    """
    tables = {}
    for n0 in n0_values:
        for s0 in sigma0_values:
            if not 0.0 < s0 < n0:
                continue
            spec = BmabGridSpec(s0, n0, T)
            tables[(s0, n0)] = bmab_table(spec, gamma, epsilon, dp, workers)
    return tables


# -- persistence ------------------------------------------------------------

def _write_table(table: IndexTable, fh: io.TextIOBase) -> None:
    header = "sigma,n,gi" if table.kind == "bmab" else "n,gi"
    fh.write(header + "\n")
    for key, value in table.sorted_items():
        fh.write(",".join(f"{k:.6f}" for k in key) + f",{value:.6f}\n")


def save_table(table: IndexTable, path) -> str:
    """Write the table CSV at ``path`` and its metadata sidecar at
    ``path + '.meta'``; returns the sidecar path."""
    path = str(path)
    with open(path, "w") as fh:
        _write_table(table, fh)
    meta_path = path + ".meta"
    with open(meta_path, "w") as fh:
        for key, value in table.meta.items():
            fh.write(f"{key}={value}\n")
    return meta_path


def load_table(path) -> IndexTable:
    path = str(path)
    with open(path + ".meta") as fh:
        meta = {}
        for line in fh:
            line = line.strip()
            if line:
                key, _, value = line.partition("=")
                meta[key] = value
    kind = meta["kind"]
    values: Dict[tuple, float] = {}
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        key_width = len(header) - 1
        for line in fh:
            parts = line.strip().split(",")
            if not parts or parts == [""]:
                continue
            key = tuple(float(x) for x in parts[:key_width])
            values[key] = float(parts[key_width])
    return IndexTable(kind=kind, values=values, meta=meta)
