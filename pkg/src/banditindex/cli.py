"""Command-line front end.

Subcommands: ``bmab``, ``nmab``, ``whittle`` (single indices), ``table``
(bulk grids), ``convergence`` (benchmark error studies), ``simulate``
(policy comparison).  All numeric output uses 6 fixed decimals so repeated
runs are byte-identical; wall-time columns are the only nondeterministic
fields and are excluded from golden comparisons.
"""

from __future__ import annotations

import argparse
import os
import sys

from .core import BernoulliArmState, NormalArmState
from .bmab import BmabDpConfig, bmab_gi, default_bmab_horizon
from .nmab import NmabDpConfig, nmab_gi
from .whittle import whittle_fh_index
from .tables import (
    BmabGridSpec,
    NmabSequenceSpec,
    bmab_table,
    nmab_sequence,
    save_table,
)
from .sim import (
    GittinsPolicy,
    GreedyPolicy,
    MabInstance,
    RandomPolicy,
    run_policy_comparison,
)
from . import reports


def _add_gamma(p, default=0.9):
    p.add_argument("--gamma", type=float, default=default,
                   help=f"discount factor in [0,1) (default {default})")


def _add_epsilon(p, default):
    p.add_argument("--epsilon", type=float, default=default,
                   help=f"calibration accuracy, reward units (default {default})")


def _print_result(result):
    print(f"{result.midpoint:.6f}")
    print(f"interval [{result.lower:.6f}, {result.upper:.6f}]")
    print(f"evaluations {result.evaluations}")


def _write_output(text: str, path):
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="banditindex",
        description="Gittins and Whittle indices for Bernoulli and Gaussian bandit arms",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bmab", help="Gittins index of one Bernoulli arm")
    p.add_argument("--sigma", type=float, required=True,
                   help="Bayesian sum of rewards, 0 < sigma < n (dimensionless)")
    p.add_argument("--n", type=float, required=True,
                   help="Bayesian observation count (dimensionless)")
    _add_gamma(p)
    _add_epsilon(p, 5e-6)
    p.add_argument("--horizon", type=int, default=None,
                   help="DP stage count N (default 200 for gamma<=0.9, 800 for <=0.99)")

    p = sub.add_parser("nmab", help="Gittins index of one Gaussian arm")
    p.add_argument("--mu", type=float, required=True,
                   help="posterior mean (reward units)")
    p.add_argument("--n", type=float, required=True,
                   help="Bayesian observation count, > 0 (dimensionless)")
    p.add_argument("--tau", type=float, default=1.0,
                   help="observation precision, > 0 (inverse variance, default 1)")
    _add_gamma(p)
    _add_epsilon(p, 5e-5)
    p.add_argument("--horizon", type=int, default=140,
                   help="DP stage count N (default 140)")
    p.add_argument("--xi", type=float, default=3.0,
                   help="grid extent in posterior standard deviations (default 3)")
    p.add_argument("--delta", type=float, default=0.01,
                   help="grid mesh width, reward units (default 0.01)")
    p.add_argument("--direct", action="store_true",
                   help="calibrate at (mu, n, tau) directly instead of the canonical transform")

    p = sub.add_parser("whittle", help="finite-horizon Whittle index of one Bernoulli arm")
    p.add_argument("--sigma", type=float, required=True,
                   help="Bayesian sum of rewards, 0 < sigma < n (dimensionless)")
    p.add_argument("--n", type=float, required=True,
                   help="Bayesian observation count (dimensionless)")
    p.add_argument("--s", type=int, required=True,
                   help="plays remaining to the end of the horizon, >= 1")
    _add_gamma(p)
    _add_epsilon(p, 1e-6)

    p = sub.add_parser("table", help="bulk index table over a state grid")
    p.add_argument("family", choices=["bmab", "nmab"],
                   help="reward family of the table")
    p.add_argument("--sigma0", type=float, default=1.0,
                   help="prior sum of rewards (bmab; default 1)")
    p.add_argument("--n0", type=float, default=2.0,
                   help="prior observation count (default 2; nmab default 1)")
    p.add_argument("--tau", type=float, default=1.0,
                   help="observation precision (nmab; default 1)")
    p.add_argument("--T", type=int, default=100,
                   help="number of observations covered (default 100)")
    _add_gamma(p)
    p.add_argument("--epsilon", type=float, default=None,
                   help="calibration accuracy (default 1e-4 bmab, 5e-5 nmab)")
    p.add_argument("--horizon", type=int, default=None,
                   help="DP stage count N (defaults per family)")
    p.add_argument("--xi", type=float, default=3.0,
                   help="grid extent in posterior sds (nmab; default 3)")
    p.add_argument("--delta", type=float, default=0.01,
                   help="grid mesh width (nmab; default 0.01)")
    p.add_argument("--workers", type=int, default=os.cpu_count() or 1,
                   help="parallel row workers (default: available parallelism)")
    p.add_argument("--output", required=True,
                   help="CSV output path; metadata sidecar written at <output>.meta")

    p = sub.add_parser("convergence", help="error study against a benchmark run")
    p.add_argument("family", choices=["bmab", "nmab"],
                   help="reward family of the study")
    p.add_argument("--gamma", type=float, action="append", default=None,
                   help="discount factor; repeatable (default 0.9 and 0.99)")
    p.add_argument("--param", choices=["N", "delta", "xi"], default="N",
                   help="swept parameter (nmab only; default N)")
    p.add_argument("--value", type=float, action="append", default=None,
                   help="swept value; repeatable (defaults per family/param)")
    p.add_argument("--epsilon", type=float, default=None,
                   help="calibration accuracy (default 5e-6 bmab, 5e-5 nmab)")
    p.add_argument("--sigma", type=float, default=1.0,
                   help="arm state sigma (bmab; default 1)")
    p.add_argument("--n", type=float, default=2.0,
                   help="arm state n (bmab; default 2)")
    p.add_argument("--benchmark-horizon", type=int, default=2000,
                   help="benchmark N for bmab (default 2000)")
    p.add_argument("--output", default=None,
                   help="CSV output path (default: stdout)")

    p = sub.add_parser("simulate", help="Monte Carlo policy comparison")
    p.add_argument("--arms", type=int, default=2, help="number of arms (default 2)")
    p.add_argument("--sigma0", type=float, default=1.0,
                   help="Bernoulli prior sum of rewards, all arms (default 1)")
    p.add_argument("--n0", type=float, default=2.0,
                   help="prior observation count, all arms (default 2)")
    _add_gamma(p)
    p.add_argument("--replications", type=int, default=500,
                   help="Monte Carlo replications (default 500)")
    p.add_argument("--seed", type=int, default=0, help="root RNG seed (default 0)")
    p.add_argument("--sim-horizon", type=int, default=None,
                   help="truncation horizon T_sim (default: discounted tail < 1e-3)")
    p.add_argument("--policies", default="gi,greedy,random",
                   help="comma-separated subset of gi,greedy,random (default all)")
    p.add_argument("--table-epsilon", type=float, default=1e-3,
                   help="accuracy of the index table backing the gi policy (default 1e-3)")
    p.add_argument("--workers", type=int, default=1,
                   help="parallel replication workers (default 1)")
    p.add_argument("--output", default=None,
                   help="report CSV output path (default: stdout)")
    return parser


def _cmd_bmab(args) -> int:
    state = BernoulliArmState(args.sigma, args.n)
    horizon = args.horizon if args.horizon is not None else default_bmab_horizon(args.gamma)
    _print_result(bmab_gi(state, args.gamma, args.epsilon, BmabDpConfig(horizon)))
    return 0


def _cmd_nmab(args) -> int:
    state = NormalArmState(args.mu, args.n, args.tau)
    config = NmabDpConfig(args.horizon, args.xi, args.delta)
    method = "direct" if args.direct else "transform"
    _print_result(nmab_gi(state, args.gamma, args.epsilon, config, method=method))
    return 0


def _cmd_whittle(args) -> int:
    state = BernoulliArmState(args.sigma, args.n)
    _print_result(whittle_fh_index(state, args.gamma, args.s, args.epsilon))
    return 0


def _cmd_table(args) -> int:
    if args.family == "bmab":
        epsilon = args.epsilon if args.epsilon is not None else 1e-4
        spec = BmabGridSpec(args.sigma0, args.n0, args.T)
        dp = BmabDpConfig(args.horizon) if args.horizon is not None else None
        table = bmab_table(spec, args.gamma, epsilon, dp, workers=args.workers)
    else:
        epsilon = args.epsilon if args.epsilon is not None else 5e-5
        spec = NmabSequenceSpec(args.n0, args.tau, args.T, args.gamma)
        horizon = args.horizon if args.horizon is not None else 140
        dp = NmabDpConfig(horizon, args.xi, args.delta)
        table = nmab_sequence(spec, epsilon, dp)
    save_table(table, args.output)
    print(f"wrote {len(table.values)} states to {args.output}")
    return 0


def _cmd_convergence(args) -> int:
    gammas = args.gamma if args.gamma else [0.9, 0.99]
    if args.family == "bmab":
        epsilon = args.epsilon if args.epsilon is not None else 5e-6
        values = args.value if args.value is not None else list(reports.BMAB_SWEEP_DEFAULT)
        rows = reports.bmab_horizon_study(
            args.sigma, args.n, gammas, [int(v) for v in values],
            benchmark_horizon=args.benchmark_horizon, epsilon=epsilon,
        )
        text = reports.rows_to_csv(rows, "N", gammas, include_rrn=True)
    else:
        epsilon = args.epsilon if args.epsilon is not None else 5e-5
        values = (
            args.value
            if args.value is not None
            else list(reports.NMAB_SWEEPS_DEFAULT[args.param])
        )
        rows = reports.nmab_convergence_study(args.param, values, gammas, epsilon=epsilon)
        text = reports.rows_to_csv(rows, args.param, gammas)
    _write_output(text, args.output)
    return 0


def _cmd_simulate(args) -> int:
    names = [p.strip() for p in args.policies.split(",") if p.strip()]
    unknown = set(names) - {"gi", "greedy", "random"}
    if unknown:
        raise ValueError(f"unknown policies: {sorted(unknown)}")
    priors = tuple((args.sigma0, args.n0) for _ in range(args.arms))
    instance = MabInstance(
        k=args.arms, family="bernoulli", priors=priors,
        gamma=args.gamma, sim_horizon=args.sim_horizon,
    )
    policies = []
    for name in names:
        if name == "gi":
            spec = BmabGridSpec(args.sigma0, args.n0, instance.horizon)
            table = bmab_table(spec, args.gamma, args.table_epsilon, workers=args.workers)
            policies.append(GittinsPolicy(table))
        elif name == "greedy":
            policies.append(GreedyPolicy())
        else:
            policies.append(RandomPolicy(args.arms))
    report = run_policy_comparison(
        instance, policies, args.replications, args.seed, workers=args.workers
    )
    _write_output(report.to_csv(), args.output)
    return 0


_COMMANDS = {
    "bmab": _cmd_bmab,
    "nmab": _cmd_nmab,
    "whittle": _cmd_whittle,
    "table": _cmd_table,
    "convergence": _cmd_convergence,
    "simulate": _cmd_simulate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
