"""Gittins and Whittle indices for Bernoulli and Gaussian bandit arms.

Indices are computed by calibration: bisection on the safe-arm reward over
sign evaluations of a one-armed-bandit dynamic programme.
"""

from .core import (
    BernoulliArmState,
    BoundViolationError,
    CalibrationSpec,
    IndexResult,
    NormalArmState,
    calibrate_index,
    default_bounds_bmab,
    default_bounds_nmab,
    required_iterations,
)
from .bmab import (
    BmabDpConfig,
    bmab_gi,
    bmab_value_sign,
    default_bmab_horizon,
    max_remaining_reward,
)
from .nmab import (
    MuGrid,
    NmabDp,
    NmabDpConfig,
    TransitionRow,
    build_omega,
    nmab_gi,
    nmab_value_sign,
    transition_row,
)
from .whittle import whittle_fh_index, whittle_fh_value
from .tables import (
    BmabGridSpec,
    IndexTable,
    NmabSequenceSpec,
    OutOfRangeError,
    bmab_table,
    gamma_bracket,
    interpolate,
    load_table,
    nmab_sequence,
    prior_grid_tables,
    save_table,
)
from .sim import (
    CoverageError,
    GittinsPolicy,
    GreedyPolicy,
    MabInstance,
    RandomPolicy,
    SimulationReport,
    default_sim_horizon,
    run_policy_comparison,
)

__all__ = [
    "BernoulliArmState",
    "NormalArmState",
    "CalibrationSpec",
    "IndexResult",
    "BoundViolationError",
    "calibrate_index",
    "required_iterations",
    "default_bounds_bmab",
    "default_bounds_nmab",
    "BmabDpConfig",
    "bmab_gi",
    "bmab_value_sign",
    "default_bmab_horizon",
    "max_remaining_reward",
    "NmabDpConfig",
    "NmabDp",
    "MuGrid",
    "TransitionRow",
    "build_omega",
    "transition_row",
    "nmab_value_sign",
    "nmab_gi",
    "whittle_fh_value",
    "whittle_fh_index",
    "BmabGridSpec",
    "NmabSequenceSpec",
    "IndexTable",
    "OutOfRangeError",
    "bmab_table",
    "nmab_sequence",
    "interpolate",
    "gamma_bracket",
    "prior_grid_tables",
    "save_table",
    "load_table",
    "CoverageError",
    "MabInstance",
    "SimulationReport",
    "GittinsPolicy",
    "GreedyPolicy",
    "RandomPolicy",
    "run_policy_comparison",
    "default_sim_horizon",
]
