"""Distribution-matching policy optimization on NP-hard graph tasks."""

from .core import (
    Category,
    GenParams,
    Graph,
    Instance,
    InstanceError,
    ReferenceSolution,
    Solution,
    TaskKind,
    parse_instance,
    serialize_instance,
)
from .dmpo import (
    DmpoConfig,
    LossReport,
    TrajectoryGroup,
    dm_loss,
    dmpo_loss,
    group_advantages,
    grpo_loss,
    policy_distribution,
    q_lower_bound_holds,
    target_distribution,
)
from .generators import FilterBand, generate, make_prompt
from .metrics import EvalReport, quality_ratio, reward, success_rate
from .rng import SplitMix64, seeded_rng
from .solvers import SolverResult, solve_exact, solve_heuristic
from .verifiers import Verdict, brute_force_verify, verify

__all__ = [
    "Category",
    "DmpoConfig",
    "EvalReport",
    "FilterBand",
    "GenParams",
    "Graph",
    "Instance",
    "InstanceError",
    "LossReport",
    "ReferenceSolution",
    "Solution",
    "SolverResult",
    "SplitMix64",
    "TaskKind",
    "TrajectoryGroup",
    "Verdict",
    "brute_force_verify",
    "dm_loss",
    "dmpo_loss",
    "generate",
    "group_advantages",
    "grpo_loss",
    "make_prompt",
    "parse_instance",
    "policy_distribution",
    "q_lower_bound_holds",
    "quality_ratio",
    "reward",
    "seeded_rng",
    "serialize_instance",
    "solve_exact",
    "solve_heuristic",
    "success_rate",
    "target_distribution",
    "verify",
]

__version__ = "0.1.0"
