"""Constrained trajectory optimization with hybrid multiple-shooting DDP."""

from ._kernels import KERNEL_BACKEND
from .al_stage import ALConfig, ALState, solve_al
from .core import (
    ConfigError,
    ConstraintSet,
    CostModel,
    DynamicsModel,
    NoConstraints,
    NumericalError,
    ProblemDefinition,
    QuadraticCost,
    SolveResult,
    Status,
    Trajectory,
    max_violation,
    total_cost,
)
from .globalization import LineSearchState, RegState
from .hybrid import HMDDPConfig, initialize_nodes, solve, solve_al_only, solve_mddp_only
from .mddp import (
    MDDPConfig,
    ShootingStructure,
    backward_pass,
    forward_pass,
    initial_rollout,
    recompute_defects,
    solve_mddp,
)
from .rlb_stage import RLBConfig, RLBState, rlb_value, solve_rlb

__version__ = "0.1.0"

__all__ = [
    "ALConfig",
    "ALState",
    "ConfigError",
    "ConstraintSet",
    "CostModel",
    "DynamicsModel",
    "HMDDPConfig",
    "KERNEL_BACKEND",
    "LineSearchState",
    "MDDPConfig",
    "NoConstraints",
    "NumericalError",
    "ProblemDefinition",
    "QuadraticCost",
    "RLBConfig",
    "RLBState",
    "RegState",
    "ShootingStructure",
    "SolveResult",
    "Status",
    "Trajectory",
    "backward_pass",
    "forward_pass",
    "initial_rollout",
    "initialize_nodes",
    "max_violation",
    "recompute_defects",
    "rlb_value",
    "solve",
    "solve_al",
    "solve_al_only",
    "solve_mddp",
    "solve_mddp_only",
    "solve_rlb",
    "total_cost",
]
