"""Two-stage driver: coarse augmented-Lagrangian pass, then barrier refinement.

Unconstrained problems bypass both penalty stages and run the plain inner
solver. The refinement stage is warm-started with the coarse trajectory,
controls and feedback gains exactly as the first stage left them.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .al_stage import ALConfig, solve_al
from .core import (
    ConfigError,
    IterationRecord,
    ProblemDefinition,
    SolveResult,
    Status,
)
from .globalization import LineSearchState, RegState
from .mddp import MDDPConfig, MDDPEngine, initial_rollout, segment_starts
from .rlb_stage import RLBConfig, solve_rlb


@dataclass
class HMDDPConfig:
    """Composite parameter set of the full pipeline."""

    mddp: MDDPConfig = field(default_factory=MDDPConfig)
    al: ALConfig = field(default_factory=ALConfig)
    rlb: RLBConfig = field(default_factory=RLBConfig)
    ls: LineSearchState = field(default_factory=LineSearchState)
    reg: RegState = field(default_factory=RegState)
    init_mode: str = "interpolate"  # interpolate | file
    node_file: Optional[Union[str, Path]] = None

    def __post_init__(self):
        if self.init_mode not in ("interpolate", "file"):
            raise ConfigError(f"unknown node initialization mode {self.init_mode!r}")


def initialize_nodes(
    problem: ProblemDefinition,
    mode: str = "interpolate",
    node_file: Optional[Union[str, Path]] = None,
    default_controls: Optional[np.ndarray] = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Node states plus initial controls for the first rollout.

    Interpolation places node j at fraction j/(M-1) of the straight line
    from the initial to the goal state. File mode reads one
    whitespace/comma separated row per node; the first node is always
    overridden with the initial state.
    """
    n, M, N = problem.dynamics.n, problem.M, problem.N
    if mode == "interpolate":
        if M == 1:
            nodes = problem.x_init[None, :].copy()
        else:
            fractions = np.arange(M) / (M - 1)
            nodes = problem.x_init + fractions[:, None] * (problem.x_goal - problem.x_init)
    elif mode == "file":
        if node_file is None:
            raise ConfigError("node initialization mode 'file' requires a node file")
        nodes = np.atleast_2d(np.loadtxt(node_file, delimiter=","))
        if nodes.shape != (M, n):
            raise ConfigError(
                f"node file shape {nodes.shape} does not match (M, n) = ({M}, {n})"
            )
        nodes = nodes.copy()
        nodes[0] = problem.x_init
    else:
        raise ConfigError(f"unknown node initialization mode {mode!r}")
    if default_controls is None:
        controls = np.zeros((N, problem.dynamics.m))
    else:
        controls = np.asarray(default_controls, dtype=float)
        if controls.shape != (N, problem.dynamics.m):
            raise ConfigError("initial controls must have shape (N, m)")
    return nodes, controls


def solve(
    problem: ProblemDefinition,
    cfg: Optional[HMDDPConfig] = None,
    node_init: Optional[np.ndarray] = None,
    u_init: Optional[np.ndarray] = None,
) -> SolveResult:
    """Run the full pipeline and return the refined result.

    The iteration log concatenates both stages (records labelled by
    stage). A first stage that produces no usable iterate aborts with its
    own status; otherwise its best iterate seeds the refinement stage.
    """
    cfg = cfg or HMDDPConfig()
    if node_init is None or u_init is None:
        nodes, controls = initialize_nodes(problem, cfg.init_mode, cfg.node_file)
        if node_init is None:
            node_init = nodes
        if u_init is None:
            u_init = controls
    traj, shoot = initial_rollout(node_init, u_init, problem.dynamics, problem.dt)

    records: list[IterationRecord] = []
    timings: dict[str, float] = {}
    if problem.constraints.is_empty:
        t0 = time.perf_counter()
        engine = MDDPEngine(
            problem, problem.cost, traj, shoot, cfg.mddp, cfg.ls, cfg.reg, "mddp", records
        )
        status = engine.run()
        timings["mddp"] = time.perf_counter() - t0
        return SolveResult(engine.traj, status, records, timings)

    t0 = time.perf_counter()
    coarse, coarse_shoot = solve_al(
        problem, traj, shoot, cfg.al, cfg.mddp, cfg.ls, cfg.reg, records
    )
    timings["al"] = time.perf_counter() - t0
    if coarse.status is Status.NUMERICAL_ERROR:
        return SolveResult(coarse.trajectory, coarse.status, records, timings)

    t0 = time.perf_counter()
    refined, _ = solve_rlb(
        problem, coarse.trajectory, coarse_shoot, cfg.rlb, cfg.mddp, cfg.ls, cfg.reg, records
    )
    timings["rlb"] = time.perf_counter() - t0
    return SolveResult(refined.trajectory, refined.status, records, timings)


def solve_al_only(
    problem: ProblemDefinition,
    cfg: Optional[HMDDPConfig] = None,
    node_init: Optional[np.ndarray] = None,
    u_init: Optional[np.ndarray] = None,
) -> SolveResult:
    """Pure first-stage ablation: the coarse tolerance is tightened to the
    final feasibility tolerance and the outer budget to the inner solver's
    iteration cap, so the stage tries (and on hard problems fails) to reach
    full feasibility on its own."""
    cfg = cfg or HMDDPConfig()
    if node_init is None or u_init is None:
        nodes, controls = initialize_nodes(problem, cfg.init_mode, cfg.node_file)
        if node_init is None:
            node_init = nodes
        if u_init is None:
            u_init = controls
    traj, shoot = initial_rollout(node_init, u_init, problem.dynamics, problem.dt)
    records: list[IterationRecord] = []
    al_cfg = ALConfig(
        lam0=cfg.al.lam0, mu0=cfg.al.mu0, phi=cfg.al.phi,
        c_max=cfg.rlb.tol, max_outer=cfg.mddp.max_iter,
    )
    t0 = time.perf_counter()
    result, _ = solve_al(problem, traj, shoot, al_cfg, cfg.mddp, cfg.ls, cfg.reg, records)
    return SolveResult(result.trajectory, result.status, records, {"al": time.perf_counter() - t0})


def solve_mddp_only(
    problem: ProblemDefinition,
    cfg: Optional[HMDDPConfig] = None,
    node_init: Optional[np.ndarray] = None,
    u_init: Optional[np.ndarray] = None,
) -> SolveResult:
    """Constraint-blind ablation: plain inner solver on the raw objective."""
    cfg = cfg or HMDDPConfig()
    if node_init is None or u_init is None:
        nodes, controls = initialize_nodes(problem, cfg.init_mode, cfg.node_file)
        if node_init is None:
            node_init = nodes
        if u_init is None:
            u_init = controls
    traj, shoot = initial_rollout(node_init, u_init, problem.dynamics, problem.dt)
    records: list[IterationRecord] = []
    t0 = time.perf_counter()
    engine = MDDPEngine(
        problem, problem.cost, traj, shoot, cfg.mddp, cfg.ls, cfg.reg, "mddp", records
    )
    status = engine.run()
    return SolveResult(engine.traj, status, records, {"mddp": time.perf_counter() - t0})
