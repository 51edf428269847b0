"""Stage 2: inner solver on a relaxed log-barrier objective.

The barrier is the negative log inside the margin and a C2 quadratic
extension beyond it, so it stays defined for violated constraints. The
weight and the relaxation threshold decay geometrically between inner
solves; the stage ends once the trajectory is feasible to tolerance and
the barrier weight has shrunk enough for its bias to be negligible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import (
    ConstraintSet,
    CostModel,
    IterationRecord,
    ProblemDefinition,
    SolveResult,
    Status,
    Trajectory,
    max_violation,
)
from .globalization import LineSearchState, RegState
from .mddp import MDDPConfig, MDDPEngine, ShootingStructure


@dataclass(frozen=True)
class RLBState:
    """Barrier weight psi, relaxation threshold delta and their decay laws."""

    psi: float = 0.1
    delta: float = 1e-3
    omega1: float = 0.5
    omega2: float = 0.5
    delta_min: float = 1e-9
    tol: float = 1e-8

    def __post_init__(self):
        if self.psi <= 0 or self.delta <= 0:
            raise ValueError("psi and delta must be positive")


@dataclass
class RLBConfig:
    psi0: float = 0.1
    delta0: float = 1e-3
    omega1: float = 0.5
    omega2: float = 0.5
    delta_min: float = 1e-9
    tol: float = 1e-8
    psi_stop: float = 1e-7
    max_outer: int = 30

    def initial_state(self) -> RLBState:
        return RLBState(self.psi0, self.delta0, self.omega1, self.omega2, self.delta_min, self.tol)


def rlb_value(g: Union[float, np.ndarray], psi: float, delta: float) -> Union[float, np.ndarray]:
    """Barrier value: -psi*ln(-g) inside the margin, quadratic extension beyond.

    Total in g (defined for violated constraints); twice continuously
    differentiable across the switch at -g = delta.
    """
    z = -np.asarray(g, dtype=float)
    t = (z - 2.0 * delta) / delta
    quad = 0.5 * (t * t - 1.0) - math.log(delta)
    with np.errstate(invalid="ignore", divide="ignore"):
        log_branch = -np.log(np.where(z >= delta, z, 1.0))
    out = psi * np.where(z >= delta, log_branch, quad)
    if np.isscalar(g) or np.ndim(g) == 0:
        return float(out)
    return out


def rlb_grad_hess(g: Union[float, np.ndarray], psi: float, delta: float):
    """First and second derivative of the barrier with respect to g."""
    z = -np.asarray(g, dtype=float)
    on_log = z >= delta
    zsafe = np.where(on_log, z, 1.0)
    grad = np.where(on_log, psi / zsafe, psi * (2.0 * delta - z) / (delta * delta))
    hess = np.where(on_log, psi / (zsafe * zsafe), psi / (delta * delta))
    if np.isscalar(g) or np.ndim(g) == 0:
        return float(grad), float(hess)
    return grad, hess


def rlb_derivatives(
    g: np.ndarray, gx: np.ndarray, gu: np.ndarray, psi: float, delta: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Chain-rule contributions (lx, lu, lxx, luu, lux), Gauss-Newton Hessians."""
    grad, hess = rlb_grad_hess(g, psi, delta)
    lx = gx.T @ grad
    lu = gu.T @ grad
    hgx = hess[:, None] * gx
    lxx = gx.T @ hgx
    luu = gu.T @ (hess[:, None] * gu)
    lux = gu.T @ hgx
    return lx, lu, lxx, luu, lux


def update_rlb_params(state: RLBState) -> RLBState:
    """psi <- omega1*psi, delta <- max(delta_min, omega2*delta)."""
    return RLBState(
        state.omega1 * state.psi,
        max(state.delta_min, state.omega2 * state.delta),
        state.omega1,
        state.omega2,
        state.delta_min,
        state.tol,
    )


class RLBObjective(CostModel):
    """Base cost plus barrier terms for every constraint row."""

    def __init__(self, cost: CostModel, cons: ConstraintSet, state: RLBState):
        self.cost = cost
        self.cons = cons
        self.state = state

    def running(self, x, u, k):
        base = self.cost.running(x, u, k)
        if self.cons.n_running == 0:
            return base
        g = self.cons.evaluate(x, u, k)
        return base + float(np.sum(rlb_value(g, self.state.psi, self.state.delta)))

    def terminal(self, x):
        base = self.cost.terminal(x)
        if self.cons.n_terminal == 0:
            return base
        g = self.cons.evaluate_terminal(x)
        return base + float(np.sum(rlb_value(g, self.state.psi, self.state.delta)))

    def running_derivatives(self, x, u, k):
        lx, lu, lxx, luu, lux = self.cost.running_derivatives(x, u, k)
        if self.cons.n_running == 0:
            return lx, lu, lxx, luu, lux
        g = self.cons.evaluate(x, u, k)
        gx, gu = self.cons.jacobians(x, u, k)
        bx, bu, bxx, buu, bux = rlb_derivatives(g, gx, gu, self.state.psi, self.state.delta)
        return lx + bx, lu + bu, lxx + bxx, luu + buu, lux + bux

    def terminal_derivatives(self, x):
        lfx, lfxx = self.cost.terminal_derivatives(x)
        if self.cons.n_terminal == 0:
            return lfx, lfxx
        g = self.cons.evaluate_terminal(x)
        gx = self.cons.terminal_jacobian(x)
        grad, hess = rlb_grad_hess(g, self.state.psi, self.state.delta)
        return lfx + gx.T @ grad, lfxx + gx.T @ (hess[:, None] * gx)


def solve_rlb(
    problem: ProblemDefinition,
    warm_traj: Trajectory,
    shoot: ShootingStructure,
    rlb_cfg: Optional[RLBConfig] = None,
    mddp_cfg: Optional[MDDPConfig] = None,
    ls: Optional[LineSearchState] = None,
    reg: Optional[RegState] = None,
    records: Optional[list[IterationRecord]] = None,
) -> tuple[SolveResult, ShootingStructure]:
    """Repeat {inner solve to convergence; decay barrier parameters}.

    Terminates once the worst violation is within tolerance, the inner
    solve converged, and the barrier weight has decayed below psi_stop
    (so the barrier no longer biases the solution meaningfully).
    """
    rlb_cfg = rlb_cfg or RLBConfig()
    mddp_cfg = mddp_cfg or MDDPConfig()
    cons = problem.constraints
    objective = RLBObjective(problem.cost, cons, rlb_cfg.initial_state())
    engine = MDDPEngine(
        problem, objective, warm_traj, shoot, mddp_cfg, ls or LineSearchState(),
        reg or RegState(), "rlb", records,
        extra_fields=lambda: {"psi": objective.state.psi, "delta": objective.state.delta},
    )
    status = Status.MAX_ITERATIONS
    best: Optional[tuple[float, float, Trajectory, ShootingStructure]] = None
    for _ in range(rlb_cfg.max_outer):
        inner_status = engine.run()
        if inner_status is Status.NUMERICAL_ERROR:
            status = inner_status
            break
        viol = max_violation(engine.traj, cons)
        key = (max(viol, 0.0), engine.cost)
        if best is None or key < best[:2]:
            best = (*key, engine.traj, engine.shoot)
        if (
            inner_status is Status.CONVERGED
            and viol <= rlb_cfg.tol
            and objective.state.psi <= rlb_cfg.psi_stop
        ):
            status = Status.CONVERGED
            break
        objective.state = update_rlb_params(objective.state)
        engine.refresh_cost()
    traj, final_shoot = engine.traj, engine.shoot
    if status is Status.MAX_ITERATIONS and best is not None:
        _, _, traj, final_shoot = best
    return SolveResult(traj, status, engine.records), final_shoot
