"""Stage 1: inner solver on the augmented-Lagrangian objective.

Violated constraints are penalized through h = max(0, g) with per-step
multipliers and penalty weights; multipliers are updated after each
accepted inner iteration and the penalty grows geometrically.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

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


@dataclass
class ALConfig:
    lam0: float = 0.0
    mu0: float = 1.0
    phi: float = 10.0
    c_max: float = 1e-2
    max_outer: int = 30
    #: Penalty weights scale by phi only while the violation fails to shrink
    #: below this fraction of its value at the previous scaling.
    progress: float = 0.25


@dataclass(frozen=True)
class ALState:
    """Multipliers (per step and terminal) and per-step penalty weights."""

    lam: np.ndarray  # (N, q)
    lam_terminal: np.ndarray  # (q_N,)
    mu: np.ndarray  # (N+1,), index N is the terminal penalty
    phi: float

    @staticmethod
    def initial(N: int, cons: ConstraintSet, cfg: ALConfig) -> "ALState":
        return ALState(
            lam=np.full((N, cons.n_running), cfg.lam0),
            lam_terminal=np.full(cons.n_terminal, cfg.lam0),
            mu=np.full(N + 1, cfg.mu0),
            phi=cfg.phi,
        )

    def lambda_max(self) -> float:
        worst = 0.0
        if self.lam.size:
            worst = float(np.max(self.lam))
        if self.lam_terminal.size:
            worst = max(worst, float(np.max(self.lam_terminal)))
        return worst


def al_cost_terms(
    x: np.ndarray, u: np.ndarray, k: int, cons: ConstraintSet, al: ALState
) -> tuple[float, np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Penalty value and its derivative contributions at one step.

    Components are active iff g > 0 strictly; inactive rows contribute
    nothing (the multiplier term is clamped with h). Hessians use the
    Gauss-Newton form: no second derivatives of g.
    """
    g = cons.evaluate(x, u, k)
    h = np.maximum(0.0, g)
    lam, mu = al.lam[k], al.mu[k]
    penalty = float(lam @ h + 0.5 * mu * (h @ h))
    gx, gu = cons.jacobians(x, u, k)
    active = g > 0.0
    hx = np.where(active[:, None], gx, 0.0)
    hu = np.where(active[:, None], gu, 0.0)
    w = lam + mu * h
    lx = hx.T @ w
    lu = hu.T @ w
    lxx = mu * (hx.T @ hx)
    luu = mu * (hu.T @ hu)
    lux = mu * (hu.T @ hx)
    return penalty, lx, lu, lxx, luu, lux


class ALObjective(CostModel):
    """Base cost plus the augmented-Lagrangian penalty terms."""

    def __init__(self, cost: CostModel, cons: ConstraintSet, state: ALState):
        self.cost = cost
        self.cons = cons
        self.state = state

    def running(self, x, u, k):
        base = self.cost.running(x, u, k)
        if self.cons.n_running == 0:
            return base
        g = self.cons.evaluate(x, u, k)
        h = np.maximum(0.0, g)
        return base + float(self.state.lam[k] @ h + 0.5 * self.state.mu[k] * (h @ h))

    def terminal(self, x):
        base = self.cost.terminal(x)
        if self.cons.n_terminal == 0:
            return base
        h = np.maximum(0.0, self.cons.evaluate_terminal(x))
        lam, mu = self.state.lam_terminal, self.state.mu[-1]
        return base + float(lam @ h + 0.5 * mu * (h @ h))

    def running_derivatives(self, x, u, k):
        lx, lu, lxx, luu, lux = self.cost.running_derivatives(x, u, k)
        if self.cons.n_running == 0:
            return lx, lu, lxx, luu, lux
        _, px, pu, pxx, puu, pux = al_cost_terms(x, u, k, self.cons, self.state)
        return lx + px, lu + pu, lxx + pxx, luu + puu, lux + pux

    def terminal_derivatives(self, x):
        lfx, lfxx = self.cost.terminal_derivatives(x)
        if self.cons.n_terminal == 0:
            return lfx, lfxx
        g = self.cons.evaluate_terminal(x)
        h = np.maximum(0.0, g)
        gx = self.cons.terminal_jacobian(x)
        hx = np.where((g > 0.0)[:, None], gx, 0.0)
        lam, mu = self.state.lam_terminal, self.state.mu[-1]
        return lfx + hx.T @ (lam + mu * h), lfxx + mu * (hx.T @ hx)


def update_multipliers(
    al: ALState, traj: Trajectory, cons: ConstraintSet, scale_penalty: bool = True
) -> ALState:
    """lam <- max(0, lam + mu*g) at every step and terminal, then mu <- phi*mu.

    Penalty scaling can be suppressed by the caller (the stage driver only
    scales while the violation stalls)."""
    lam = al.lam.copy()
    for k in range(traj.N):
        g = cons.evaluate(traj.states[k], traj.controls[k], k)
        lam[k] = np.maximum(0.0, al.lam[k] + al.mu[k] * g)
    lam_term = al.lam_terminal
    if cons.n_terminal > 0:
        g = cons.evaluate_terminal(traj.states[traj.N])
        lam_term = np.maximum(0.0, al.lam_terminal + al.mu[-1] * g)
    mu = al.phi * al.mu if scale_penalty else al.mu
    return ALState(lam, lam_term, mu, al.phi)


def solve_al(
    problem: ProblemDefinition,
    init_traj: Trajectory,
    shoot: ShootingStructure,
    al_cfg: Optional[ALConfig] = None,
    mddp_cfg: Optional[MDDPConfig] = None,
    ls: Optional[LineSearchState] = None,
    reg: Optional[RegState] = None,
    records: Optional[list[IterationRecord]] = None,
) -> tuple[SolveResult, ShootingStructure]:
    """Alternate single inner iterations with multiplier/penalty updates.

    The stage succeeds once the inner solver is converged at the current
    multipliers and the worst violation is within the coarse tolerance.
    Returns the coarse result together with the final shooting structure
    (for warm-starting the refinement stage).
    """
    al_cfg = al_cfg or ALConfig()
    mddp_cfg = mddp_cfg or MDDPConfig()
    cons = problem.constraints
    state = ALState.initial(problem.N, cons, al_cfg)
    objective = ALObjective(problem.cost, cons, state)
    engine = MDDPEngine(
        problem, objective, init_traj, shoot, mddp_cfg, ls or LineSearchState(),
        reg or RegState(), "al", records,
        extra_fields=lambda: {
            "lambda_max": objective.state.lambda_max(),
            "mu_penalty": float(np.max(objective.state.mu)),
        },
    )
    status = Status.MAX_ITERATIONS
    best: Optional[tuple[float, float, Trajectory, ShootingStructure]] = None
    viol_ref = max(max_violation(init_traj, cons), al_cfg.c_max)
    for _ in range(al_cfg.max_outer):
        out = engine.iterate()
        if out.kind == "numerical_error":
            status = Status.NUMERICAL_ERROR
            break
        viol = max_violation(engine.traj, cons)
        key = (max(viol, 0.0), engine.cost)
        if best is None or key < best[:2]:
            best = (*key, engine.traj, engine.shoot)
        inner_done = out.defect_norm < mddp_cfg.d_max and (
            out.kind == "converged"
            or (
                out.kind == "accepted"
                and (out.improvement < mddp_cfg.eps_v or out.kff_inf < mddp_cfg.eps_q)
            )
        )
        if inner_done and viol <= al_cfg.c_max:
            status = Status.CONVERGED
            break
        if out.kind in ("accepted", "converged", "reg_capped"):
            scale = viol > max(al_cfg.c_max, al_cfg.progress * viol_ref)
            objective.state = update_multipliers(objective.state, engine.traj, cons, scale)
            if scale:
                viol_ref = viol
            if out.kind == "reg_capped":
                # A capped inner solve cannot progress at these multipliers;
                # restart the regularization schedule under the new ones.
                engine.reg = RegState(0.0, engine.reg.mu_v0, engine.reg.sigma, engine.reg.mu_v_max)
            engine.refresh_cost()
    traj, final_shoot = engine.traj, engine.shoot
    if status is Status.MAX_ITERATIONS and best is not None:
        _, _, traj, final_shoot = best
    return SolveResult(traj, status, engine.records), final_shoot
