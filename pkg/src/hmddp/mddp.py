"""Multiple-shooting DDP inner solver.

Trajectories are stored segment-wise consistent: states inside a shooting
segment always come from rolling the dynamics forward, so defects are
nonzero only at segment boundaries. The backward pass runs over the whole
horizon with a defect-corrected value gradient at boundary steps; the
forward pass updates node states through the boundary-step linearization
and re-rolls each segment interior.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import _kernels
from .core import (
    CostModel,
    DynamicsModel,
    IterationRecord,
    NumericalError,
    ProblemDefinition,
    SolveResult,
    Status,
    Trajectory,
    max_violation,
    total_cost,
)
from .globalization import (
    LineSearchKind,
    LineSearchState,
    RegState,
    bump_regularization,
    decay_regularization,
    expected_reduction,
    line_search,
)

#: Rollout states beyond this magnitude abort the trial as divergent.
DIVERGENCE_LIMIT = 1e12


@dataclass(frozen=True)
class ShootingStructure:
    """Segment start indices and the defect vector at each boundary."""

    node_indices: np.ndarray  # (M,) int, strictly increasing, first is 0
    defects: np.ndarray  # (M-1, n)

    @property
    def M(self) -> int:
        return self.node_indices.shape[0]

    def boundary_steps(self) -> np.ndarray:
        """Time index of the last step of each non-final segment."""
        return self.node_indices[1:] - 1

    def dense_defects(self, N: int, n: int) -> np.ndarray:
        """(N, n) array with defect rows at boundary steps, zero elsewhere."""
        dense = np.zeros((N, n))
        if self.M > 1:
            dense[self.boundary_steps()] = self.defects
        return dense

    def defect_norm(self) -> float:
        return float(np.linalg.norm(self.defects))


def segment_starts(N: int, M: int) -> np.ndarray:
    """Near-equal contiguous partition of N steps into M segments.

    Remainder steps are distributed one each to the leading segments.
    """
    if not 1 <= M <= N:
        raise ValueError(f"require 1 <= M <= N, got M={M}, N={N}")
    base, rem = divmod(N, M)
    lengths = np.full(M, base, dtype=int)
    lengths[:rem] += 1
    starts = np.zeros(M, dtype=int)
    starts[1:] = np.cumsum(lengths)[:-1]
    return starts


def recompute_defects(traj: Trajectory, shoot: ShootingStructure, dyn: DynamicsModel) -> ShootingStructure:
    """d_j = f(x_b, u_b) - x_{b+1} at each segment boundary step b."""
    if shoot.M == 1:
        return ShootingStructure(shoot.node_indices, np.zeros((0, traj.n)))
    defects = np.empty((shoot.M - 1, traj.n))
    for j, b in enumerate(shoot.boundary_steps()):
        nxt = dyn.step(traj.states[b], traj.controls[b])
        if not np.all(np.isfinite(nxt)):
            raise NumericalError(f"dynamics produced non-finite state at step {b}")
        defects[j] = nxt - traj.states[b + 1]
    return ShootingStructure(shoot.node_indices, defects)


def initial_rollout(
    node_init: np.ndarray, u_init: np.ndarray, dyn: DynamicsModel, dt: float
) -> tuple[Trajectory, ShootingStructure]:
    """Roll each segment forward from its node state under the initial controls."""
    node_init = np.atleast_2d(np.asarray(node_init, dtype=float))
    u_init = np.asarray(u_init, dtype=float)
    N = u_init.shape[0]
    M = node_init.shape[0]
    starts = segment_starts(N, M)
    states = np.zeros((N + 1, dyn.n))
    for j in range(M):
        end = starts[j + 1] if j + 1 < M else N
        states[starts[j]] = node_init[j]
        for k in range(starts[j], end):
            states[k + 1] = dyn.step(states[k], u_init[k])
    if not np.all(np.isfinite(states)):
        raise NumericalError("initial rollout produced non-finite states")
    traj = Trajectory.from_arrays(states, u_init, dt)
    shoot = ShootingStructure(starts, np.zeros((max(M - 1, 0), dyn.n)))
    return traj, recompute_defects(traj, shoot, dyn)


@dataclass
class Linearization:
    """Dynamics and stage-objective derivative stacks along a nominal."""

    A: np.ndarray  # (N, n, n)
    B: np.ndarray  # (N, n, m)
    lx: np.ndarray
    lu: np.ndarray
    lxx: np.ndarray
    luu: np.ndarray
    lux: np.ndarray
    defects: np.ndarray  # dense (N, n)
    lfx: np.ndarray
    lfxx: np.ndarray


@dataclass
class BackwardPassResult:
    """Gains plus the value expansion produced by one backward pass."""

    ok: bool
    fail_step: int
    kff: np.ndarray  # (N, m)
    Kfb: np.ndarray  # (N, m, n)
    dv1: float
    dv2: float
    vx: np.ndarray  # (N+1, n)
    vxx: np.ndarray  # (N+1, n, n)
    qx: np.ndarray
    qu: np.ndarray
    qxx: np.ndarray
    quu: np.ndarray
    qux: np.ndarray

    def kff_inf(self) -> float:
        """max over steps of the feedforward infinity norm."""
        return float(np.max(np.abs(self.kff))) if self.kff.size else 0.0


def linearize(
    traj: Trajectory, shoot: ShootingStructure, dyn: DynamicsModel, objective: CostModel
) -> Linearization:
    N, n, m = traj.N, traj.n, traj.m
    A = np.empty((N, n, n))
    B = np.empty((N, n, m))
    lx = np.empty((N, n))
    lu = np.empty((N, m))
    lxx = np.empty((N, n, n))
    luu = np.empty((N, m, m))
    lux = np.empty((N, m, n))
    for k in range(N):
        x, u = traj.states[k], traj.controls[k]
        A[k], B[k] = dyn.jacobians(x, u)
        lx[k], lu[k], lxx[k], luu[k], lux[k] = objective.running_derivatives(x, u, k)
    lfx, lfxx = objective.terminal_derivatives(traj.states[N])
    for name, arr in (("dynamics", A), ("dynamics", B), ("objective", lx), ("objective", lu)):
        if not np.all(np.isfinite(arr)):
            raise NumericalError(f"non-finite {name} derivatives along nominal trajectory")
    return Linearization(A, B, lx, lu, lxx, luu, lux, shoot.dense_defects(N, n), lfx, lfxx)


def run_backward(lin: Linearization, mu_v: float) -> BackwardPassResult:
    """Invoke the selected kernel on precomputed derivative stacks."""
    N, n = lin.A.shape[0], lin.A.shape[1]
    m = lin.B.shape[2]
    kff = np.zeros((N, m))
    Kfb = np.zeros((N, m, n))
    vx = np.zeros((N + 1, n))
    vxx = np.zeros((N + 1, n, n))
    qx = np.zeros((N, n))
    qu = np.zeros((N, m))
    qxx = np.zeros((N, n, n))
    quu = np.zeros((N, m, m))
    qux = np.zeros((N, m, n))
    c = np.ascontiguousarray
    ok, fail_step, dv1, dv2 = _kernels.backward_recursion(
        c(lin.A), c(lin.B), c(lin.lx), c(lin.lu), c(lin.lxx), c(lin.luu), c(lin.lux),
        c(lin.defects), c(lin.lfx), c(lin.lfxx), float(mu_v),
        kff, Kfb, vx, vxx, qx, qu, qxx, quu, qux,
    )
    return BackwardPassResult(ok, fail_step, kff, Kfb, dv1, dv2, vx, vxx, qx, qu, qxx, quu, qux)


def backward_pass(
    traj: Trajectory,
    shoot: ShootingStructure,
    dyn: DynamicsModel,
    objective: CostModel,
    reg: RegState,
) -> BackwardPassResult:
    """Linearize along the nominal and run the value recursion."""
    return run_backward(linearize(traj, shoot, dyn, objective), reg.mu_v)


def forward_pass(
    traj: Trajectory,
    shoot: ShootingStructure,
    kff: np.ndarray,
    Kfb: np.ndarray,
    alpha: float,
    dyn: DynamicsModel,
    objective: CostModel,
) -> Optional[tuple[Trajectory, ShootingStructure, float]]:
    """Apply the scaled control update and re-roll each segment.

    Node states move by the linear prediction through the boundary-step
    linearization, with the defect compensation scaled by alpha like the
    feedforward term (a full step applies the full defect; alpha -> 0 is a
    null step). Returns None when the rollout diverges, which the caller
    treats as a rejected trial at this alpha.
    """
    N, M = traj.N, shoot.M
    starts = shoot.node_indices
    states = traj.states
    controls = traj.controls
    new_states = np.zeros_like(states)
    new_controls = np.zeros_like(controls)
    new_states[0] = states[0]
    for j in range(M):
        end = starts[j + 1] if j + 1 < M else N
        for k in range(starts[j], end):
            dx = new_states[k] - states[k]
            new_controls[k] = controls[k] + alpha * kff[k] + Kfb[k] @ dx
            if k < end - 1 or j == M - 1:
                new_states[k + 1] = dyn.step(new_states[k], new_controls[k])
            else:
                fx, fu = dyn.jacobians(states[k], controls[k])
                du = new_controls[k] - controls[k]
                new_states[k + 1] = states[k + 1] + fx @ dx + fu @ du + shoot.defects[j]
            if not np.all(np.isfinite(new_states[k + 1])) or np.max(np.abs(new_states[k + 1])) > DIVERGENCE_LIMIT:
                return None
    new_traj = Trajectory(new_states, new_controls, Kfb.copy(), traj.dt)
    new_shoot = recompute_defects(new_traj, shoot, dyn)
    try:
        cost = total_cost(new_traj, objective)
    except NumericalError:
        return None
    return new_traj, new_shoot, cost


@dataclass
class MDDPConfig:
    eps_v: float = 1e-7
    eps_q: float = 1e-6
    d_max: float = 1e-6
    max_iter: int = 100


@dataclass
class IterationOutcome:
    """Result of one backward/forward cycle of the engine."""

    kind: str  # accepted | converged | reg_capped | numerical_error
    improvement: float = 0.0
    kff_inf: float = float("inf")
    defect_norm: float = float("inf")


class MDDPEngine:
    """Stateful inner solver driving one stage objective.

    Owns the nominal trajectory, the regularization state and the shared
    iteration log. The penalty stages call `iterate` (one accepted step)
    or `run` (loop with the full stop test) and mutate their parameters
    between calls via `refresh_cost`.
    """

    def __init__(
        self,
        problem: ProblemDefinition,
        objective: CostModel,
        traj: Trajectory,
        shoot: ShootingStructure,
        cfg: MDDPConfig,
        ls: LineSearchState,
        reg: RegState,
        stage: str,
        records: Optional[list[IterationRecord]] = None,
        extra_fields: Optional[Callable[[], dict]] = None,
    ):
        self.problem = problem
        self.objective = objective
        self.traj = traj
        self.shoot = shoot
        self.cfg = cfg
        self.ls = ls
        self.reg = reg
        self.stage = stage
        self.records = records if records is not None else []
        self.extra_fields = extra_fields or (lambda: {})
        self.cost = total_cost(traj, objective)
        self._lin: Optional[Linearization] = None
        self._iter = 0

    def refresh_cost(self) -> None:
        """Re-evaluate the nominal cost and derivatives after the stage
        objective's parameters changed."""
        self.cost = total_cost(self.traj, self.objective)
        self._lin = None

    def _log(self, event: str, alpha: Optional[float], accepted: bool) -> None:
        self._iter += 1
        rec = IterationRecord(
            stage=self.stage,
            iter=self._iter,
            cost=self.cost,
            max_violation=max_violation(self.traj, self.problem.constraints),
            defect_norm=self.shoot.defect_norm(),
            alpha=alpha,
            mu_v=self.reg.mu_v,
            accepted=accepted,
            event=event,
        )
        for key, value in self.extra_fields().items():
            setattr(rec, key, value)
        self.records.append(rec)

    def iterate(self) -> IterationOutcome:
        """Backward pass + line search, bumping regularization on failure,
        until a step is accepted, convergence is signalled, or the
        regularization cap is hit."""
        while True:
            try:
                if self._lin is None:
                    self._lin = linearize(self.traj, self.shoot, self.problem.dynamics, self.objective)
            except NumericalError:
                self._log("numerical_error", None, False)
                return IterationOutcome("numerical_error")
            bp = run_backward(self._lin, self.reg.mu_v)
            if not bp.ok:
                self._log("bp_failed", None, False)
                bumped = bump_regularization(self.reg)
                if bumped is None:
                    return IterationOutcome("reg_capped")
                self.reg = bumped
                continue

            defects = self.shoot.defects

            def trial(alpha: float):
                out = forward_pass(
                    self.traj, self.shoot, bp.kff, bp.Kfb, alpha, self.problem.dynamics, self.objective
                )
                if out is None:
                    return None
                return out, out[2]

            result = line_search(
                trial,
                lambda a: expected_reduction(a, bp.dv1, bp.dv2, defects, self.ls.w),
                self.cost,
                self.ls,
            )
            if result.kind is LineSearchKind.CONVERGED:
                self._log("converged", None, False)
                return IterationOutcome(
                    "converged", 0.0, bp.kff_inf(), self.shoot.defect_norm()
                )
            if result.kind is LineSearchKind.FAILED:
                self._log("ls_failed", None, False)
                bumped = bump_regularization(self.reg)
                if bumped is None:
                    return IterationOutcome("reg_capped")
                self.reg = bumped
                continue
            new_traj, new_shoot, new_cost = result.payload
            improvement = self.cost - new_cost
            self.traj, self.shoot = new_traj, new_shoot
            self.cost = new_cost
            self._lin = None
            if result.alpha == self.ls.alphas[0]:
                self.reg = decay_regularization(self.reg)
            self._log("accepted", result.alpha, True)
            return IterationOutcome("accepted", improvement, bp.kff_inf(), new_shoot.defect_norm())

    def run(self, max_iter: Optional[int] = None) -> Status:
        """Iterate until the combined cost/feedforward + defect stop test."""
        limit = self.cfg.max_iter if max_iter is None else max_iter
        for _ in range(limit):
            out = self.iterate()
            if out.kind == "reg_capped":
                return Status.REGULARIZATION_CAPPED
            if out.kind == "numerical_error":
                return Status.NUMERICAL_ERROR
            if out.defect_norm < self.cfg.d_max and (
                out.kind == "converged"
                or out.improvement < self.cfg.eps_v
                or out.kff_inf < self.cfg.eps_q
            ):
                return Status.CONVERGED
        return Status.MAX_ITERATIONS


def solve_mddp(
    problem: ProblemDefinition,
    init_traj: Trajectory,
    shoot: ShootingStructure,
    cfg: Optional[MDDPConfig] = None,
    objective: Optional[CostModel] = None,
    ls: Optional[LineSearchState] = None,
    reg: Optional[RegState] = None,
    stage: str = "mddp",
    records: Optional[list[IterationRecord]] = None,
) -> SolveResult:
    """Run the inner solver on a single stage objective (plain cost by default)."""
    engine = MDDPEngine(
        problem,
        objective or problem.cost,
        init_traj,
        shoot,
        cfg or MDDPConfig(),
        ls or LineSearchState(),
        reg or RegState(),
        stage,
        records,
    )
    status = engine.run()
    return SolveResult(engine.traj, status, engine.records)
