"""Problem definition and trajectory data model shared by all solver stages.

States and controls are dense float64 vectors; trajectories store them as
stacked rows (time along axis 0). All solver stages consume the same
abstract dynamics / cost / constraint interfaces defined here.
"""

from __future__ import annotations

import abc
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np


class Status(Enum):
    """Termination status of a solve."""

    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    LINE_SEARCH_FAILED = "line_search_failed"
    REGULARIZATION_CAPPED = "regularization_capped"
    NUMERICAL_ERROR = "numerical_error"


class NumericalError(RuntimeError):
    """Raised when a model evaluation produces non-finite values."""


class ConfigError(ValueError):
    """Raised for invalid problem or manifest configuration."""


class DynamicsModel(abc.ABC):
    """Discrete transition map x_next = step(x, u) with analytic Jacobians."""

    n: int
    m: int

    @abc.abstractmethod
    def step(self, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Advance one time step. Must be pure and deterministic."""

    @abc.abstractmethod
    def jacobians(self, x: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return (d step/dx, d step/du) with shapes (n, n) and (n, m)."""


class CostModel(abc.ABC):
    """Running + terminal objective with derivatives up to second order.

    Any object with this interface can serve directly as the stage
    objective of the inner solver; the penalty stages wrap a CostModel and
    add their own terms.
    """

    @abc.abstractmethod
    def running(self, x: np.ndarray, u: np.ndarray, k: int) -> float: ...

    @abc.abstractmethod
    def terminal(self, x: np.ndarray) -> float: ...

    @abc.abstractmethod
    def running_derivatives(
        self, x: np.ndarray, u: np.ndarray, k: int
    ) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Return (lx, lu, lxx, luu, lux)."""

    @abc.abstractmethod
    def terminal_derivatives(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return (lfx, lfxx)."""


class QuadraticCost(CostModel):
    """l = (x - xg)' Q (x - xg) + u' R u, lf = (x - xg)' Qf (x - xg).

    Note the absence of a 1/2 factor; weight matrices are used as given.
    """

    def __init__(self, Q: np.ndarray, R: np.ndarray, Qf: np.ndarray, x_goal: np.ndarray):
        self.Q = np.asarray(Q, dtype=float)
        self.R = np.asarray(R, dtype=float)
        self.Qf = np.asarray(Qf, dtype=float)
        self.x_goal = np.asarray(x_goal, dtype=float)

    def running(self, x, u, k):
        dx = x - self.x_goal
        return float(dx @ self.Q @ dx + u @ self.R @ u)

    def terminal(self, x):
        dx = x - self.x_goal
        return float(dx @ self.Qf @ dx)

    def running_derivatives(self, x, u, k):
        dx = x - self.x_goal
        lx = 2.0 * (self.Q @ dx)
        lu = 2.0 * (self.R @ u)
        lxx = 2.0 * self.Q
        luu = 2.0 * self.R
        lux = np.zeros((u.shape[0], x.shape[0]))
        return lx, lu, lxx, luu, lux

    def terminal_derivatives(self, x):
        dx = x - self.x_goal
        return 2.0 * (self.Qf @ dx), 2.0 * self.Qf


class ConstraintSet(abc.ABC):
    """Per-step inequality constraints g(x, u) <= 0 (componentwise).

    `n_running` rows are evaluated at every step k = 0..N-1 and
    `n_terminal` rows at the final state. Either count may be zero.
    """

    n_running: int = 0
    n_terminal: int = 0

    def evaluate(self, x: np.ndarray, u: np.ndarray, k: int) -> np.ndarray:
        return np.zeros(0)

    def jacobians(self, x: np.ndarray, u: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Return (gx, gu) with shapes (n_running, n) and (n_running, m)."""
        return np.zeros((0, x.shape[0])), np.zeros((0, u.shape[0]))

    def evaluate_terminal(self, x: np.ndarray) -> np.ndarray:
        return np.zeros(0)

    def terminal_jacobian(self, x: np.ndarray) -> np.ndarray:
        return np.zeros((0, x.shape[0]))

    @property
    def is_empty(self) -> bool:
        return self.n_running == 0 and self.n_terminal == 0


class NoConstraints(ConstraintSet):
    """Empty constraint set (unconstrained problem)."""


@dataclass(frozen=True)
class Trajectory:
    """States (N+1, n), controls (N, m) and feedback gains (N, m, n)."""

    states: np.ndarray
    controls: np.ndarray
    gains: np.ndarray
    dt: float

    def __post_init__(self):
        if self.states.ndim != 2 or self.controls.ndim != 2:
            raise ConfigError("states and controls must be 2-D arrays")
        if self.states.shape[0] != self.controls.shape[0] + 1:
            raise ConfigError("states must have exactly one more row than controls")
        if self.gains.shape != (self.N, self.controls.shape[1], self.states.shape[1]):
            raise ConfigError("gains must have shape (N, m, n)")

    @property
    def N(self) -> int:
        return self.controls.shape[0]

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def m(self) -> int:
        return self.controls.shape[1]

    @staticmethod
    def from_arrays(states, controls, dt, gains=None) -> "Trajectory":
        states = np.asarray(states, dtype=float)
        controls = np.asarray(controls, dtype=float)
        if gains is None:
            gains = np.zeros((controls.shape[0], controls.shape[1], states.shape[1]))
        return Trajectory(states, controls, np.asarray(gains, dtype=float), float(dt))


@dataclass(frozen=True)
class ProblemDefinition:
    """Dynamics, objective, constraints and horizon metadata for one solve."""

    dynamics: DynamicsModel
    cost: CostModel
    constraints: ConstraintSet
    x_init: np.ndarray
    x_goal: np.ndarray
    N: int
    dt: float
    M: int = 1

    def __post_init__(self):
        if not (1 <= self.M <= self.N):
            raise ConfigError(f"segment count M={self.M} must satisfy 1 <= M <= N={self.N}")
        if self.x_init.shape != (self.dynamics.n,):
            raise ConfigError("x_init dimension does not match dynamics")
        if not np.all(np.isfinite(self.x_init)):
            raise ConfigError("x_init must be finite")


@dataclass
class IterationRecord:
    """One log entry per backward-pass entry of the inner solver."""

    stage: str
    iter: int
    cost: float
    max_violation: float
    defect_norm: float
    alpha: Optional[float]
    mu_v: float
    psi: Optional[float] = None
    delta: Optional[float] = None
    lambda_max: Optional[float] = None
    mu_penalty: Optional[float] = None
    accepted: bool = False
    event: str = "accepted"


@dataclass
class SolveResult:
    """Optimized trajectory plus per-iteration diagnostics."""

    trajectory: Trajectory
    status: Status
    iterations: list[IterationRecord] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def final_cost(self) -> float:
        return self.iterations[-1].cost if self.iterations else float("nan")


def total_cost(traj: Trajectory, cost: CostModel) -> float:
    """Total objective sum_k l(x_k, u_k) + lf(x_N) under `cost`.

    `cost` may be any stage objective (plain cost model or a penalty-
    augmented wrapper). Raises NumericalError on a non-finite result.
    """
    J = 0.0
    for k in range(traj.N):
        J += cost.running(traj.states[k], traj.controls[k], k)
    J += cost.terminal(traj.states[traj.N])
    if not np.isfinite(J):
        raise NumericalError("total cost is not finite")
    return J


def max_violation(traj: Trajectory, cons: ConstraintSet) -> float:
    """Largest constraint value over all steps and components.

    Zero for an empty constraint set; negative when strictly feasible.
    """
    if cons.is_empty:
        return 0.0
    worst = -np.inf
    if cons.n_running > 0:
        for k in range(traj.N):
            g = cons.evaluate(traj.states[k], traj.controls[k], k)
            worst = max(worst, float(np.max(g)))
    if cons.n_terminal > 0:
        g = cons.evaluate_terminal(traj.states[traj.N])
        worst = max(worst, float(np.max(g)))
    return worst
