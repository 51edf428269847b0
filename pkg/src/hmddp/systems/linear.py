"""Linear-dynamics fixtures and the independent Riccati oracle."""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..core import NoConstraints, ProblemDefinition, QuadraticCost
from .common import BenchmarkProblem


class LinearDynamics:
    """x_next = A x + B u (+ c).

    A separate "declared" Jacobian pair may be supplied; it is what
    `jacobians` reports, which lets the derivative checker flag a manifest
    whose declared linearization disagrees with the actual map.
    """

    def __init__(self, A, B, c=None, A_decl=None, B_decl=None):
        self.A = np.asarray(A, dtype=float)
        self.B = np.asarray(B, dtype=float)
        self.n = self.A.shape[0]
        self.m = self.B.shape[1]
        self.c = np.zeros(self.n) if c is None else np.asarray(c, dtype=float)
        self.A_decl = self.A if A_decl is None else np.asarray(A_decl, dtype=float)
        self.B_decl = self.B if B_decl is None else np.asarray(B_decl, dtype=float)

    def step(self, x, u):
        return self.A @ x + self.B @ u + self.c

    def jacobians(self, x, u):
        return self.A_decl, self.B_decl


def riccati_gains(
    A: np.ndarray, B: np.ndarray, Q: np.ndarray, R: np.ndarray, Qf: np.ndarray, N: int
) -> tuple[np.ndarray, np.ndarray]:
    """Finite-horizon LQR via the backward Riccati recursion.

    For cost sum_k x'Qx + u'Ru + x_N'Qf x_N (no 1/2 factor) the optimal
    policy is u_k = -K_k x_k; returns (K with shape (N, m, n), P_0).
    """
    n, m = A.shape[0], B.shape[1]
    K = np.zeros((N, m, n))
    P = Qf.copy()
    for k in range(N - 1, -1, -1):
        BtP = B.T @ P
        K[k] = np.linalg.solve(R + BtP @ B, BtP @ A)
        P = Q + A.T @ P @ A - A.T @ P @ B @ K[k]
        P = 0.5 * (P + P.T)
    return K, P


def lqr_fixture(
    n: int, m: int, N: int, seed: int, M: int = 1
) -> tuple[BenchmarkProblem, np.ndarray, float]:
    """Random unconstrained LQ problem plus its Riccati reference.

    The state matrix is rescaled to spectral radius at most 1.2. Returns
    the problem, the oracle gain stack K (u = -K x) and the optimal cost
    from the fixture's initial state.
    """
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, n))
    rho = np.max(np.abs(np.linalg.eigvals(A)))
    if rho > 1.2:
        A *= 1.2 / rho
    B = rng.standard_normal((n, m))
    Q = np.eye(n)
    R = 0.1 * np.eye(m)
    Qf = 50.0 * np.eye(n)
    x_init = rng.standard_normal(n)
    dyn = LinearDynamics(A, B)
    cost = QuadraticCost(Q, R, Qf, np.zeros(n))
    problem = ProblemDefinition(dyn, cost, NoConstraints(), x_init, np.zeros(n), N, 1.0, M)
    K, P0 = riccati_gains(A, B, Q, R, Qf, N)
    opt_cost = float(x_init @ P0 @ x_init)
    box = (-np.ones(n), np.ones(n), -np.ones(m), np.ones(m))
    bench = BenchmarkProblem(problem, np.zeros((N, m)), box)
    return bench, K, opt_cost


def build(cfg: Optional[dict] = None) -> BenchmarkProblem:
    """Manifest entry point for the seeded LQR fixture."""
    cfg = dict(cfg or {})
    bench, _, _ = lqr_fixture(
        int(cfg.get("n", 4)), int(cfg.get("m", 2)), int(cfg.get("N", 50)),
        int(cfg.get("seed", 0)), int(cfg.get("M", 1)),
    )
    return bench


def build_custom(cfg: Optional[dict] = None) -> BenchmarkProblem:
    """Manifest entry point for a user-declared linear system.

    `a`/`b` define the map; optional `jacobian_a`/`jacobian_b` override
    what the model reports as its linearization.
    """
    cfg = dict(cfg or {})
    A = np.asarray(cfg["a"], dtype=float)
    B = np.asarray(cfg["b"], dtype=float)
    dyn = LinearDynamics(A, B, A_decl=cfg.get("jacobian_a"), B_decl=cfg.get("jacobian_b"))
    n, m = dyn.n, dyn.m
    N = int(cfg.get("N", 50))
    M = int(cfg.get("M", 1))
    x_init = np.asarray(cfg.get("x_init", np.zeros(n)), dtype=float)
    x_goal = np.asarray(cfg.get("x_goal", np.zeros(n)), dtype=float)
    cost = QuadraticCost(np.eye(n), 0.1 * np.eye(m), 50.0 * np.eye(n), x_goal)
    problem = ProblemDefinition(dyn, cost, NoConstraints(), x_init, x_goal, N, 1.0, M)
    box = (-np.ones(n), np.ones(n), -np.ones(m), np.ones(m))
    return BenchmarkProblem(problem, np.zeros((N, m)), box)
