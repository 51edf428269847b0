"""Planar car: unicycle with a speed state, steering-rate and
acceleration inputs, circular keep-out obstacles and actuation bounds."""

from __future__ import annotations

import math

import numpy as np

from ..core import ProblemDefinition, QuadraticCost
from .common import BenchmarkProblem, diag_cost
from .constraints import AffineConstraints, CircleObstacles, StackedConstraints
from .discretize import ContinuousDynamics, discretize


class Car2DDynamics(ContinuousDynamics):
    """xdot = v cos(th), ydot = v sin(th), thdot = w, vdot = a."""

    n = 4
    m = 2

    def vf(self, x, u):
        _, _, th, v = x
        return np.array([v * math.cos(th), v * math.sin(th), u[0], u[1]])

    def vf_jacobians(self, x, u):
        _, _, th, v = x
        s, c = math.sin(th), math.cos(th)
        jx = np.zeros((4, 4))
        jx[0, 2] = -v * s
        jx[0, 3] = c
        jx[1, 2] = v * c
        jx[1, 3] = s
        ju = np.zeros((4, 2))
        ju[2, 0] = 1.0
        ju[3, 1] = 1.0
        return jx, ju


DEFAULT_OBSTACLES = [[1.0, 1.05, 0.45], [2.0, 1.95, 0.45]]


def build(cfg: dict | None = None) -> BenchmarkProblem:
    cfg = dict(cfg or {})
    dt = float(cfg.get("dt", 0.01))
    N = int(cfg.get("N", round(float(cfg.get("T", 5.0)) / dt)))
    M = int(cfg.get("M", 5))
    omega_max = float(cfg.get("omega_max", 2.0))
    accel_max = float(cfg.get("accel_max", 2.0))
    obstacles = np.atleast_2d(np.asarray(cfg.get("obstacles", DEFAULT_OBSTACLES), dtype=float))
    dyn = discretize(Car2DDynamics(), dt)
    x_init = np.asarray(cfg.get("x_init", [0.0, 0.0, 0.0, 0.0]), dtype=float)
    x_goal = np.asarray(cfg.get("x_goal", [3.0, 3.0, math.pi / 4.0, 0.0]), dtype=float)
    cons = StackedConstraints(
        [
            AffineConstraints.control_bound(4, 2, 0, -omega_max, omega_max),
            AffineConstraints.control_bound(4, 2, 1, -accel_max, accel_max),
            CircleObstacles(4, 2, obstacles[:, :2], obstacles[:, 2]),
        ]
    )
    cost = QuadraticCost(*diag_cost(cfg, 4, 2), x_goal)
    problem = ProblemDefinition(dyn, cost, cons, x_init, x_goal, N, dt, M)
    box = (
        np.array([-1.0, -1.0, -math.pi, -2.0]),
        np.array([4.0, 4.0, math.pi, 2.0]),
        np.array([-3.0, -3.0]),
        np.array([3.0, 3.0]),
    )
    return BenchmarkProblem(problem, np.zeros((N, 2)), box)
