"""Planar quadrotor: rigid body with two thrusters, tilt-angle and
positive-thrust bounds plus circular obstacles."""

from __future__ import annotations

import math

import numpy as np

from ..core import ProblemDefinition, QuadraticCost
from .common import BenchmarkProblem, diag_cost
from .constraints import AffineConstraints, CircleObstacles, StackedConstraints
from .discretize import ContinuousDynamics, discretize


class PlanarQuadrotorDynamics(ContinuousDynamics):
    """State (x, y, theta, xdot, ydot, thetadot), controls (u_left, u_right)."""

    n = 6
    m = 2

    def __init__(self, mass=0.5, inertia=0.01, arm_length=0.25, gravity=9.81):
        self.mass = float(mass)
        self.inertia = float(inertia)
        self.arm = float(arm_length)
        self.g = float(gravity)

    def hover_thrust(self) -> float:
        """Per-rotor thrust that balances gravity at zero tilt."""
        return 0.5 * self.mass * self.g

    def vf(self, x, u):
        th = x[2]
        s, c = math.sin(th), math.cos(th)
        total = u[0] + u[1]
        return np.array(
            [
                x[3],
                x[4],
                x[5],
                -total * s / self.mass,
                total * c / self.mass - self.g,
                self.arm * (u[1] - u[0]) / self.inertia,
            ]
        )

    def vf_jacobians(self, x, u):
        th = x[2]
        s, c = math.sin(th), math.cos(th)
        total = u[0] + u[1]
        jx = np.zeros((6, 6))
        jx[0, 3] = 1.0
        jx[1, 4] = 1.0
        jx[2, 5] = 1.0
        jx[3, 2] = -total * c / self.mass
        jx[4, 2] = -total * s / self.mass
        ju = np.zeros((6, 2))
        ju[3, 0] = -s / self.mass
        ju[3, 1] = -s / self.mass
        ju[4, 0] = c / self.mass
        ju[4, 1] = c / self.mass
        ju[5, 0] = -self.arm / self.inertia
        ju[5, 1] = self.arm / self.inertia
        return jx, ju


DEFAULT_OBSTACLES = [[1.0, 1.0, 0.4]]


def build(cfg: dict | None = None) -> BenchmarkProblem:
    cfg = dict(cfg or {})
    dt = float(cfg.get("dt", 0.01))
    N = int(cfg.get("N", round(float(cfg.get("T", 3.0)) / dt)))
    M = int(cfg.get("M", 30))
    tilt_max = float(cfg.get("tilt_max", math.pi / 6.0))
    u_min = float(cfg.get("u_min", 0.1))
    obstacles = np.atleast_2d(np.asarray(cfg.get("obstacles", DEFAULT_OBSTACLES), dtype=float))
    cont = PlanarQuadrotorDynamics(
        cfg.get("mass", 0.5), cfg.get("inertia", 0.01),
        cfg.get("arm_length", 0.25), cfg.get("gravity", 9.81),
    )
    dyn = discretize(cont, dt)
    x_init = np.asarray(cfg.get("x_init", [0.0] * 6), dtype=float)
    x_goal = np.asarray(cfg.get("x_goal", [2.0, 2.0, 0.0, 0.0, 0.0, 0.0]), dtype=float)
    # Positive-thrust rows: u_min - u <= 0 for each rotor.
    thrust_floor = AffineConstraints(
        np.zeros((2, 6)), -np.eye(2), np.full(2, u_min)
    )
    cons = StackedConstraints(
        [
            AffineConstraints.state_bound(6, 2, 2, -tilt_max, tilt_max),
            thrust_floor,
            CircleObstacles(6, 2, obstacles[:, :2], obstacles[:, 2]),
        ]
    )
    cost = QuadraticCost(*diag_cost(cfg, 6, 2), x_goal)
    problem = ProblemDefinition(dyn, cost, cons, x_init, x_goal, N, dt, M)
    hover = cont.hover_thrust()
    u_init = np.full((N, 2), hover)
    box = (
        np.array([-1.0, -1.0, -math.pi / 3, -2.0, -2.0, -3.0]),
        np.array([3.0, 3.0, math.pi / 3, 2.0, 2.0, 3.0]),
        np.array([0.0, 0.0]),
        np.array([8.0, 8.0]),
    )
    return BenchmarkProblem(problem, u_init, box)
