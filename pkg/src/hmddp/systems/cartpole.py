"""Cart-pole swing-up: frictionless cart on a rail with a pinned pole.

State (p, theta, pdot, thetadot) with theta measured from the hanging
position; control is the horizontal force on the cart. The benchmark
swings the pole up (theta: 0 -> pi) under a force bound and a rail-length
bound on the cart position.
"""

from __future__ import annotations

import math

import numpy as np

from ..core import ProblemDefinition, QuadraticCost
from .common import BenchmarkProblem, diag_cost
from .constraints import AffineConstraints, StackedConstraints
from .discretize import ContinuousDynamics, discretize


class CartPoleDynamics(ContinuousDynamics):
    n = 4
    m = 1

    def __init__(self, cart_mass=1.0, pole_mass=0.3, pole_length=0.5, gravity=9.81):
        self.m1 = float(cart_mass)
        self.m2 = float(pole_mass)
        self.length = float(pole_length)
        self.g = float(gravity)

    def vf(self, x, u):
        _, th, pdot, om = x
        F = u[0]
        s, c = math.sin(th), math.cos(th)
        m1, m2, length, g = self.m1, self.m2, self.length, self.g
        D = m1 + m2 * s * s
        acc_p = (F + m2 * s * (length * om * om + g * c)) / D
        acc_th = -(F * c + m2 * length * om * om * s * c + (m1 + m2) * g * s) / (length * D)
        return np.array([pdot, om, acc_p, acc_th])

    def vf_jacobians(self, x, u):
        _, th, _, om = x
        F = u[0]
        s, c = math.sin(th), math.cos(th)
        m1, m2, length, g = self.m1, self.m2, self.length, self.g
        D = m1 + m2 * s * s
        dD = 2.0 * m2 * s * c
        n1 = F + m2 * s * (length * om * om + g * c)
        dn1_th = m2 * (c * length * om * om + g * (c * c - s * s))
        n2 = F * c + m2 * length * om * om * s * c + (m1 + m2) * g * s
        dn2_th = -F * s + m2 * length * om * om * (c * c - s * s) + (m1 + m2) * g * c

        jx = np.zeros((4, 4))
        jx[0, 2] = 1.0
        jx[1, 3] = 1.0
        jx[2, 1] = (dn1_th * D - n1 * dD) / (D * D)
        jx[2, 3] = 2.0 * m2 * s * length * om / D
        jx[3, 1] = -(dn2_th * D - n2 * dD) / (length * D * D)
        jx[3, 3] = -2.0 * m2 * om * s * c / D

        ju = np.zeros((4, 1))
        ju[2, 0] = 1.0 / D
        ju[3, 0] = -c / (length * D)
        return jx, ju

    def energy(self, x) -> float:
        """Total mechanical energy (kinetic + potential)."""
        _, th, pdot, om = x
        m1, m2, length, g = self.m1, self.m2, self.length, self.g
        kinetic = (
            0.5 * (m1 + m2) * pdot * pdot
            + m2 * length * pdot * om * math.cos(th)
            + 0.5 * m2 * length * length * om * om
        )
        return kinetic - m2 * g * length * math.cos(th)


def build(cfg: dict | None = None) -> BenchmarkProblem:
    cfg = dict(cfg or {})
    dt = float(cfg.get("dt", 0.01))
    N = int(cfg.get("N", round(float(cfg.get("T", 3.0)) / dt)))
    M = int(cfg.get("M", 10))
    force_limit = float(cfg.get("force_limit", 5.0))
    rail_half = float(cfg.get("rail_half_length", 0.8))
    dyn = discretize(
        CartPoleDynamics(
            cfg.get("cart_mass", 1.0),
            cfg.get("pole_mass", 0.3),
            cfg.get("pole_length", 0.5),
            cfg.get("gravity", 9.81),
        ),
        dt,
    )
    x_init = np.asarray(cfg.get("x_init", [0.0, 0.0, 0.0, 0.0]), dtype=float)
    x_goal = np.asarray(cfg.get("x_goal", [0.0, math.pi, 0.0, 0.0]), dtype=float)
    cons = StackedConstraints(
        [
            AffineConstraints.control_bound(4, 1, 0, -force_limit, force_limit),
            AffineConstraints.state_bound(4, 1, 0, -rail_half, rail_half),
        ]
    )
    cost = QuadraticCost(*diag_cost(cfg, 4, 1), x_goal)
    problem = ProblemDefinition(dyn, cost, cons, x_init, x_goal, N, dt, M)
    box = (
        np.array([-1.0, -math.pi, -3.0, -6.0]),
        np.array([1.0, math.pi, 3.0, 6.0]),
        np.array([-6.0]),
        np.array([6.0]),
    )
    return BenchmarkProblem(problem, np.zeros((N, 1)), box)
