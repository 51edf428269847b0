"""Fixed-step RK4 discretization with analytic Jacobian propagation."""

from __future__ import annotations

import abc

import numpy as np

from ..core import DynamicsModel


class ContinuousDynamics(abc.ABC):
    """Smooth vector field dx/dt = vf(x, u) with analytic Jacobians."""

    n: int
    m: int

    @abc.abstractmethod
    def vf(self, x: np.ndarray, u: np.ndarray) -> np.ndarray: ...

    @abc.abstractmethod
    def vf_jacobians(self, x: np.ndarray, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Return (d vf/dx, d vf/du)."""


class RK4Dynamics(DynamicsModel):
    """One classical Runge-Kutta step as the discrete transition map.

    Jacobians are propagated through the stages by the chain rule, so they
    are exact derivatives of the discrete map (not a discretization of the
    continuous sensitivities).
    """

    def __init__(self, cont: ContinuousDynamics, dt: float):
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.cont = cont
        self.dt = float(dt)
        self.n = cont.n
        self.m = cont.m

    def step(self, x, u):
        h = self.dt
        f = self.cont.vf
        k1 = f(x, u)
        k2 = f(x + 0.5 * h * k1, u)
        k3 = f(x + 0.5 * h * k2, u)
        k4 = f(x + h * k3, u)
        return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    def jacobians(self, x, u):
        h = self.dt
        f = self.cont.vf
        jac = self.cont.vf_jacobians
        eye = np.eye(self.n)

        k1 = f(x, u)
        a1, b1 = jac(x, u)
        x2 = x + 0.5 * h * k1
        a2s, b2s = jac(x2, u)
        a2 = a2s @ (eye + 0.5 * h * a1)
        b2 = a2s @ (0.5 * h * b1) + b2s
        x3 = x + 0.5 * h * f(x2, u)
        a3s, b3s = jac(x3, u)
        a3 = a3s @ (eye + 0.5 * h * a2)
        b3 = a3s @ (0.5 * h * b2) + b3s
        x4 = x + h * f(x3, u)
        a4s, b4s = jac(x4, u)
        a4 = a4s @ (eye + h * a3)
        b4 = a4s @ (h * b3) + b4s

        fx = eye + (h / 6.0) * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        fu = (h / 6.0) * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
        return fx, fu


def discretize(cont: ContinuousDynamics, dt: float) -> RK4Dynamics:
    return RK4Dynamics(cont, dt)
