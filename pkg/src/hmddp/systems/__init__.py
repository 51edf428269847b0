"""Benchmark dynamics, constraints and derivative-verification utilities."""

from . import car2d, cartpole, linear, quadrotor
from .check import check_derivatives
from .common import BenchmarkProblem
from .discretize import ContinuousDynamics, RK4Dynamics, discretize
from .linear import lqr_fixture, riccati_gains

BUILDERS = {
    "cartpole": cartpole.build,
    "car2d": car2d.build,
    "quadrotor": quadrotor.build,
    "lqr": linear.build,
    "custom-linear": linear.build_custom,
}

__all__ = [
    "BUILDERS",
    "BenchmarkProblem",
    "ContinuousDynamics",
    "RK4Dynamics",
    "check_derivatives",
    "discretize",
    "lqr_fixture",
    "riccati_gains",
]
