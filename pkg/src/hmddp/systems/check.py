"""Finite-difference verification of analytic derivatives."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class CheckEntry:
    name: str
    max_rel_err: float
    passed: bool


@dataclass
class DerivativeReport:
    entries: list[CheckEntry] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def add(self, name: str, analytic_list, fd_list, tol: float) -> None:
        worst = 0.0
        for a, fd in zip(analytic_list, fd_list):
            a = np.asarray(a, dtype=float)
            fd = np.asarray(fd, dtype=float)
            scale = max(1.0, float(np.max(np.abs(a))) if a.size else 0.0)
            if a.size:
                worst = max(worst, float(np.max(np.abs(a - fd))) / scale)
        self.entries.append(CheckEntry(name, worst, worst <= tol))

    def lines(self) -> list[str]:
        return [
            f"{e.name:<8s} {'PASS' if e.passed else 'FAIL'}  max_rel_err={e.max_rel_err:.3e}"
            for e in self.entries
        ]


def _fd_steps(v: np.ndarray) -> np.ndarray:
    return 1e-6 * (1.0 + np.abs(v))


def central_jacobian(fun, v: np.ndarray) -> np.ndarray:
    """Central-difference Jacobian of fun w.r.t. v (per-coordinate steps)."""
    steps = _fd_steps(v)
    cols = []
    for i in range(v.shape[0]):
        vp, vm = v.copy(), v.copy()
        vp[i] += steps[i]
        vm[i] -= steps[i]
        cols.append((np.asarray(fun(vp)) - np.asarray(fun(vm))) / (2.0 * steps[i]))
    return np.stack(cols, axis=-1)


def _sample(rng, lo, hi):
    return lo + rng.random(lo.shape[0]) * (hi - lo)


def check_dynamics(dyn, box, samples=100, seed=0, tol=1e-5) -> DerivativeReport:
    x_lo, x_hi, u_lo, u_hi = box
    rng = np.random.default_rng(seed)
    report = DerivativeReport()
    fx_a, fx_f, fu_a, fu_f = [], [], [], []
    for _ in range(samples):
        x, u = _sample(rng, x_lo, x_hi), _sample(rng, u_lo, u_hi)
        fx, fu = dyn.jacobians(x, u)
        fx_a.append(fx)
        fu_a.append(fu)
        fx_f.append(central_jacobian(lambda v: dyn.step(v, u), x))
        fu_f.append(central_jacobian(lambda v: dyn.step(x, v), u))
    report.add("fx", fx_a, fx_f, tol)
    report.add("fu", fu_a, fu_f, tol)
    return report


def check_cost(cost, box, samples=100, seed=0, tol=1e-5) -> DerivativeReport:
    x_lo, x_hi, u_lo, u_hi = box
    rng = np.random.default_rng(seed)
    report = DerivativeReport()
    acc: dict[str, tuple[list, list]] = {
        name: ([], []) for name in ("lx", "lu", "lxx", "luu", "lux", "lfx", "lfxx")
    }
    for _ in range(samples):
        x, u = _sample(rng, x_lo, x_hi), _sample(rng, u_lo, u_hi)
        lx, lu, lxx, luu, lux = cost.running_derivatives(x, u, 0)
        acc["lx"][0].append(lx)
        acc["lx"][1].append(central_jacobian(lambda v: cost.running(v, u, 0), x))
        acc["lu"][0].append(lu)
        acc["lu"][1].append(central_jacobian(lambda v: cost.running(x, v, 0), u))
        # Second derivatives are differenced from the analytic gradient.
        acc["lxx"][0].append(lxx)
        acc["lxx"][1].append(central_jacobian(lambda v: cost.running_derivatives(v, u, 0)[0], x))
        acc["luu"][0].append(luu)
        acc["luu"][1].append(central_jacobian(lambda v: cost.running_derivatives(x, v, 0)[1], u))
        acc["lux"][0].append(lux)
        acc["lux"][1].append(central_jacobian(lambda v: cost.running_derivatives(v, u, 0)[1], x))
        lfx, lfxx = cost.terminal_derivatives(x)
        acc["lfx"][0].append(lfx)
        acc["lfx"][1].append(central_jacobian(lambda v: cost.terminal(v), x))
        acc["lfxx"][0].append(lfxx)
        acc["lfxx"][1].append(central_jacobian(lambda v: cost.terminal_derivatives(v)[0], x))
    for name, (analytic, fd) in acc.items():
        report.add(name, analytic, fd, tol)
    return report


def check_constraints(cons, box, samples=100, seed=0, tol=1e-5) -> DerivativeReport:
    x_lo, x_hi, u_lo, u_hi = box
    rng = np.random.default_rng(seed)
    report = DerivativeReport()
    if cons.n_running > 0:
        gx_a, gx_f, gu_a, gu_f = [], [], [], []
        for _ in range(samples):
            x, u = _sample(rng, x_lo, x_hi), _sample(rng, u_lo, u_hi)
            gx, gu = cons.jacobians(x, u, 0)
            gx_a.append(gx)
            gu_a.append(gu)
            gx_f.append(central_jacobian(lambda v: cons.evaluate(v, u, 0), x))
            gu_f.append(central_jacobian(lambda v: cons.evaluate(x, v, 0), u))
        report.add("gx", gx_a, gx_f, tol)
        report.add("gu", gu_a, gu_f, tol)
    if cons.n_terminal > 0:
        gN_a, gN_f = [], []
        for _ in range(samples):
            x = _sample(rng, x_lo, x_hi)
            gN_a.append(cons.terminal_jacobian(x))
            gN_f.append(central_jacobian(lambda v: cons.evaluate_terminal(v), x))
        report.add("gN_x", gN_a, gN_f, tol)
    return report


def check_derivatives(model, box, samples: int = 100, seed: int = 0, tol: float = 1e-5) -> DerivativeReport:
    """Dispatch on the model interface: dynamics, cost or constraint set."""
    if hasattr(model, "step"):
        return check_dynamics(model, box, samples, seed, tol)
    if hasattr(model, "running_derivatives"):
        return check_cost(model, box, samples, seed, tol)
    if hasattr(model, "evaluate"):
        return check_constraints(model, box, samples, seed, tol)
    raise TypeError(f"cannot derivative-check object of type {type(model).__name__}")
