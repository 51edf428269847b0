"""Shared helpers for the benchmark system builders."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ProblemDefinition


@dataclass
class BenchmarkProblem:
    """A ready-to-solve problem plus its initial controls and the sampling
    box used by the derivative checker (x_lo, x_hi, u_lo, u_hi)."""

    problem: ProblemDefinition
    u_init: np.ndarray
    box: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


def diag_cost(cfg: dict, n: int, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Diagonal weight matrices q*I, r*I, qf*I from a manifest section."""
    q = float(cfg.get("q", 1.0))
    r = float(cfg.get("r", 0.1))
    qf = float(cfg.get("qf", 50.0))
    return q * np.eye(n), r * np.eye(m), qf * np.eye(n)
