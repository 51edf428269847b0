"""Line search over the defect-augmented merit and regularization schedule.

The two mechanisms are coupled: a failed line search sends the solver back
to the backward pass with increased state-value regularization, instead of
terminating the iteration.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

import numpy as np

#: Below this magnitude the merit model predicts no change and the step is
#: treated as a convergence signal rather than divided by.
DV_EPS = 1e-16


def _default_alphas() -> tuple[float, ...]:
    return tuple(0.5**i for i in range(11))


@dataclass(frozen=True)
class LineSearchState:
    """Backtracking schedule and acceptance interval for the ratio test."""

    alphas: tuple[float, ...] = field(default_factory=_default_alphas)
    w: float = 1e-2
    r_lo: float = 1e-4
    r_hi: float = 10.0

    def __post_init__(self):
        if not self.r_lo < self.r_hi:
            raise ValueError("require r_lo < r_hi")
        if any(not 0.0 < a <= 1.0 for a in self.alphas):
            raise ValueError("alphas must lie in (0, 1]")


@dataclass(frozen=True)
class RegState:
    """State-value Hessian regularization mu_v with its growth law."""

    mu_v: float = 0.0
    mu_v0: float = 1e-6
    sigma: float = 10.0
    mu_v_max: float = 1e10

    def __post_init__(self):
        if not 0.0 <= self.mu_v <= self.mu_v_max:
            raise ValueError("require 0 <= mu_v <= mu_v_max")


def expected_reduction(alpha: float, dv1: float, dv2: float, defects: np.ndarray, w: float) -> float:
    """Merit-model change: alpha*dv1 + alpha^2/2*dv2 + w*sum_j d_j'd_j."""
    d = np.asarray(defects, dtype=float)
    return alpha * dv1 + 0.5 * alpha * alpha * dv2 + w * float(np.sum(d * d))


def reduction_ratio(l_new: float, l_old: float, dv: float) -> float:
    """Ratio of actual to expected merit change; caller guards dv != 0."""
    return (l_new - l_old) / dv


class LineSearchKind(Enum):
    ACCEPTED = "accepted"
    CONVERGED = "converged"
    FAILED = "failed"


@dataclass
class LineSearchResult:
    kind: LineSearchKind
    alpha: Optional[float] = None
    ratio: Optional[float] = None
    dv: Optional[float] = None
    payload: object = None


def line_search(
    trial: Callable[[float], Optional[tuple[object, float]]],
    expected: Callable[[float], float],
    l_old: float,
    ls: LineSearchState,
) -> LineSearchResult:
    """Backtrack over the alpha schedule until the ratio test accepts.

    `trial(alpha)` evaluates a forward pass and returns (payload, new merit
    value) or None when the rollout diverged (counted as a rejected trial).
    A negligible expected change at the full step signals convergence.
    """
    for i, alpha in enumerate(ls.alphas):
        dv = expected(alpha)
        if abs(dv) < DV_EPS:
            if i == 0:
                return LineSearchResult(LineSearchKind.CONVERGED, dv=dv)
            continue
        out = trial(alpha)
        if out is None:
            continue
        payload, l_new = out
        r = reduction_ratio(l_new, l_old, dv)
        if ls.r_lo <= r <= ls.r_hi:
            return LineSearchResult(LineSearchKind.ACCEPTED, alpha=alpha, ratio=r, dv=dv, payload=payload)
    return LineSearchResult(LineSearchKind.FAILED)


def bump_regularization(reg: RegState) -> Optional[RegState]:
    """Grow mu_v geometrically after a failed line search or backward pass.

    Returns None when already at the cap (caller reports the solve as
    regularization-capped).
    """
    if reg.mu_v >= reg.mu_v_max:
        return None
    base = max(reg.mu_v, reg.mu_v0)
    return RegState(min(reg.sigma * base, reg.mu_v_max), reg.mu_v0, reg.sigma, reg.mu_v_max)


def decay_regularization(reg: RegState) -> RegState:
    """Shrink mu_v after an accepted full step, snapping to zero below mu_v0."""
    new = reg.mu_v / reg.sigma
    if new < reg.mu_v0:
        new = 0.0
    return RegState(new, reg.mu_v0, reg.sigma, reg.mu_v_max)
