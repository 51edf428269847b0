"""Reusable inequality-constraint blocks (g <= 0 componentwise)."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..core import ConstraintSet


class AffineConstraints(ConstraintSet):
    """g = Cx x + Cu u + b. Bound constraints are two rows each."""

    def __init__(self, Cx: np.ndarray, Cu: np.ndarray, b: np.ndarray):
        self.Cx = np.asarray(Cx, dtype=float)
        self.Cu = np.asarray(Cu, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.n_running = self.b.shape[0]

    @staticmethod
    def control_bound(n: int, m: int, index: int, lo: float, hi: float) -> "AffineConstraints":
        """lo <= u[index] <= hi as the two rows u-hi <= 0 and lo-u <= 0."""
        Cx = np.zeros((2, n))
        Cu = np.zeros((2, m))
        Cu[0, index] = 1.0
        Cu[1, index] = -1.0
        return AffineConstraints(Cx, Cu, np.array([-hi, lo]))

    @staticmethod
    def state_bound(n: int, m: int, index: int, lo: float, hi: float) -> "AffineConstraints":
        Cx = np.zeros((2, n))
        Cu = np.zeros((2, m))
        Cx[0, index] = 1.0
        Cx[1, index] = -1.0
        return AffineConstraints(Cx, Cu, np.array([-hi, lo]))

    def evaluate(self, x, u, k):
        return self.Cx @ x + self.Cu @ u + self.b

    def jacobians(self, x, u, k):
        return self.Cx, self.Cu


class CircleObstacles(ConstraintSet):
    """Keep-out circles on two position coordinates of the state.

    Uses the squared-distance form g = r^2 - |p - c|^2, smooth everywhere.
    """

    def __init__(self, n: int, m: int, centers: np.ndarray, radii: np.ndarray, pos_idx=(0, 1)):
        self.n = n
        self.m = m
        self.centers = np.atleast_2d(np.asarray(centers, dtype=float))
        self.radii = np.atleast_1d(np.asarray(radii, dtype=float))
        self.pos_idx = tuple(pos_idx)
        self.n_running = self.centers.shape[0]

    def evaluate(self, x, u, k):
        p = x[list(self.pos_idx)]
        diff = p - self.centers
        return self.radii**2 - np.sum(diff * diff, axis=1)

    def jacobians(self, x, u, k):
        p = x[list(self.pos_idx)]
        gx = np.zeros((self.n_running, self.n))
        diff = p - self.centers
        for axis, col in enumerate(self.pos_idx):
            gx[:, col] = -2.0 * diff[:, axis]
        return gx, np.zeros((self.n_running, self.m))


class StackedConstraints(ConstraintSet):
    """Concatenation of several running-constraint blocks."""

    def __init__(self, blocks: Sequence[ConstraintSet]):
        self.blocks = list(blocks)
        self.n_running = sum(b.n_running for b in self.blocks)

    def evaluate(self, x, u, k):
        return np.concatenate([b.evaluate(x, u, k) for b in self.blocks])

    def jacobians(self, x, u, k):
        parts = [b.jacobians(x, u, k) for b in self.blocks]
        return (
            np.concatenate([gx for gx, _ in parts], axis=0),
            np.concatenate([gu for _, gu in parts], axis=0),
        )
