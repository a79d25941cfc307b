"""Shared discrete double-integrator matrices.

State layout is [px, py, vx, vy]; controls are planar accelerations.
"""

from __future__ import annotations

import numpy as np


def transition_matrix(dt: float) -> np.ndarray:
    """A = [[I, dt*I], [0, I]]."""
    a = np.eye(4)
    a[0, 2] = dt
    a[1, 3] = dt
    return a


def input_matrix(dt: float) -> np.ndarray:
    """B = [[0], [dt*I]]."""
    b = np.zeros((4, 2))
    b[2, 0] = dt
    b[3, 1] = dt
    return b


def position_observation() -> np.ndarray:
    """C = [I 0]: observe the position block of the state."""
    c = np.zeros((2, 4))
    c[0, 0] = 1.0
    c[1, 1] = 1.0
    return c


def symmetrize(m: np.ndarray) -> np.ndarray:
    return 0.5 * (m + m.T)
