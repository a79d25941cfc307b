"""Circumnavigation control: phase negotiation, desired states, feedback.

Orbit slots are negotiated by sinusoidally coupled phase oscillators, so
agents spread evenly around the target without central coordination and
re-spread automatically when the team shrinks. The position controller
combines a saturated consensus term, a saturated radius-regulation term
and an orbit feedforward; yaw control points the camera at the target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ControllerInputError
from .geometry import Vec2, rot2, wrap_angle, wrap_positive


def default_coupling_gains(n: int) -> tuple[float, ...]:
    """Coupling gains that make even phase spacing attracting.

    The first harmonic repels synchronization (positive gain, large
    enough that near-synchronized clusters break up within seconds);
    higher harmonics are weakly negative and strictly decreasing, which
    keeps the splay configuration stable for any team size.
    """
    if n < 1:
        raise ValueError("need at least one agent")
    return tuple([1.3] + [-0.2 - 0.05 * (l - 2) for l in range(2, n + 1)])


@dataclass
class ControllerGains:
    """Formation and yaw gains for one scenario."""

    rho: float = 2.0
    delta_theta: float = 2.0 * math.pi * 0.1 / 30.0
    coupling: tuple[float, ...] = field(default_factory=lambda: default_coupling_gains(3))
    k_p: float = 1.0
    k_v: float = 1.5
    k_rho: float = 0.5
    u1_max: float = 3.0
    u2_max: float = 3.0
    k_psi: float = 0.8

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError("orbit radius must be positive")
        for name in ("k_p", "k_v", "k_rho", "u1_max", "u2_max", "k_psi"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        self.coupling = tuple(self.coupling)

    def coupling_for(self, n_alive: int) -> tuple[float, ...]:
        """Re-truncate (or extend with defaults) to the live team size."""
        if len(self.coupling) >= n_alive:
            return self.coupling[:n_alive]
        return self.coupling + default_coupling_gains(n_alive)[len(self.coupling):]


def oscillator_step(
    theta_i: float,
    thetas: Sequence[float],
    gains: ControllerGains,
    dt: float,
) -> float:
    """Advance one agent's orbit phase by the coupled-oscillator update."""
    n = len(thetas)
    if n < 1:
        raise ValueError("phase list must include at least the agent itself")
    g = gains.coupling_for(n)
    others = np.asarray(thetas, dtype=float)
    coupling = 0.0
    for l in range(1, n + 1):
        coupling += (g[l - 1] / (l * n)) * float(np.sum(np.sin(l * (theta_i - others))))
    return wrap_positive(theta_i + gains.delta_theta + dt * coupling)


def desired_relative_state(
    theta_i: float, gains: ControllerGains, dt: float
) -> tuple[Vec2, Vec2]:
    """Orbit-slot relative position and its one-step-rotation velocity."""
    p_star = Vec2(gains.rho * math.cos(theta_i), gains.rho * math.sin(theta_i))
    r = rot2(gains.delta_theta) - np.eye(2)
    v_star = Vec2.from_array((r @ p_star.as_array()) / dt)
    return p_star, v_star


def desired_inter_agent(
    p_star_i0: Vec2, v_star_i0: Vec2, p_star_j0: Vec2, v_star_j0: Vec2
) -> tuple[Vec2, Vec2]:
    return p_star_i0 - p_star_j0, v_star_i0 - v_star_j0


def saturate(bound: float, u: Vec2) -> Vec2:
    """Clip a vector to the given norm, leaving direction unchanged."""
    if bound <= 0:
        raise ValueError("saturation bound must be positive")
    n = u.norm()
    if n <= bound or n == 0.0:
        return u
    return u * (bound / n)


@dataclass(frozen=True)
class FormationCommand:
    """Control output with its unsaturated components, for logging."""

    u: Vec2
    u1_raw: Vec2
    u2_raw: Vec2
    feedforward: Vec2


def formation_control(
    estimates: Mapping[int, tuple[Vec2, Vec2]],
    desired: Mapping[int, tuple[Vec2, Vec2]],
    gains: ControllerGains,
    dt: float,
) -> FormationCommand:
    """Combine consensus, radius regulation and orbit feedforward.

    ``estimates`` and ``desired`` map j to (position, velocity) pairs for
    every neighbor and for the target under key 0.
    """
    if 0 not in estimates or 0 not in desired:
        raise ControllerInputError("target estimate (key 0) is required")
    missing = set(desired) - set(estimates)
    if missing:
        raise ControllerInputError(f"missing estimates for {sorted(missing)}")
    u1 = Vec2(0.0, 0.0)
    for j, (p_hat, v_hat) in sorted(estimates.items()):
        if j not in desired:
            raise ControllerInputError(f"missing desired state for {j}")
        p_star, v_star = desired[j]
        u1 = u1 - gains.k_p * (p_hat - p_star) - gains.k_v * (v_hat - v_star)
    p_i0, _ = estimates[0]
    u2 = -gains.k_rho * (p_i0.norm() - gains.rho) * p_i0
    _, v_star_i0 = desired[0]
    r = rot2(gains.delta_theta) - np.eye(2)
    ff = Vec2.from_array((r @ v_star_i0.as_array()) / dt)
    u = saturate(gains.u1_max, u1) + saturate(gains.u2_max, u2) + ff
    return FormationCommand(u=u, u1_raw=u1, u2_raw=u2, feedforward=ff)


def pointing_yaw(p_hat_i0: Vec2) -> float:
    """Yaw that aims the camera boresight at the estimated target."""
    return math.atan2(-p_hat_i0.y, -p_hat_i0.x)


def yaw_control(
    psi: float, p_hat_i0: Vec2, k_psi: float, previous: float = 0.0
) -> float:
    """Proportional yaw-rate command toward the pointing yaw.

    A zero relative-position estimate leaves the pointing direction
    undefined; the previous command is held in that case.
    """
    if p_hat_i0.norm() < 1e-12:
        return previous
    error = wrap_angle(psi - pointing_yaw(p_hat_i0))
    return -k_psi * error
