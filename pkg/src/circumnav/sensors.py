"""Simulated onboard sensors: VIO displacement, UWB range, stereo camera.

Every sampler is a pure function of (world snapshot, RNG stream); the
runner hands each sensor its own substream so evaluation order never
changes results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidDepthError
from .geometry import Vec2, line_of_sight, rot2, wrap_angle
from .world import AgentState, ObstacleSegment, TargetState


@dataclass(frozen=True)
class VioMeasurement:
    """Per-step self-displacement and yaw reading."""

    delta: Vec2
    psi: float


def sense_vio(
    p_k: Vec2,
    p_km1: Vec2,
    psi_true: float,
    displacement_std: float = 0.0,
    yaw_std: float = 0.0,
    rng: Optional[np.random.Generator] = None,
) -> VioMeasurement:
    """Measure the displacement over the last step plus Gaussian noise."""
    delta = p_k - p_km1
    psi = psi_true
    if rng is not None and (displacement_std > 0.0 or yaw_std > 0.0):
        n = rng.standard_normal(3)
        delta = delta + Vec2(displacement_std * n[0], displacement_std * n[1])
        psi = wrap_angle(psi + yaw_std * n[2])
    return VioMeasurement(delta=delta, psi=psi)


def relative_displacement(delta_i: Vec2, delta_j: Vec2) -> Vec2:
    """Difference of two same-step displacement measurements."""
    return delta_i - delta_j


@dataclass(frozen=True)
class UwbNoise:
    """Gaussian core contaminated by uniform heavy-tail outliers."""

    sigma: float = 0.12
    outlier_prob: float = 0.02
    outlier_min: float = 0.5
    outlier_max: float = 3.0


def sense_uwb_raw(
    p_i: Vec2,
    p_j: Vec2,
    noise: Optional[UwbNoise] = None,
    rng: Optional[np.random.Generator] = None,
) -> float:
    """One raw range sample between two agents."""
    d = (p_i - p_j).norm()
    if noise is None or rng is None:
        return d
    d += noise.sigma * rng.standard_normal()
    if noise.outlier_prob > 0.0 and rng.random() < noise.outlier_prob:
        magnitude = rng.uniform(noise.outlier_min, noise.outlier_max)
        sign = 1.0 if rng.random() < 0.5 else -1.0
        d += sign * magnitude
    return d


@dataclass(frozen=True)
class UwbStreamState:
    """Outlier-gated, exponentially smoothed range stream.

    The stream runs at ``dt_uwb`` and is downsampled to the estimation
    period ``dt``; ``dt_uwb`` must divide ``dt`` exactly.
    """

    beta: float
    sigma_star: float
    dt_uwb: float
    dt: float
    last_accepted: float = 0.0
    initialized: bool = False

    def __post_init__(self):
        if not 0.0 <= self.beta < 1.0:
            raise ValueError("beta must lie in [0, 1)")
        if self.sigma_star <= 0.0:
            raise ValueError("sigma_star must be positive")
        ratio = self.dt / self.dt_uwb
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ValueError("dt_uwb must divide dt exactly")

    @property
    def substeps_per_sample(self) -> int:
        return int(round(self.dt / self.dt_uwb))


def preprocess_uwb(
    state: UwbStreamState, d_raw: float
) -> tuple[UwbStreamState, float]:
    """Apply the three-sigma outlier gate and exponential smoothing.

    The first sample initializes the stream verbatim. Afterwards a raw
    value further than 3*sigma_star from the last accepted value is
    discarded (hold last); otherwise the accepted value moves by an
    exponentially weighted mean step.
    """
    if not state.initialized:
        return replace(state, last_accepted=d_raw, initialized=True), d_raw
    if abs(d_raw - state.last_accepted) <= 3.0 * state.sigma_star:
        accepted = state.beta * state.last_accepted + (1.0 - state.beta) * d_raw
    else:
        accepted = state.last_accepted
    return replace(state, last_accepted=accepted), accepted


def downsample_uwb(state: UwbStreamState, n: int) -> Optional[float]:
    """Emit the smoothed range when substep n aligns with the step grid."""
    if n % state.substeps_per_sample == 0:
        return state.last_accepted
    return None


def _default_k() -> np.ndarray:
    return np.eye(3)


def _default_rc() -> np.ndarray:
    return np.eye(3)


@dataclass(frozen=True)
class CameraConfig:
    """Stereo rig intrinsics, mounting pose and noise.

    The default mounting translation places the pinhole one meter off
    the motion plane so the projection of planar scenes always has
    positive depth (the chain stays invertible for every pose).
    """

    k_matrix: np.ndarray = None  # type: ignore[assignment]
    r_mount: np.ndarray = None  # type: ignore[assignment]
    t_mount: np.ndarray = None  # type: ignore[assignment]
    fov_half_angle: float = math.radians(45.0)
    max_depth: float = 10.0
    pixel_noise_std: float = 0.0
    depth_noise_std: float = 0.0

    def __post_init__(self):
        object.__setattr__(
            self,
            "k_matrix",
            np.asarray(self.k_matrix if self.k_matrix is not None else _default_k(), dtype=float),
        )
        object.__setattr__(
            self,
            "r_mount",
            np.asarray(self.r_mount if self.r_mount is not None else _default_rc(), dtype=float),
        )
        object.__setattr__(
            self,
            "t_mount",
            np.asarray(
                self.t_mount if self.t_mount is not None else [0.0, 0.0, -1.0],
                dtype=float,
            ),
        )
        if abs(np.linalg.det(self.k_matrix)) < 1e-12:
            raise ValueError("camera intrinsic matrix must be invertible")
        rrt = self.r_mount @ self.r_mount.T
        if not np.allclose(rrt, np.eye(3), atol=1e-9) or np.linalg.det(self.r_mount) < 0:
            raise ValueError("mounting rotation must be orthonormal with det +1")


@dataclass(frozen=True)
class StereoSample:
    """Detector output: pixel coordinates and depth."""

    u: float
    v: float
    depth: float


@dataclass(frozen=True)
class TargetObservation:
    """Back-projected planar relative position (agent minus target)."""

    q: Optional[Vec2]
    visible: bool

    @staticmethod
    def not_visible() -> "TargetObservation":
        return TargetObservation(q=None, visible=False)


def _rz3(psi: float) -> np.ndarray:
    m = np.eye(3)
    m[:2, :2] = rot2(psi)
    return m


def project_relative(q_true: Vec2, psi: float, cfg: CameraConfig) -> Optional[StereoSample]:
    """Forward projection: planar relative position -> (pixel, depth).

    Exact inverse of :func:`backproject` for the z=0 plane. Returns None
    when the pose has non-positive projected depth (chain degenerate).
    """
    local3 = np.array([q_true.x, q_true.y, 0.0])
    cam3 = _rz3(psi) @ local3
    w = cfg.r_mount.T @ (cam3 - cfg.t_mount)
    h = cfg.k_matrix @ w
    depth = h[2]
    if depth <= 1e-12:
        return None
    return StereoSample(u=h[0] / depth, v=h[1] / depth, depth=depth)


def sense_stereo(
    agent: AgentState,
    target: TargetState,
    cfg: CameraConfig,
    obstacles: Sequence[ObstacleSegment] = (),
    rng: Optional[np.random.Generator] = None,
) -> Optional[StereoSample]:
    """Sample the target detector, or None when the target is not visible.

    Visibility requires line of sight, the target within the yaw-aligned
    field-of-view cone, and planar range within max_depth.
    """
    if not agent.alive:
        return None
    if not line_of_sight(agent.p, target.p, obstacles):
        return None
    to_target = target.p - agent.p
    rng_dist = to_target.norm()
    if rng_dist > cfg.max_depth:
        return None
    if rng_dist > 1e-12:
        bearing = math.atan2(to_target.y, to_target.x)
        if abs(wrap_angle(bearing - agent.psi)) > cfg.fov_half_angle:
            return None
    sample = project_relative(agent.p - target.p, agent.psi, cfg)
    if sample is None:
        return None
    if rng is not None and (cfg.pixel_noise_std > 0.0 or cfg.depth_noise_std > 0.0):
        n = rng.standard_normal(3)
        sample = StereoSample(
            u=sample.u + cfg.pixel_noise_std * n[0],
            v=sample.v + cfg.pixel_noise_std * n[1],
            depth=max(sample.depth + cfg.depth_noise_std * n[2], 1e-6),
        )
    return sample


def backproject(
    pixel: tuple[float, float], depth: float, psi: float, cfg: CameraConfig
) -> TargetObservation:
    """Invert the camera chain to the planar relative position.

    camera = R_C K^-1 (u, v, 1)^T depth + T_C, then the inverse yaw
    rotation; the first two components are the planar measurement.
    """
    if depth <= 0.0:
        raise InvalidDepthError(f"depth must be positive, got {depth}")
    uv1 = np.array([pixel[0], pixel[1], 1.0]) * depth
    cam3 = cfg.r_mount @ np.linalg.solve(cfg.k_matrix, uv1) + cfg.t_mount
    local3 = np.linalg.solve(_rz3(psi), cam3)
    return TargetObservation(q=Vec2(local3[0], local3[1]), visible=True)
