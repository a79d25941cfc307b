"""Inter-agent relative state estimation.

The range/displacement fusion filter linearizes the squared-range
difference into a pseudo-measurement whose regressor is the measured
relative displacement. Because that regressor is itself noisy, the
filter variant here inflates the measurement covariance by a
tanh-scheduled quadratic form of the predicted relative position, which
reduces the bias a fixed-covariance filter incurs. A fixed-covariance
("classical") variant and a forgetting-factor RLS baseline are provided
for benchmarking.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import InvalidMeasurementError, NumericalFailureError
from .geometry import Vec2
from .model import input_matrix, symmetrize, transition_matrix


@dataclass(frozen=True)
class RelativeEstimate:
    """Mean and covariance of one pairwise relative state [p; v]."""

    x_hat: np.ndarray
    p_cov: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x_hat", np.asarray(self.x_hat, dtype=float).reshape(4))
        object.__setattr__(self, "p_cov", np.asarray(self.p_cov, dtype=float).reshape(4, 4))

    @property
    def position(self) -> Vec2:
        return Vec2(self.x_hat[0], self.x_hat[1])

    @property
    def velocity(self) -> Vec2:
        return Vec2(self.x_hat[2], self.x_hat[3])


@dataclass(frozen=True)
class MeasurementBundle:
    """Composite measurement z = [y; xi] with its matrix and covariance."""

    z: np.ndarray
    h: np.ndarray
    sigma: np.ndarray


@dataclass
class EstimatorConfig:
    """Filter parameters for one agent pair."""

    dt: float
    q_process: np.ndarray = field(default_factory=lambda: 2e-4 * np.eye(4))
    sigma_star: np.ndarray = field(
        default_factory=lambda: np.diag([0.025, 0.002, 0.002])
    )
    sigma_delta: np.ndarray = field(default_factory=lambda: 0.002 * np.eye(2))
    a: float = 0.05
    p0: np.ndarray = field(default_factory=lambda: np.diag([25.0, 25.0, 1.0, 1.0]))

    def __post_init__(self):
        if not 0.0 < self.a < 1.0:
            raise ValueError("tanh rate a must lie in (0, 1)")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        self.q_process = np.asarray(self.q_process, dtype=float)
        self.sigma_star = np.asarray(self.sigma_star, dtype=float)
        self.sigma_delta = np.asarray(self.sigma_delta, dtype=float)
        self.p0 = np.asarray(self.p0, dtype=float)

    def initial_estimate(self, x0: Optional[np.ndarray] = None) -> RelativeEstimate:
        x = np.zeros(4) if x0 is None else np.asarray(x0, dtype=float)
        return RelativeEstimate(x_hat=x, p_cov=self.p0.copy())


def build_measurement(
    d_k: float,
    d_km1: float,
    delta_ij: Vec2,
    u_ij_km1: Vec2,
    cfg: EstimatorConfig,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Form the scalar range pseudo-measurement, the displacement row and H."""
    if d_k < 0.0 or d_km1 < 0.0:
        raise InvalidMeasurementError("range measurements must be non-negative")
    d = delta_ij.as_array()
    y = 0.5 * (d_k * d_k - d_km1 * d_km1 - float(d @ d))
    xi = d + cfg.dt * cfg.dt * u_ij_km1.as_array()
    h = np.zeros((3, 4))
    h[0, :2] = d
    h[1, 2] = cfg.dt
    h[2, 3] = cfg.dt
    return y, xi, h


def measurement_covariance(
    p_bar: np.ndarray, k: int, cfg: EstimatorConfig
) -> np.ndarray:
    """Time-varying covariance: tanh-weighted position quadratic plus base."""
    if k < 0:
        raise ValueError("step index must be non-negative")
    p = np.asarray(p_bar, dtype=float).reshape(2)
    inflation = math.tanh(cfg.a * k) * float(p @ cfg.sigma_delta @ p)
    sigma = cfg.sigma_star.copy()
    sigma[0, 0] += inflation
    return sigma


def predict(
    est: RelativeEstimate, u_ij_km1: Vec2, cfg: EstimatorConfig
) -> RelativeEstimate:
    """Propagate mean and covariance through the relative dynamics."""
    a = transition_matrix(cfg.dt)
    b = input_matrix(cfg.dt)
    x_bar = a @ est.x_hat + b @ u_ij_km1.as_array()
    p_minus = symmetrize(a @ est.p_cov @ a.T + cfg.q_process)
    return RelativeEstimate(x_hat=x_bar, p_cov=p_minus)


def _joseph_update(
    p_minus: np.ndarray, gain: np.ndarray, h: np.ndarray, sigma: np.ndarray
) -> np.ndarray:
    ikh = np.eye(p_minus.shape[0]) - gain @ h
    return symmetrize(ikh @ p_minus @ ikh.T + gain @ sigma @ gain.T)


def correct(est: RelativeEstimate, m: MeasurementBundle) -> RelativeEstimate:
    """Kalman correction with Joseph-form covariance update."""
    s = m.h @ est.p_cov @ m.h.T + m.sigma
    pht = est.p_cov @ m.h.T
    try:
        gain = np.linalg.solve(s.T, pht.T).T
    except np.linalg.LinAlgError:
        try:
            gain = np.linalg.solve(
                (s + 1e-12 * np.eye(s.shape[0])).T, pht.T
            ).T
        except np.linalg.LinAlgError as exc:
            raise NumericalFailureError("singular innovation covariance") from exc
    x_hat = est.x_hat + gain @ (m.z - m.h @ est.x_hat)
    p_plus = _joseph_update(est.p_cov, gain, m.h, m.sigma)
    return RelativeEstimate(x_hat=x_hat, p_cov=p_plus)


def step_modified_kf(
    est: RelativeEstimate,
    d_k: float,
    d_km1: float,
    delta_ij: Vec2,
    u_ij_km1: Vec2,
    k: int,
    cfg: EstimatorConfig,
) -> RelativeEstimate:
    """One predict/correct cycle with the inflated measurement covariance."""
    prior = predict(est, u_ij_km1, cfg)
    y, xi, h = build_measurement(d_k, d_km1, delta_ij, u_ij_km1, cfg)
    sigma = measurement_covariance(prior.x_hat[:2], k, cfg)
    bundle = MeasurementBundle(z=np.array([y, xi[0], xi[1]]), h=h, sigma=sigma)
    return correct(prior, bundle)


def step_classical_kf(
    est: RelativeEstimate,
    d_k: float,
    d_km1: float,
    delta_ij: Vec2,
    u_ij_km1: Vec2,
    k: int,
    cfg: EstimatorConfig,
) -> RelativeEstimate:
    """Same pipeline with the base covariance held fixed for all k."""
    prior = predict(est, u_ij_km1, cfg)
    y, xi, h = build_measurement(d_k, d_km1, delta_ij, u_ij_km1, cfg)
    bundle = MeasurementBundle(
        z=np.array([y, xi[0], xi[1]]), h=h, sigma=cfg.sigma_star.copy()
    )
    return correct(prior, bundle)


@dataclass(frozen=True)
class RlsState:
    """Forgetting-factor least-squares state for the position block."""

    p_hat: np.ndarray
    p_cov: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "p_hat", np.asarray(self.p_hat, dtype=float).reshape(2))
        object.__setattr__(self, "p_cov", np.asarray(self.p_cov, dtype=float).reshape(2, 2))

    @property
    def position(self) -> Vec2:
        return Vec2(self.p_hat[0], self.p_hat[1])


def initial_rls(p0_scale: float = 25.0) -> RlsState:
    return RlsState(p_hat=np.zeros(2), p_cov=p0_scale * np.eye(2))


def rls_update(state: RlsState, phi: np.ndarray, y: float, forgetting: float) -> RlsState:
    """Plain exponentially forgetting RLS step on y = phi . p."""
    phi = np.asarray(phi, dtype=float).reshape(2)
    den = forgetting + float(phi @ state.p_cov @ phi)
    if den <= 1e-15:
        return state
    gain = state.p_cov @ phi / den
    p_hat = state.p_hat + gain * (y - float(phi @ state.p_hat))
    p_cov = (state.p_cov - np.outer(gain, phi @ state.p_cov)) / forgetting
    return RlsState(p_hat=p_hat, p_cov=symmetrize(p_cov))


def step_rls(
    state: RlsState,
    d_k: float,
    d_km1: float,
    delta_ij: Vec2,
    u_ij_km1: Vec2,
    forgetting: float,
    cfg: EstimatorConfig,
) -> RlsState:
    """RLS on the range pseudo-measurement with displacement compensation.

    The pseudo-measurement constrains the previous relative position
    along the displacement direction; the estimate is updated first and
    then shifted by the measured displacement, so noiseless streams
    converge exactly under persistent excitation.
    """
    if not 0.0 < forgetting <= 1.0:
        raise ValueError("forgetting factor must lie in (0, 1]")
    y, _, _ = build_measurement(d_k, d_km1, delta_ij, u_ij_km1, cfg)
    updated = rls_update(state, delta_ij.as_array(), y, forgetting)
    return RlsState(
        p_hat=updated.p_hat + delta_ij.as_array(), p_cov=updated.p_cov
    )
