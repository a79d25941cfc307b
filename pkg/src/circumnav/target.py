"""Per-agent distributed Kalman filter for the agent-target relative state.

Each agent fuses its own camera measurement when the target is visible;
when occluded it falls back to the average of neighbor measurements
shifted by the estimated inter-agent relative positions. The update is
written in information form and adds a consensus term built from
neighbor priors, so estimates stay in agreement across the team.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Mapping, Optional, Sequence

import numpy as np

from .errors import NumericalFailureError
from .geometry import Vec2
from .model import input_matrix, position_observation, symmetrize, transition_matrix
from .relative import RelativeEstimate

FuseMode = Literal["direct", "indirect", "none"]


@dataclass(frozen=True)
class TargetEstimate:
    """Mean and covariance of one agent-target relative state [p; v]."""

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
class NeighborPacket:
    """Everything one neighbor shares for the target filter each step."""

    sender: int
    q: Optional[Vec2] = None
    sigma_q: Optional[np.ndarray] = None
    x_bar: Optional[np.ndarray] = None
    p_minus: Optional[np.ndarray] = None


@dataclass(frozen=True)
class FusedMeasurement:
    """Event-triggered measurement: direct, neighbor-averaged, or absent."""

    mode: FuseMode
    z: Optional[np.ndarray] = None
    sigma: Optional[np.ndarray] = None


@dataclass
class DkfConfig:
    """Target-filter parameters for one agent."""

    dt: float
    q_process: np.ndarray = field(
        default_factory=lambda: np.diag([1e-5, 1e-5, 6e-3, 6e-3])
    )
    sigma_q: np.ndarray = field(default_factory=lambda: 0.01 * np.eye(2))
    epsilon: float = 0.1
    p0: np.ndarray = field(default_factory=lambda: np.diag([1.0, 1.0, 4.0, 4.0]))

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError("consensus gain must lie in (0, 1)")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        self.q_process = np.asarray(self.q_process, dtype=float)
        self.sigma_q = np.asarray(self.sigma_q, dtype=float)
        self.p0 = np.asarray(self.p0, dtype=float)

    def initial_estimate(self, q0: Vec2) -> TargetEstimate:
        """Start from a position measurement with zero assumed velocity."""
        return TargetEstimate(
            x_hat=np.array([q0.x, q0.y, 0.0, 0.0]), p_cov=self.p0.copy()
        )


def indirect_measurement(
    pkt: NeighborPacket, rel: RelativeEstimate
) -> tuple[np.ndarray, np.ndarray]:
    """Shift a neighbor's target measurement by the pairwise estimate."""
    if pkt.q is None or pkt.sigma_q is None:
        raise ValueError("indirect measurement requires the neighbor's q")
    z = pkt.q.as_array() + rel.x_hat[:2]
    sigma = np.asarray(pkt.sigma_q, dtype=float) + rel.p_cov[:2, :2]
    return z, symmetrize(sigma)


def fuse_event_triggered(
    own_q: Optional[Vec2],
    own_sigma: np.ndarray,
    packets: Sequence[NeighborPacket],
    rels: Mapping[int, RelativeEstimate],
) -> FusedMeasurement:
    """Pick the direct measurement, else average the indirect ones."""
    if own_q is not None:
        return FusedMeasurement(
            mode="direct", z=own_q.as_array(), sigma=np.asarray(own_sigma, dtype=float)
        )
    zs = []
    sigmas = []
    for pkt in packets:
        if pkt.q is None or pkt.sender not in rels:
            continue
        z_j, sigma_j = indirect_measurement(pkt, rels[pkt.sender])
        zs.append(z_j)
        sigmas.append(sigma_j)
    if not zs:
        return FusedMeasurement(mode="none")
    m = len(zs)
    z = np.mean(zs, axis=0)
    sigma = sum(sigmas) / (m * m)
    return FusedMeasurement(mode="indirect", z=z, sigma=symmetrize(sigma))


def dkf_predict(
    est: TargetEstimate, u_i_km1: Vec2, cfg: DkfConfig
) -> TargetEstimate:
    """Propagate through the relative dynamics driven by the own control."""
    a = transition_matrix(cfg.dt)
    b = input_matrix(cfg.dt)
    x_bar = a @ est.x_hat + b @ u_i_km1.as_array()
    p_minus = symmetrize(a @ est.p_cov @ a.T + cfg.q_process)
    return TargetEstimate(x_hat=x_bar, p_cov=p_minus)


def neighbor_prior(
    pkt: NeighborPacket, rel: RelativeEstimate
) -> tuple[np.ndarray, np.ndarray]:
    """Translate a neighbor's prior into this agent's relative frame."""
    if pkt.x_bar is None or pkt.p_minus is None:
        raise ValueError("neighbor prior requires the neighbor's prediction")
    x = np.asarray(pkt.x_bar, dtype=float) + rel.x_hat
    p = np.asarray(pkt.p_minus, dtype=float) + rel.p_cov
    return x, symmetrize(p)


def _spd_inverse(m: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.inv(m)
    except np.linalg.LinAlgError:
        try:
            return np.linalg.inv(m + 1e-12 * np.eye(m.shape[0]))
        except np.linalg.LinAlgError as exc:
            raise NumericalFailureError("singular covariance in DKF update") from exc


def dkf_update(
    prior: TargetEstimate,
    fused: FusedMeasurement,
    priors: Sequence[tuple[np.ndarray, np.ndarray]],
    epsilon: float,
) -> TargetEstimate:
    """Information-form update: prior + innovation + consensus.

    With mode "none" the innovation term is dropped entirely and only
    the consensus terms act (graceful degradation when nobody sees the
    target).
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("consensus gain must lie in (0, 1)")
    c = position_observation()
    info = _spd_inverse(prior.p_cov)
    sigma_inv = None
    if fused.mode != "none":
        sigma_inv = _spd_inverse(np.asarray(fused.sigma, dtype=float))
        info = info + c.T @ sigma_inv @ c
    prior_invs = [_spd_inverse(p_j) for _, p_j in priors]
    for p_inv in prior_invs:
        info = info + p_inv
    p_plus = symmetrize(_spd_inverse(symmetrize(info)))
    x_hat = prior.x_hat.copy()
    if fused.mode != "none":
        innovation = np.asarray(fused.z, dtype=float) - c @ prior.x_hat
        x_hat = x_hat + p_plus @ c.T @ sigma_inv @ innovation
    consensus = np.zeros(4)
    for (x_j, _), p_inv in zip(priors, prior_invs):
        consensus = consensus + p_inv @ (np.asarray(x_j, dtype=float) - prior.x_hat)
    x_hat = x_hat + epsilon * p_plus @ consensus
    return TargetEstimate(x_hat=x_hat, p_cov=p_plus)
