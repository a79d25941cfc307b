"""Ground-truth world: double-integrator dynamics, obstacles, failures.

The world is the single source of truth the sensors sample from. All
states are immutable snapshots; only :meth:`World.advance` produces new
ones, so snapshots taken at step boundaries are safe to share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .errors import ConfigError, InvalidControlError, InvalidStateError
from .geometry import Vec2, ZERO, wrap_angle

# A noise sampler returns one (position, velocity) perturbation pair.
NoiseSampler = Callable[[], tuple[Vec2, Vec2]]


@dataclass(frozen=True)
class TargetState:
    """Planar target position and velocity."""

    p: Vec2
    v: Vec2


@dataclass(frozen=True)
class AgentState:
    """One quadrotor: position, velocity, yaw, liveness."""

    id: int
    p: Vec2
    v: Vec2
    psi: float = 0.0
    alive: bool = True


@dataclass(frozen=True)
class ObstacleSegment:
    """A wall in the plane, given by its two endpoints."""

    a: Vec2
    b: Vec2

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError("obstacle segment endpoints must differ")


class MotionProfile:
    """Velocity command source for the target.

    The target is kinematically driven: its velocity is set by the
    profile each step while its position integrates the previous
    velocity, matching the position row of the double-integrator model.
    """

    def velocity(self, t: float, p: Vec2) -> Vec2:
        raise NotImplementedError


class Stationary(MotionProfile):
    def velocity(self, t: float, p: Vec2) -> Vec2:
        return ZERO


@dataclass
class ScriptedVelocity(MotionProfile):
    """Piecewise-constant velocity given as a time-indexed table."""

    table: Sequence[tuple[float, Vec2]]

    def __post_init__(self):
        times = [t for t, _ in self.table]
        if not self.table or times != sorted(times):
            raise ValueError("velocity table must be non-empty and time-sorted")
        for _, v in self.table:
            if not v.is_finite():
                raise ValueError("velocity table entries must be finite")

    def velocity(self, t: float, p: Vec2) -> Vec2:
        out = self.table[0][1]
        for t_i, v_i in self.table:
            if t_i <= t:
                out = v_i
            else:
                break
        return out


@dataclass
class WaypointPath(MotionProfile):
    """Head toward each waypoint in turn at a fixed speed, then stop.

    Heading changes are rate limited so corners are rounded rather than
    instantaneous velocity flips.
    """

    waypoints: Sequence[Vec2]
    speed: float
    arrival_tolerance: float = 0.15
    max_turn_rate: float = 0.6  # rad/s
    _index: int = field(default=0, repr=False)
    _heading: Optional[float] = field(default=None, repr=False)
    _last_t: float = field(default=0.0, repr=False)

    def __post_init__(self):
        if self.speed <= 0 or not math.isfinite(self.speed):
            raise ValueError("waypoint speed must be positive and finite")
        if not self.waypoints:
            raise ValueError("waypoint list must be non-empty")

    def velocity(self, t: float, p: Vec2) -> Vec2:
        while self._index < len(self.waypoints):
            to_wp = self.waypoints[self._index] - p
            if to_wp.norm() > self.arrival_tolerance:
                desired = math.atan2(to_wp.y, to_wp.x)
                if self._heading is None:
                    self._heading = desired
                else:
                    budget = self.max_turn_rate * max(t - self._last_t, 0.0)
                    err = wrap_angle(desired - self._heading)
                    err = max(-budget, min(budget, err))
                    self._heading = wrap_angle(self._heading + err)
                self._last_t = t
                return Vec2(
                    self.speed * math.cos(self._heading),
                    self.speed * math.sin(self._heading),
                )
            self._index += 1
        return ZERO


def step_target(
    s: TargetState,
    profile: MotionProfile,
    dt: float,
    t: float = 0.0,
    noise: Optional[NoiseSampler] = None,
) -> TargetState:
    """Advance the target one step: p += dt*v, then re-command v."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not (s.p.is_finite() and s.v.is_finite()):
        raise InvalidStateError(f"non-finite target state: {s}")
    n_p, n_v = noise() if noise is not None else (ZERO, ZERO)
    p_next = s.p + dt * s.v + n_p
    v_next = profile.velocity(t + dt, p_next) + n_v
    return TargetState(p=p_next, v=v_next)


def step_agent(
    s: AgentState,
    u: Vec2,
    dt: float,
    noise: Optional[NoiseSampler] = None,
    u_psi: float = 0.0,
) -> AgentState:
    """Advance one agent by the double integrator; dead agents freeze."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    if not s.alive:
        return s
    if not u.is_finite() or not math.isfinite(u_psi):
        raise InvalidControlError(f"non-finite control for agent {s.id}: {u}")
    if not (s.p.is_finite() and s.v.is_finite() and math.isfinite(s.psi)):
        raise InvalidStateError(f"non-finite agent state: {s}")
    n_p, n_v = noise() if noise is not None else (ZERO, ZERO)
    return replace(
        s,
        p=s.p + dt * s.v + n_p,
        v=s.v + dt * u + n_v,
        psi=wrap_angle(s.psi + u_psi),
    )


@dataclass(frozen=True)
class FailureEvent:
    t_fail: float
    agent_id: int


def gaussian_sampler(
    pos_std: float, vel_std: float, rng: np.random.Generator
) -> Optional[NoiseSampler]:
    """Zero-mean diagonal Gaussian process-noise sampler (None if both zero)."""
    if pos_std == 0.0 and vel_std == 0.0:
        return None

    def sample() -> tuple[Vec2, Vec2]:
        n = rng.standard_normal(4)
        return (
            Vec2(pos_std * n[0], pos_std * n[1]),
            Vec2(vel_std * n[2], vel_std * n[3]),
        )

    return sample


class World:
    """Mutable container advancing all ground-truth state.

    Single writer: the scenario runner calls :meth:`advance`; everything
    else reads the frozen snapshots in :attr:`target` and :attr:`agents`.
    """

    def __init__(
        self,
        target: TargetState,
        agents: Sequence[AgentState],
        profile: MotionProfile,
        dt: float,
        obstacles: Sequence[ObstacleSegment] = (),
        target_noise: Optional[NoiseSampler] = None,
        agent_noise: Optional[Mapping[int, NoiseSampler]] = None,
    ):
        if dt <= 0:
            raise ValueError("dt must be positive")
        self.dt = dt
        self.k = 0
        self.target = target
        self.agents: dict[int, AgentState] = {a.id: a for a in agents}
        if len(self.agents) != len(agents):
            raise ConfigError("world.agents", "duplicate agent ids")
        self.profile = profile
        self.obstacles = tuple(obstacles)
        self.target_noise = target_noise
        self.agent_noise = dict(agent_noise or {})
        self.failures: list[FailureEvent] = []

    @property
    def t(self) -> float:
        return self.k * self.dt

    def alive_ids(self) -> list[int]:
        return sorted(i for i, a in self.agents.items() if a.alive)

    def schedule_failure(self, agent_id: int, t_fail: float) -> None:
        """Mark an agent to die at the first step whose time reaches t_fail."""
        if agent_id not in self.agents:
            raise ConfigError(
                "world.failures", f"unknown agent id {agent_id}"
            )
        self.failures.append(FailureEvent(t_fail=t_fail, agent_id=agent_id))
        self.failures.sort(key=lambda f: f.t_fail)

    def apply_due_failures(self) -> list[int]:
        """Kill agents whose failure time has arrived; returns their ids."""
        died = []
        remaining = []
        for ev in self.failures:
            if self.t >= ev.t_fail:
                a = self.agents[ev.agent_id]
                if a.alive:
                    self.agents[ev.agent_id] = replace(a, alive=False)
                    died.append(ev.agent_id)
            else:
                remaining.append(ev)
        self.failures = remaining
        return died

    def advance(self, controls: Mapping[int, tuple[Vec2, float]]) -> None:
        """Apply one step of dynamics with per-agent (u, u_psi) controls."""
        self.target = step_target(
            self.target, self.profile, self.dt, t=self.t, noise=self.target_noise
        )
        for i in sorted(self.agents):
            u, u_psi = controls.get(i, (ZERO, 0.0))
            self.agents[i] = step_agent(
                self.agents[i],
                u,
                self.dt,
                noise=self.agent_noise.get(i),
                u_psi=u_psi,
            )
        self.k += 1


def inject_failure(world: World, agent_id: int, t_fail: float) -> World:
    """Schedule an agent failure; rejects unknown or already-dead agents."""
    if agent_id not in world.agents:
        raise ConfigError("world.failures", f"unknown agent id {agent_id}")
    if not world.agents[agent_id].alive:
        raise ConfigError("world.failures", f"agent {agent_id} is not alive")
    world.schedule_failure(agent_id, t_fail)
    return world
