"""Scenario configuration: TOML schema, validation, builtin scenarios."""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np
import tomlkit

if sys.version_info >= (3, 11):
    import tomllib as _toml
else:
    import tomli as _toml

from .controller import ControllerGains, default_coupling_gains
from .errors import ConfigError
from .geometry import Vec2
from .relative import EstimatorConfig
from .sensors import CameraConfig, UwbNoise
from .target import DkfConfig
from .world import (
    FailureEvent,
    MotionProfile,
    ObstacleSegment,
    ScriptedVelocity,
    Stationary,
    WaypointPath,
)

SCHEMA_VERSION = 1


@dataclass
class ProfileConfig:
    kind: str = "stationary"  # stationary | waypoints | scripted
    waypoints: list[Vec2] = field(default_factory=list)
    speed: float = 0.25
    table: list[tuple[float, Vec2]] = field(default_factory=list)

    def build(self) -> MotionProfile:
        if self.kind == "stationary":
            return Stationary()
        if self.kind == "waypoints":
            return WaypointPath(waypoints=list(self.waypoints), speed=self.speed)
        if self.kind == "scripted":
            return ScriptedVelocity(table=list(self.table))
        raise ConfigError("world.target.profile", f"unknown profile kind {self.kind!r}")


@dataclass
class AgentInit:
    p: Vec2
    v: Vec2
    psi: float = 0.0


@dataclass
class WorldSection:
    n_agents: int = 2
    dt: float = 0.1
    duration: float = 60.0
    target_p: Vec2 = field(default_factory=lambda: Vec2(0.0, 0.0))
    target_v: Vec2 = field(default_factory=lambda: Vec2(0.0, 0.0))
    profile: ProfileConfig = field(default_factory=ProfileConfig)
    agents: list[AgentInit] = field(default_factory=list)
    obstacles: list[ObstacleSegment] = field(default_factory=list)
    failures: list[FailureEvent] = field(default_factory=list)
    target_pos_std: float = 0.0
    target_vel_std: float = 0.0
    agent_pos_std: float = 0.0
    agent_vel_std: float = 0.0


@dataclass
class VioSection:
    displacement_std: float = 0.0
    yaw_std: float = 0.0


@dataclass
class UwbSection:
    sigma: float = 0.12
    outlier_prob: float = 0.02
    outlier_min: float = 0.5
    outlier_max: float = 3.0
    dt_uwb: float = 0.005
    beta: float = 0.8
    sigma_star: float = 0.1

    def noise(self) -> UwbNoise:
        return UwbNoise(
            sigma=self.sigma,
            outlier_prob=self.outlier_prob,
            outlier_min=self.outlier_min,
            outlier_max=self.outlier_max,
        )


@dataclass
class CameraSection:
    fov_half_angle_deg: float = 45.0
    max_depth: float = 10.0
    pixel_noise_std: float = 0.0
    depth_noise_std: float = 0.0
    virtual_height: float = 1.0

    def build(self) -> CameraConfig:
        return CameraConfig(
            t_mount=np.array([0.0, 0.0, -self.virtual_height]),
            fov_half_angle=math.radians(self.fov_half_angle_deg),
            max_depth=self.max_depth,
            pixel_noise_std=self.pixel_noise_std,
            depth_noise_std=self.depth_noise_std,
        )


@dataclass
class RelativeSection:
    q_diag: list[float] = field(default_factory=lambda: [2e-4] * 4)
    sigma_star_diag: list[float] = field(default_factory=lambda: [0.025, 0.002, 0.002])
    sigma_delta_diag: list[float] = field(default_factory=lambda: [0.002, 0.002])
    a: float = 0.05
    p0_diag: list[float] = field(default_factory=lambda: [25.0, 25.0, 1.0, 1.0])
    init: str = "zero"  # zero | true-geometry
    rls_forgetting: float = 0.9

    def build(self, dt: float) -> EstimatorConfig:
        return EstimatorConfig(
            dt=dt,
            q_process=np.diag(self.q_diag),
            sigma_star=np.diag(self.sigma_star_diag),
            sigma_delta=np.diag(self.sigma_delta_diag),
            a=self.a,
            p0=np.diag(self.p0_diag),
        )


@dataclass
class TargetSection:
    q_diag: list[float] = field(default_factory=lambda: [1e-5, 1e-5, 6e-3, 6e-3])
    sigma_q_diag: list[float] = field(default_factory=lambda: [0.01, 0.01])
    epsilon: float = 0.1
    p0_diag: list[float] = field(default_factory=lambda: [1.0, 1.0, 4.0, 4.0])

    def build(self, dt: float) -> DkfConfig:
        return DkfConfig(
            dt=dt,
            q_process=np.diag(self.q_diag),
            sigma_q=np.diag(self.sigma_q_diag),
            epsilon=self.epsilon,
            p0=np.diag(self.p0_diag),
        )


@dataclass
class ControllerSection:
    mode: str = "cooperative"  # cooperative | scripted-circle
    rho: float = 2.0
    orbit_period: float = 30.0
    coupling: Optional[list[float]] = None
    k_p: float = 1.0
    k_v: float = 1.5
    k_rho: float = 0.5
    u1_max: float = 3.0
    u2_max: float = 3.0
    k_psi: float = 0.8

    def build(self, dt: float, n_agents: int) -> ControllerGains:
        coupling = (
            tuple(self.coupling)
            if self.coupling is not None
            else default_coupling_gains(n_agents)
        )
        return ControllerGains(
            rho=self.rho,
            delta_theta=2.0 * math.pi * dt / self.orbit_period,
            coupling=coupling,
            k_p=self.k_p,
            k_v=self.k_v,
            k_rho=self.k_rho,
            u1_max=self.u1_max,
            u2_max=self.u2_max,
            k_psi=self.k_psi,
        )


@dataclass
class CommsSection:
    loss_prob: float = 0.0
    delay_steps: int = 0
    topology: str = "full"  # full | ring


@dataclass
class LoggingSection:
    uwb_trace: bool = False
    message_trace: bool = False


@dataclass
class ScenarioConfig:
    name: str
    seed: int
    schema_version: int = SCHEMA_VERSION
    out_dir: str = ""
    world: WorldSection = field(default_factory=WorldSection)
    vio: VioSection = field(default_factory=VioSection)
    uwb: UwbSection = field(default_factory=UwbSection)
    camera: CameraSection = field(default_factory=CameraSection)
    relative_estimator: RelativeSection = field(default_factory=RelativeSection)
    target_estimator: TargetSection = field(default_factory=TargetSection)
    controller: ControllerSection = field(default_factory=ControllerSection)
    comms: CommsSection = field(default_factory=CommsSection)
    logging: LoggingSection = field(default_factory=LoggingSection)


# ---------------------------------------------------------------------------
# validation helpers

_MISSING = object()


def _get(table: dict, key: str, path: str, kind, default=_MISSING):
    if key not in table:
        if default is _MISSING:
            raise ConfigError(f"{path}.{key}" if path else key, "required field missing")
        return default
    value = table[key]
    if kind is float and isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if kind is int and isinstance(value, int) and not isinstance(value, bool):
        return int(value)
    if not isinstance(value, kind):
        raise ConfigError(
            f"{path}.{key}" if path else key,
            f"expected {kind.__name__}, got {type(value).__name__}",
        )
    return value


def _vec2(raw: Any, path: str) -> Vec2:
    if not isinstance(raw, (list, tuple)) or len(raw) != 2:
        raise ConfigError(path, "expected a [x, y] pair")
    try:
        return Vec2(float(raw[0]), float(raw[1]))
    except (TypeError, ValueError):
        raise ConfigError(path, "expected numeric components") from None


def _floats(raw: Any, path: str, length: Optional[int] = None) -> list[float]:
    if not isinstance(raw, (list, tuple)):
        raise ConfigError(path, "expected an array of numbers")
    if length is not None and len(raw) != length:
        raise ConfigError(path, f"expected {length} entries, got {len(raw)}")
    out = []
    for i, v in enumerate(raw):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{path}[{i}]", "expected a number")
        out.append(float(v))
    return out


def _validate(cfg: ScenarioConfig) -> ScenarioConfig:
    w = cfg.world
    if cfg.schema_version != SCHEMA_VERSION:
        raise ConfigError("schema_version", f"unsupported version {cfg.schema_version}")
    if w.dt <= 0:
        raise ConfigError("world.dt", "must be positive")
    if w.duration <= 0:
        raise ConfigError("world.duration", "must be positive")
    if w.n_agents < 1:
        raise ConfigError("world.n_agents", "need at least one agent")
    if len(w.agents) != w.n_agents:
        raise ConfigError(
            "world.agents",
            f"expected {w.n_agents} initial agent states, got {len(w.agents)}",
        )
    for ev in w.failures:
        if not 1 <= ev.agent_id <= w.n_agents:
            raise ConfigError("world.failures", f"unknown agent id {ev.agent_id}")
    ratio = w.dt / cfg.uwb.dt_uwb
    if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
        raise ConfigError("sensors.uwb.dt_uwb", "must divide world.dt exactly")
    if not 0.0 <= cfg.uwb.beta < 1.0:
        raise ConfigError("sensors.uwb.beta", "must lie in [0, 1)")
    if cfg.uwb.sigma_star <= 0:
        raise ConfigError("sensors.uwb.sigma_star", "must be positive")
    if not 0.0 < cfg.relative_estimator.a < 1.0:
        raise ConfigError("relative_estimator.a", "must lie in (0, 1)")
    if cfg.relative_estimator.init not in ("zero", "true-geometry"):
        raise ConfigError("relative_estimator.init", f"unknown mode {cfg.relative_estimator.init!r}")
    if not 0.0 < cfg.relative_estimator.rls_forgetting <= 1.0:
        raise ConfigError("relative_estimator.rls_forgetting", "must lie in (0, 1]")
    if not 0.0 < cfg.target_estimator.epsilon < 1.0:
        raise ConfigError("target_estimator.epsilon", "must lie in (0, 1)")
    if cfg.controller.mode not in ("cooperative", "scripted-circle"):
        raise ConfigError("controller.mode", f"unknown mode {cfg.controller.mode!r}")
    if cfg.controller.orbit_period <= 0:
        raise ConfigError("controller.orbit_period", "must be positive")
    if cfg.comms.topology not in ("full", "ring"):
        raise ConfigError("comms.topology", f"unknown topology {cfg.comms.topology!r}")
    if not 0.0 <= cfg.comms.loss_prob <= 1.0:
        raise ConfigError("comms.loss_prob", "must lie in [0, 1]")
    if cfg.comms.delay_steps < 0:
        raise ConfigError("comms.delay_steps", "must be non-negative")
    return cfg


# ---------------------------------------------------------------------------
# parsing

def from_dict(raw: dict) -> ScenarioConfig:
    name = _get(raw, "name", "", str)
    if "seed" not in raw:
        raise ConfigError("seed", "required field missing (all runs are seeded)")
    seed = _get(raw, "seed", "", int)
    schema_version = _get(raw, "schema_version", "", int, default=SCHEMA_VERSION)
    out_dir = _get(raw, "out_dir", "", str, default="")

    wt = _get(raw, "world", "", dict, default={})
    target_tbl = _get(wt, "target", "world", dict, default={})
    profile = ProfileConfig(
        kind=_get(target_tbl, "profile", "world.target", str, default="stationary"),
        waypoints=[
            _vec2(p, f"world.target.waypoints[{i}]")
            for i, p in enumerate(_get(target_tbl, "waypoints", "world.target", list, default=[]))
        ],
        speed=_get(target_tbl, "speed", "world.target", float, default=0.25),
        table=[
            (float(row[0]), _vec2(row[1:], f"world.target.table[{i}]"))
            for i, row in enumerate(_get(target_tbl, "table", "world.target", list, default=[]))
        ],
    )
    agents = []
    for i, a in enumerate(_get(wt, "agents", "world", list, default=[])):
        if not isinstance(a, dict):
            raise ConfigError(f"world.agents[{i}]", "expected a table")
        agents.append(
            AgentInit(
                p=_vec2(_get(a, "p", f"world.agents[{i}]", list), f"world.agents[{i}].p"),
                v=_vec2(_get(a, "v", f"world.agents[{i}]", list, default=[0.0, 0.0]), f"world.agents[{i}].v"),
                psi=_get(a, "psi", f"world.agents[{i}]", float, default=0.0),
            )
        )
    obstacles = []
    for i, o in enumerate(_get(wt, "obstacles", "world", list, default=[])):
        if not isinstance(o, dict):
            raise ConfigError(f"world.obstacles[{i}]", "expected a table")
        obstacles.append(
            ObstacleSegment(
                a=_vec2(_get(o, "a", f"world.obstacles[{i}]", list), f"world.obstacles[{i}].a"),
                b=_vec2(_get(o, "b", f"world.obstacles[{i}]", list), f"world.obstacles[{i}].b"),
            )
        )
    failures = []
    for i, f in enumerate(_get(wt, "failures", "world", list, default=[])):
        if not isinstance(f, dict):
            raise ConfigError(f"world.failures[{i}]", "expected a table")
        failures.append(
            FailureEvent(
                t_fail=_get(f, "t", f"world.failures[{i}]", float),
                agent_id=_get(f, "agent", f"world.failures[{i}]", int),
            )
        )
    world = WorldSection(
        n_agents=_get(wt, "n_agents", "world", int, default=len(agents) or 2),
        dt=_get(wt, "dt", "world", float, default=0.1),
        duration=_get(wt, "duration", "world", float, default=60.0),
        target_p=_vec2(_get(target_tbl, "p", "world.target", list, default=[0.0, 0.0]), "world.target.p"),
        target_v=_vec2(_get(target_tbl, "v", "world.target", list, default=[0.0, 0.0]), "world.target.v"),
        profile=profile,
        agents=agents,
        obstacles=obstacles,
        failures=failures,
        target_pos_std=_get(wt, "target_pos_std", "world", float, default=0.0),
        target_vel_std=_get(wt, "target_vel_std", "world", float, default=0.0),
        agent_pos_std=_get(wt, "agent_pos_std", "world", float, default=0.0),
        agent_vel_std=_get(wt, "agent_vel_std", "world", float, default=0.0),
    )

    st = _get(raw, "sensors", "", dict, default={})
    vt = _get(st, "vio", "sensors", dict, default={})
    vio = VioSection(
        displacement_std=_get(vt, "displacement_std", "sensors.vio", float, default=0.0),
        yaw_std=_get(vt, "yaw_std", "sensors.vio", float, default=0.0),
    )
    ut = _get(st, "uwb", "sensors", dict, default={})
    uwb = UwbSection(
        sigma=_get(ut, "sigma", "sensors.uwb", float, default=0.12),
        outlier_prob=_get(ut, "outlier_prob", "sensors.uwb", float, default=0.02),
        outlier_min=_get(ut, "outlier_min", "sensors.uwb", float, default=0.5),
        outlier_max=_get(ut, "outlier_max", "sensors.uwb", float, default=3.0),
        dt_uwb=_get(ut, "dt_uwb", "sensors.uwb", float, default=0.005),
        beta=_get(ut, "beta", "sensors.uwb", float, default=0.8),
        sigma_star=_get(ut, "sigma_star", "sensors.uwb", float, default=0.1),
    )
    ct = _get(st, "camera", "sensors", dict, default={})
    camera = CameraSection(
        fov_half_angle_deg=_get(ct, "fov_half_angle_deg", "sensors.camera", float, default=45.0),
        max_depth=_get(ct, "max_depth", "sensors.camera", float, default=10.0),
        pixel_noise_std=_get(ct, "pixel_noise_std", "sensors.camera", float, default=0.0),
        depth_noise_std=_get(ct, "depth_noise_std", "sensors.camera", float, default=0.0),
        virtual_height=_get(ct, "virtual_height", "sensors.camera", float, default=1.0),
    )

    rt = _get(raw, "relative_estimator", "", dict, default={})
    rel = RelativeSection(
        q_diag=_floats(_get(rt, "q_diag", "relative_estimator", list, default=[2e-4] * 4), "relative_estimator.q_diag", 4),
        sigma_star_diag=_floats(
            _get(rt, "sigma_star_diag", "relative_estimator", list, default=[0.025, 0.002, 0.002]),
            "relative_estimator.sigma_star_diag",
            3,
        ),
        sigma_delta_diag=_floats(
            _get(rt, "sigma_delta_diag", "relative_estimator", list, default=[0.002, 0.002]),
            "relative_estimator.sigma_delta_diag",
            2,
        ),
        a=_get(rt, "a", "relative_estimator", float, default=0.05),
        p0_diag=_floats(
            _get(rt, "p0_diag", "relative_estimator", list, default=[25.0, 25.0, 1.0, 1.0]),
            "relative_estimator.p0_diag",
            4,
        ),
        init=_get(rt, "init", "relative_estimator", str, default="zero"),
        rls_forgetting=_get(rt, "rls_forgetting", "relative_estimator", float, default=0.9),
    )

    tt = _get(raw, "target_estimator", "", dict, default={})
    tgt = TargetSection(
        q_diag=_floats(_get(tt, "q_diag", "target_estimator", list, default=[1e-5, 1e-5, 6e-3, 6e-3]), "target_estimator.q_diag", 4),
        sigma_q_diag=_floats(
            _get(tt, "sigma_q_diag", "target_estimator", list, default=[0.01, 0.01]),
            "target_estimator.sigma_q_diag",
            2,
        ),
        epsilon=_get(tt, "epsilon", "target_estimator", float, default=0.1),
        p0_diag=_floats(
            _get(tt, "p0_diag", "target_estimator", list, default=[1.0, 1.0, 4.0, 4.0]),
            "target_estimator.p0_diag",
            4,
        ),
    )

    kt = _get(raw, "controller", "", dict, default={})
    coupling_raw = _get(kt, "coupling", "controller", list, default=None)
    controller = ControllerSection(
        mode=_get(kt, "mode", "controller", str, default="cooperative"),
        rho=_get(kt, "rho", "controller", float, default=2.0),
        orbit_period=_get(kt, "orbit_period", "controller", float, default=30.0),
        coupling=_floats(coupling_raw, "controller.coupling") if coupling_raw is not None else None,
        k_p=_get(kt, "k_p", "controller", float, default=1.0),
        k_v=_get(kt, "k_v", "controller", float, default=1.5),
        k_rho=_get(kt, "k_rho", "controller", float, default=0.5),
        u1_max=_get(kt, "u1_max", "controller", float, default=3.0),
        u2_max=_get(kt, "u2_max", "controller", float, default=3.0),
        k_psi=_get(kt, "k_psi", "controller", float, default=0.8),
    )

    mt = _get(raw, "comms", "", dict, default={})
    comms = CommsSection(
        loss_prob=_get(mt, "loss_prob", "comms", float, default=0.0),
        delay_steps=_get(mt, "delay_steps", "comms", int, default=0),
        topology=_get(mt, "topology", "comms", str, default="full"),
    )

    lt = _get(raw, "logging", "", dict, default={})
    logging_ = LoggingSection(
        uwb_trace=_get(lt, "uwb_trace", "logging", bool, default=False),
        message_trace=_get(lt, "message_trace", "logging", bool, default=False),
    )

    cfg = ScenarioConfig(
        name=name,
        seed=seed,
        schema_version=schema_version,
        out_dir=out_dir,
        world=world,
        vio=vio,
        uwb=uwb,
        camera=camera,
        relative_estimator=rel,
        target_estimator=tgt,
        controller=controller,
        comms=comms,
        logging=logging_,
    )
    return _validate(cfg)


def parse_config(text: str) -> ScenarioConfig:
    try:
        raw = _toml.loads(text)
    except _toml.TOMLDecodeError as exc:
        raise ConfigError("<toml>", f"invalid TOML: {exc}") from exc
    return from_dict(raw)


def load_config(path: Path | str) -> ScenarioConfig:
    return parse_config(Path(path).read_text())


# ---------------------------------------------------------------------------
# serialization

def to_dict(cfg: ScenarioConfig) -> dict:
    w = cfg.world
    out: dict[str, Any] = {
        "schema_version": cfg.schema_version,
        "name": cfg.name,
        "seed": cfg.seed,
    }
    if cfg.out_dir:
        out["out_dir"] = cfg.out_dir
    target: dict[str, Any] = {
        "p": [w.target_p.x, w.target_p.y],
        "v": [w.target_v.x, w.target_v.y],
        "profile": w.profile.kind,
    }
    if w.profile.kind == "waypoints":
        target["waypoints"] = [[p.x, p.y] for p in w.profile.waypoints]
        target["speed"] = w.profile.speed
    if w.profile.kind == "scripted":
        target["table"] = [[t, v.x, v.y] for t, v in w.profile.table]
    out["world"] = {
        "n_agents": w.n_agents,
        "dt": w.dt,
        "duration": w.duration,
        "target_pos_std": w.target_pos_std,
        "target_vel_std": w.target_vel_std,
        "agent_pos_std": w.agent_pos_std,
        "agent_vel_std": w.agent_vel_std,
        "target": target,
        "agents": [
            {"p": [a.p.x, a.p.y], "v": [a.v.x, a.v.y], "psi": a.psi} for a in w.agents
        ],
    }
    if w.obstacles:
        out["world"]["obstacles"] = [
            {"a": [o.a.x, o.a.y], "b": [o.b.x, o.b.y]} for o in w.obstacles
        ]
    if w.failures:
        out["world"]["failures"] = [
            {"t": f.t_fail, "agent": f.agent_id} for f in w.failures
        ]
    out["sensors"] = {
        "vio": {
            "displacement_std": cfg.vio.displacement_std,
            "yaw_std": cfg.vio.yaw_std,
        },
        "uwb": {
            "sigma": cfg.uwb.sigma,
            "outlier_prob": cfg.uwb.outlier_prob,
            "outlier_min": cfg.uwb.outlier_min,
            "outlier_max": cfg.uwb.outlier_max,
            "dt_uwb": cfg.uwb.dt_uwb,
            "beta": cfg.uwb.beta,
            "sigma_star": cfg.uwb.sigma_star,
        },
        "camera": {
            "fov_half_angle_deg": cfg.camera.fov_half_angle_deg,
            "max_depth": cfg.camera.max_depth,
            "pixel_noise_std": cfg.camera.pixel_noise_std,
            "depth_noise_std": cfg.camera.depth_noise_std,
            "virtual_height": cfg.camera.virtual_height,
        },
    }
    out["relative_estimator"] = {
        "q_diag": list(cfg.relative_estimator.q_diag),
        "sigma_star_diag": list(cfg.relative_estimator.sigma_star_diag),
        "sigma_delta_diag": list(cfg.relative_estimator.sigma_delta_diag),
        "a": cfg.relative_estimator.a,
        "p0_diag": list(cfg.relative_estimator.p0_diag),
        "init": cfg.relative_estimator.init,
        "rls_forgetting": cfg.relative_estimator.rls_forgetting,
    }
    out["target_estimator"] = {
        "q_diag": list(cfg.target_estimator.q_diag),
        "sigma_q_diag": list(cfg.target_estimator.sigma_q_diag),
        "epsilon": cfg.target_estimator.epsilon,
        "p0_diag": list(cfg.target_estimator.p0_diag),
    }
    out["controller"] = {
        "mode": cfg.controller.mode,
        "rho": cfg.controller.rho,
        "orbit_period": cfg.controller.orbit_period,
        "k_p": cfg.controller.k_p,
        "k_v": cfg.controller.k_v,
        "k_rho": cfg.controller.k_rho,
        "u1_max": cfg.controller.u1_max,
        "u2_max": cfg.controller.u2_max,
        "k_psi": cfg.controller.k_psi,
    }
    if cfg.controller.coupling is not None:
        out["controller"]["coupling"] = list(cfg.controller.coupling)
    out["comms"] = {
        "loss_prob": cfg.comms.loss_prob,
        "delay_steps": cfg.comms.delay_steps,
        "topology": cfg.comms.topology,
    }
    out["logging"] = {
        "uwb_trace": cfg.logging.uwb_trace,
        "message_trace": cfg.logging.message_trace,
    }
    return out


def serialize_config(cfg: ScenarioConfig) -> str:
    return tomlkit.dumps(to_dict(cfg))


# ---------------------------------------------------------------------------
# builtin scenarios

def _circle_agents(
    n: int, rho: float, period: float, phases_deg: list[float], radii: Optional[list[float]] = None
) -> list[AgentInit]:
    """Agents on (or near) the orbit circle, tangential velocity, camera on target."""
    omega = 2.0 * math.pi / period
    out = []
    for i in range(n):
        phi = math.radians(phases_deg[i])
        r = rho if radii is None else radii[i]
        p = Vec2(r * math.cos(phi), r * math.sin(phi))
        v = Vec2(-r * omega * math.sin(phi), r * omega * math.cos(phi))
        psi = math.atan2(-p.y, -p.x)
        out.append(AgentInit(p=p, v=v, psi=psi))
    return out


def indoor_pair(seed: int = 42) -> ScenarioConfig:
    """Two scripted quadrotors on a 2 m circle (30 s period), estimation only."""
    return ScenarioConfig(
        name="indoor-pair",
        seed=seed,
        world=WorldSection(
            n_agents=2,
            dt=0.1,
            duration=60.0,
            agents=_circle_agents(2, 2.0, 30.0, [0.0, 180.0]),
            agent_pos_std=0.002,
            agent_vel_std=0.002,
        ),
        vio=VioSection(displacement_std=0.025 / math.sqrt(2.0)),
        uwb=UwbSection(sigma=0.06),
        camera=CameraSection(pixel_noise_std=0.02, depth_noise_std=0.02,
                             fov_half_angle_deg=60.0),
        relative_estimator=RelativeSection(init="zero"),
        controller=ControllerSection(mode="scripted-circle", rho=2.0, orbit_period=30.0),
    )


def indoor_occlusion(seed: int = 7) -> ScenarioConfig:
    """Two cooperative quadrotors orbit a stationary target past a wall.

    The wall chord spans bearings 40..80 degrees at radius 1 m, so the
    leading agent (starting at 20 degrees, 90 s orbit) loses sight of the
    target for the 10 s it spends crossing that sector while the trailing
    agent keeps it in view for the whole run.
    """
    wall_r = 1.0
    a_deg, b_deg = 40.0, 80.0
    wall = ObstacleSegment(
        a=Vec2(wall_r * math.cos(math.radians(a_deg)), wall_r * math.sin(math.radians(a_deg))),
        b=Vec2(wall_r * math.cos(math.radians(b_deg)), wall_r * math.sin(math.radians(b_deg))),
    )
    return ScenarioConfig(
        name="indoor-occlusion",
        seed=seed,
        world=WorldSection(
            n_agents=2,
            dt=0.1,
            duration=30.0,
            agents=_circle_agents(2, 2.0, 90.0, [20.0, 200.0]),
            obstacles=[wall],
            agent_pos_std=0.001,
            agent_vel_std=0.002,
        ),
        vio=VioSection(displacement_std=0.002),
        uwb=UwbSection(sigma=0.04),
        camera=CameraSection(pixel_noise_std=0.08, depth_noise_std=0.08,
                             fov_half_angle_deg=60.0),
        relative_estimator=RelativeSection(
            init="true-geometry", p0_diag=[0.25, 0.25, 0.25, 0.25]
        ),
        target_estimator=TargetSection(sigma_q_diag=[0.02, 0.02]),
        controller=ControllerSection(mode="cooperative", rho=2.0, orbit_period=90.0),
    )


def outdoor_three_failure(seed: int = 11) -> ScenarioConfig:
    """Three cooperative quadrotors enclose a moving target; one fails at 60 s."""
    return ScenarioConfig(
        name="outdoor-three-failure",
        seed=seed,
        world=WorldSection(
            n_agents=3,
            dt=0.1,
            duration=150.0,
            profile=ProfileConfig(
                kind="waypoints",
                waypoints=[Vec2(5.0, 0.0), Vec2(5.0, 4.0), Vec2(-1.0, 4.0), Vec2(-1.0, 0.0)],
                speed=0.25,
            ),
            agents=_circle_agents(3, 2.0, 30.0, [10.0, 130.0, 220.0], radii=[2.4, 1.7, 2.2]),
            failures=[FailureEvent(t_fail=60.0, agent_id=3)],
            agent_pos_std=0.002,
            agent_vel_std=0.004,
        ),
        vio=VioSection(displacement_std=0.004),
        uwb=UwbSection(sigma=0.06),
        camera=CameraSection(pixel_noise_std=0.03, depth_noise_std=0.03,
                             fov_half_angle_deg=60.0),
        relative_estimator=RelativeSection(
            init="true-geometry", p0_diag=[0.25, 0.25, 0.25, 0.25]
        ),
        target_estimator=TargetSection(sigma_q_diag=[0.005, 0.005]),
        controller=ControllerSection(mode="cooperative", rho=2.0, orbit_period=30.0),
    )


BUILTIN_SCENARIOS = {
    "indoor-pair": indoor_pair,
    "indoor-occlusion": indoor_occlusion,
    "outdoor-three-failure": outdoor_three_failure,
}


def builtin(name: str, seed: Optional[int] = None) -> ScenarioConfig:
    if name not in BUILTIN_SCENARIOS:
        raise ConfigError("scenario", f"unknown builtin scenario {name!r}")
    cfg = BUILTIN_SCENARIOS[name]()
    if seed is not None:
        cfg = replace(cfg, seed=seed)
    return cfg


def zero_noise(cfg: ScenarioConfig) -> ScenarioConfig:
    """Copy of a scenario with every sensor and process noise removed."""
    return replace(
        cfg,
        world=replace(
            cfg.world,
            target_pos_std=0.0,
            target_vel_std=0.0,
            agent_pos_std=0.0,
            agent_vel_std=0.0,
        ),
        vio=VioSection(displacement_std=0.0, yaw_std=0.0),
        uwb=replace(cfg.uwb, sigma=0.0, outlier_prob=0.0),
        camera=replace(cfg.camera, pixel_noise_std=0.0, depth_noise_std=0.0),
    )
