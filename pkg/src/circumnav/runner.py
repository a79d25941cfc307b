"""Deterministic scenario execution: the per-step pipeline and its logs.

Step order (one iteration advances the world to step k, then computes
everything at step k): dynamics -> failures -> sensors -> filter
predictions -> message exchange -> relative estimators -> target
estimators -> controller -> logging. All randomness is drawn from named
substreams spawned once at setup, so agent evaluation order can never
change results and equal seeds give bit-identical logs.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import comms as cm
from . import controller as ctl
from . import relative as rel
from . import sensors as sn
from . import target as tg
from .config import ScenarioConfig
from .errors import ControllerInputError, NumericalFailureError, ScenarioEndSignal
from .geometry import Vec2, ZERO, rot2, wrap_positive
from .world import AgentState, TargetState, World, gaussian_sampler

log = logging.getLogger(__name__)

FLOAT_FMT = "%.9g"

RELATIVE_COLUMNS = [
    "k", "t", "pair", "kind", "phat_x", "phat_y", "vhat_x", "vhat_y",
    "true_px", "true_py", "err", "trace_p",
]
TARGET_COLUMNS = ["k", "t", "agent", "mode", "meas_err", "est_err", "trace_p"]
CONTROLLER_COLUMNS = [
    "k", "t", "agent", "theta", "pstar_x", "pstar_y", "u_unsat_x", "u_unsat_y",
    "u_x", "u_y", "psi", "psi_hat", "radius_err",
]
WORLD_COLUMNS = ["k", "t", "entity", "px", "py", "vx", "vy", "psi", "alive"]
UWB_COLUMNS = ["n", "k", "t", "pair", "raw", "accepted", "emitted"]
MESSAGE_COLUMNS = ["k", "sender", "recipient", "payload", "delivered"]


@dataclass
class LogTables:
    """In-memory run logs, one list of rows per CSV file."""

    world: list[list] = field(default_factory=list)
    relative: list[list] = field(default_factory=list)
    target: list[list] = field(default_factory=list)
    controller: list[list] = field(default_factory=list)
    uwb: list[list] = field(default_factory=list)
    messages: list[list] = field(default_factory=list)


@dataclass
class RunResult:
    config: ScenarioConfig
    tables: LogTables
    metrics: dict
    out_dir: Optional[Path] = None


def _fmt(value) -> str:
    if isinstance(value, float):
        return FLOAT_FMT % value
    return str(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with path.open("w", newline="") as f:
        w = csv.writer(f)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


class _PairBank:
    """All relative estimators for one ordered pair, plus stream state."""

    def __init__(self, cfg: rel.EstimatorConfig, kinds: tuple[str, ...],
                 x0: Optional[np.ndarray], rls_p0: float):
        self.cfg = cfg
        self.kinds = kinds
        self.states: dict[str, object] = {}
        if "modified" in kinds:
            self.states["modified"] = cfg.initial_estimate(x0)
        if "classical" in kinds:
            self.states["classical"] = cfg.initial_estimate(x0)
        if "rls" in kinds:
            init = rel.initial_rls(rls_p0)
            if x0 is not None:
                init = rel.RlsState(p_hat=x0[:2], p_cov=init.p_cov)
            self.states["rls"] = init


class ScenarioRunner:
    def __init__(
        self,
        cfg: ScenarioConfig,
        estimator_kinds: tuple[str, ...] = ("modified",),
    ):
        self.cfg = cfg
        # the modified filter is the primary estimate consumed by the
        # target filter and the controller; it always runs
        if "modified" not in estimator_kinds:
            estimator_kinds = ("modified",) + tuple(estimator_kinds)
        self.kinds = estimator_kinds
        self.dt = cfg.world.dt
        self.n_steps = int(round(cfg.world.duration / self.dt))
        self._setup_rngs()
        self._setup_world()
        self._setup_comms()
        self._setup_estimators()
        self._setup_controller()
        self.tables = LogTables()

    # -- setup ------------------------------------------------------------

    def _setup_rngs(self) -> None:
        n = self.cfg.world.n_agents
        ss = np.random.SeedSequence(self.cfg.seed)
        names = ["target_process"]
        names += [f"agent_process_{i}" for i in range(1, n + 1)]
        names += [f"vio_{i}" for i in range(1, n + 1)]
        names += [f"stereo_{i}" for i in range(1, n + 1)]
        names += [f"uwb_{i}_{j}" for i in range(1, n + 1) for j in range(i + 1, n + 1)]
        names += ["comms"]
        children = ss.spawn(len(names))
        self.rngs = {name: np.random.default_rng(child) for name, child in zip(names, children)}

    def _setup_world(self) -> None:
        w = self.cfg.world
        agents = [
            AgentState(id=i + 1, p=a.p, v=a.v, psi=a.psi)
            for i, a in enumerate(w.agents)
        ]
        agent_noise = {
            a.id: gaussian_sampler(
                w.agent_pos_std, w.agent_vel_std, self.rngs[f"agent_process_{a.id}"]
            )
            for a in agents
        }
        self.world = World(
            target=TargetState(p=w.target_p, v=w.target_v),
            agents=agents,
            profile=w.profile.build(),
            dt=w.dt,
            obstacles=w.obstacles,
            target_noise=gaussian_sampler(
                w.target_pos_std, w.target_vel_std, self.rngs["target_process"]
            ),
            agent_noise={k: v for k, v in agent_noise.items() if v is not None},
        )
        for ev in w.failures:
            self.world.schedule_failure(ev.agent_id, ev.t_fail)
        self.camera = self.cfg.camera.build()
        self.uwb_noise = self.cfg.uwb.noise()

    def _setup_comms(self) -> None:
        ids = sorted(self.world.agents)
        self.topology = (
            cm.Topology.ring(ids) if self.cfg.comms.topology == "ring" else cm.Topology.full(ids)
        )
        self.bus = cm.MessageBus(
            policy=cm.DeliveryPolicy(
                loss_prob=self.cfg.comms.loss_prob,
                delay_steps=self.cfg.comms.delay_steps,
            ),
            rng=self.rngs["comms"],
            trace=self.cfg.logging.message_trace,
        )

    def _setup_estimators(self) -> None:
        w = self.cfg.world
        self.rel_cfg = self.cfg.relative_estimator.build(self.dt)
        self.dkf_cfg = self.cfg.target_estimator.build(self.dt)
        rls_p0 = float(self.cfg.relative_estimator.p0_diag[0])
        self.banks: dict[tuple[int, int], _PairBank] = {}
        for i in sorted(self.world.agents):
            for j in sorted(self.topology.neighbors_of(i)):
                x0 = None
                if self.cfg.relative_estimator.init == "true-geometry":
                    ai, aj = self.world.agents[i], self.world.agents[j]
                    x0 = np.array(
                        [ai.p.x - aj.p.x, ai.p.y - aj.p.y, ai.v.x - aj.v.x, ai.v.y - aj.v.y]
                    )
                self.banks[(i, j)] = _PairBank(self.rel_cfg, self.kinds, x0, rls_p0)
        # one shared UWB stream per unordered pair
        self.uwb_streams: dict[tuple[int, int], sn.UwbStreamState] = {}
        self.uwb_counter: dict[tuple[int, int], int] = {}
        self.d_now: dict[tuple[int, int], float] = {}
        self.d_prev: dict[tuple[int, int], float] = {}
        for (i, j) in [(i, j) for i in sorted(self.world.agents) for j in sorted(self.world.agents) if i < j]:
            self.uwb_streams[(i, j)] = sn.UwbStreamState(
                beta=self.cfg.uwb.beta,
                sigma_star=self.cfg.uwb.sigma_star,
                dt_uwb=self.cfg.uwb.dt_uwb,
                dt=w.dt,
            )
            self.uwb_counter[(i, j)] = 0
        self.dkf: dict[int, Optional[tg.TargetEstimate]] = {i: None for i in self.world.agents}
        self.last_u: dict[int, Vec2] = {i: ZERO for i in self.world.agents}
        self.last_neighbor_u: dict[tuple[int, int], Vec2] = {}

    def _setup_controller(self) -> None:
        self.gains = self.cfg.controller.build(self.dt, self.cfg.world.n_agents)
        self.theta: dict[int, Optional[float]] = {i: None for i in self.world.agents}
        self.last_neighbor_theta: dict[tuple[int, int], float] = {}
        self.last_yaw_cmd: dict[int, float] = {i: 0.0 for i in self.world.agents}
        self.scripted_phase0: dict[int, float] = {}
        if self.cfg.controller.mode == "scripted-circle":
            for i, a in self.world.agents.items():
                r = a.p - self.world.target.p
                self.scripted_phase0[i] = math.atan2(r.y, r.x)

    # -- per-step sensing ---------------------------------------------------

    def _sample_uwb(self, k: int) -> None:
        self.d_prev = dict(self.d_now)
        alive = set(self.world.alive_ids())
        for (i, j), state in sorted(self.uwb_streams.items()):
            if i not in alive or j not in alive:
                continue
            rng = self.rngs[f"uwb_{i}_{j}"]
            p_i = self.world.agents[i].p
            p_j = self.world.agents[j].p
            emitted = None
            for _ in range(state.substeps_per_sample):
                self.uwb_counter[(i, j)] += 1
                n = self.uwb_counter[(i, j)]
                raw = sn.sense_uwb_raw(p_i, p_j, self.uwb_noise, rng)
                state, accepted = sn.preprocess_uwb(state, raw)
                value = sn.downsample_uwb(state, n)
                if self.cfg.logging.uwb_trace:
                    self.tables.uwb.append(
                        [n, k, self.world.t, f"{i}-{j}", raw, accepted, int(value is not None)]
                    )
                if value is not None:
                    emitted = value
            self.uwb_streams[(i, j)] = state
            if emitted is not None:
                self.d_now[(i, j)] = emitted

    def _sample_sensors(self, k: int, prev: dict[int, AgentState]) -> tuple[dict, dict]:
        self._sample_uwb(k)
        vio: dict[int, sn.VioMeasurement] = {}
        stereo_q: dict[int, Optional[Vec2]] = {}
        for i in self.world.alive_ids():
            a = self.world.agents[i]
            vio[i] = sn.sense_vio(
                a.p,
                prev[i].p,
                a.psi,
                displacement_std=self.cfg.vio.displacement_std,
                yaw_std=self.cfg.vio.yaw_std,
                rng=self.rngs[f"vio_{i}"],
            )
            sample = sn.sense_stereo(
                a, self.world.target, self.camera, self.world.obstacles,
                rng=self.rngs[f"stereo_{i}"],
            )
            if sample is None:
                stereo_q[i] = None
            else:
                obs = sn.backproject((sample.u, sample.v), sample.depth, vio[i].psi, self.camera)
                stereo_q[i] = obs.q
        return vio, stereo_q

    # -- step phases ----------------------------------------------------------

    def _exchange(self, k: int, vio, stereo_q, priors) -> dict[int, list[cm.Message]]:
        outbox = []
        for i in self.world.alive_ids():
            payloads: list[cm.Payload] = [
                cm.Displacement(delta=vio[i].delta, psi=vio[i].psi),
                cm.ControlInput(u=self.last_u[i]),
            ]
            prior = priors.get(i)
            payloads.append(
                cm.TargetPacket(
                    q=stereo_q.get(i),
                    sigma_q=self.dkf_cfg.sigma_q if stereo_q.get(i) is not None else None,
                    x_bar=prior.x_hat if prior is not None else None,
                    p_minus=prior.p_cov if prior is not None else None,
                )
            )
            if self.theta[i] is not None:
                payloads.append(cm.Phase(theta=self.theta[i]))
            for payload in payloads:
                outbox.append(cm.Message(sender=i, recipient=None, step=k, payload=payload))
        inboxes = self.bus.exchange(outbox, self.topology, k)
        if self.cfg.logging.message_trace:
            self.tables.messages.extend(list(row) for row in self.bus.trace_rows)
            self.bus.trace_rows.clear()
        return inboxes

    def _step_relative(self, k: int, vio, inboxes) -> None:
        t = self.world.t
        for (i, j), bank in sorted(self.banks.items()):
            if j not in self.topology.neighbors_of(i):
                continue
            pair_key = (min(i, j), max(i, j))
            d_k = self.d_now.get(pair_key)
            d_km1 = self.d_prev.get(pair_key)
            delta_j = None
            u_j = None
            for msg in inboxes.get(i, []):
                if msg.sender != j:
                    continue
                if isinstance(msg.payload, cm.Displacement):
                    delta_j = msg.payload.delta
                elif isinstance(msg.payload, cm.ControlInput):
                    u_j = msg.payload.u
            if u_j is None:
                u_j = self.last_neighbor_u.get((i, j), ZERO)
            else:
                self.last_neighbor_u[(i, j)] = u_j
            u_ij = self.last_u[i] - u_j
            have_all = delta_j is not None and d_k is not None and d_km1 is not None
            ai, aj = self.world.agents[i], self.world.agents[j]
            true_p = ai.p - aj.p
            for kind in bank.kinds:
                state = bank.states[kind]
                if kind == "rls":
                    if have_all:
                        delta_ij = sn.relative_displacement(vio[i].delta, delta_j)
                        state = rel.step_rls(
                            state, d_k, d_km1, delta_ij, u_ij,
                            self.cfg.relative_estimator.rls_forgetting, bank.cfg,
                        )
                    bank.states[kind] = state
                    est_p = state.position
                    row = [
                        k, t, f"{i}-{j}", kind, est_p.x, est_p.y,
                        float("nan"), float("nan"), true_p.x, true_p.y,
                        (est_p - true_p).norm(), float(np.trace(state.p_cov)),
                    ]
                else:
                    if have_all:
                        delta_ij = sn.relative_displacement(vio[i].delta, delta_j)
                        step = rel.step_modified_kf if kind == "modified" else rel.step_classical_kf
                        try:
                            state = step(state, d_k, d_km1, delta_ij, u_ij, k, bank.cfg)
                        except NumericalFailureError:
                            log.warning(
                                "step %d pair %d-%d (%s): singular update skipped",
                                k, i, j, kind,
                            )
                            state = rel.predict(state, u_ij, bank.cfg)
                    else:
                        state = rel.predict(state, u_ij, bank.cfg)
                    bank.states[kind] = state
                    est_p, est_v = state.position, state.velocity
                    row = [
                        k, t, f"{i}-{j}", kind, est_p.x, est_p.y, est_v.x, est_v.y,
                        true_p.x, true_p.y, (est_p - true_p).norm(),
                        float(np.trace(state.p_cov)),
                    ]
                self.tables.relative.append(row)

    def _step_target(self, k: int, stereo_q, priors, inboxes) -> None:
        t = self.world.t
        true_target = self.world.target
        for i in self.world.alive_ids():
            a = self.world.agents[i]
            true_rel = a.p - true_target.p
            packets = []
            for msg in inboxes.get(i, []):
                if isinstance(msg.payload, cm.TargetPacket):
                    pl = msg.payload
                    packets.append(
                        tg.NeighborPacket(
                            sender=msg.sender, q=pl.q, sigma_q=pl.sigma_q,
                            x_bar=pl.x_bar, p_minus=pl.p_minus,
                        )
                    )
            rels = {
                j: self.banks[(i, j)].states["modified"]
                for j in self.topology.neighbors_of(i)
                if (i, j) in self.banks
            }
            own_q = stereo_q.get(i)
            fused = tg.fuse_event_triggered(own_q, self.dkf_cfg.sigma_q, packets, rels)
            est = self.dkf[i]
            if est is None:
                if fused.mode != "none":
                    self.dkf[i] = self.dkf_cfg.initial_estimate(Vec2.from_array(fused.z))
                    est = self.dkf[i]
                mode = fused.mode
            else:
                prior = priors[i]
                neighbor_priors = [
                    tg.neighbor_prior(pkt, rels[pkt.sender])
                    for pkt in packets
                    if pkt.x_bar is not None and pkt.sender in rels
                ]
                try:
                    est = tg.dkf_update(prior, fused, neighbor_priors, self.dkf_cfg.epsilon)
                except NumericalFailureError:
                    log.warning("step %d agent %d: singular target update skipped", k, i)
                    est = prior
                self.dkf[i] = est
                mode = fused.mode
            meas_err = (
                (Vec2.from_array(fused.z) - true_rel).norm()
                if fused.mode != "none"
                else float("nan")
            )
            est_err = (
                (est.position - true_rel).norm() if est is not None else float("nan")
            )
            trace_p = float(np.trace(est.p_cov)) if est is not None else float("nan")
            self.tables.target.append([k, t, i, mode, meas_err, est_err, trace_p])

    def _step_controller(self, k: int, vio, inboxes) -> dict[int, tuple[Vec2, float]]:
        t = self.world.t
        controls: dict[int, tuple[Vec2, float]] = {}
        mode = self.cfg.controller.mode
        alive = self.world.alive_ids()
        for i in alive:
            a = self.world.agents[i]
            est = self.dkf[i]
            psi_meas = vio[i].psi if i in vio else a.psi
            if mode == "scripted-circle":
                u, theta_log, pstar = self._scripted_control(i)
                u_unsat = u
            else:
                u, u_unsat, theta_log, pstar = self._cooperative_control(i, k, inboxes)
            if est is not None:
                u_psi = ctl.yaw_control(
                    psi_meas, est.position, self.gains.k_psi, self.last_yaw_cmd[i]
                )
                psi_hat = ctl.pointing_yaw(est.position)
            else:
                u_psi = self.last_yaw_cmd[i]
                psi_hat = float("nan")
            self.last_yaw_cmd[i] = u_psi
            controls[i] = (u, u_psi)
            radius_err = (a.p - self.world.target.p).norm() - self.gains.rho
            self.tables.controller.append(
                [
                    k, t, i, theta_log, pstar.x, pstar.y, u_unsat.x, u_unsat.y,
                    u.x, u.y, a.psi, psi_hat, radius_err,
                ]
            )
        return controls

    def _scripted_control(self, i: int) -> tuple[Vec2, float, Vec2]:
        """Ground-truth autopilot tracking the prescribed orbit circle."""
        a = self.world.agents[i]
        omega = 2.0 * math.pi / self.cfg.controller.orbit_period
        phase = wrap_positive(self.scripted_phase0[i] + omega * self.world.t)
        center = self.world.target.p
        rho = self.gains.rho
        p_des = center + Vec2(rho * math.cos(phase), rho * math.sin(phase))
        v_des = Vec2(-rho * omega * math.sin(phase), rho * omega * math.cos(phase))
        r = rot2(omega * self.dt) - np.eye(2)
        ff = Vec2.from_array((r @ a.v.as_array()) / self.dt)
        u = ff + 0.4 * (p_des - a.p) + 1.0 * (v_des - a.v)
        return u, phase, p_des - center

    def _cooperative_control(
        self, i: int, k: int, inboxes
    ) -> tuple[Vec2, Vec2, float, Vec2]:
        est = self.dkf[i]
        if self.theta[i] is None and est is not None:
            self.theta[i] = wrap_positive(math.atan2(est.position.y, est.position.x))
        neighbors = sorted(self.topology.neighbors_of(i))
        # phases heard this step; otherwise dead-reckon the last known value
        neighbor_thetas: dict[int, float] = {}
        for msg in inboxes.get(i, []):
            if isinstance(msg.payload, cm.Phase):
                neighbor_thetas[msg.sender] = msg.payload.theta
        for j in neighbors:
            if j in neighbor_thetas:
                self.last_neighbor_theta[(i, j)] = neighbor_thetas[j]
            elif (i, j) in self.last_neighbor_theta:
                self.last_neighbor_theta[(i, j)] = wrap_positive(
                    self.last_neighbor_theta[(i, j)] + self.gains.delta_theta
                )
                neighbor_thetas[j] = self.last_neighbor_theta[(i, j)]
        if self.theta[i] is None:
            return ZERO, ZERO, float("nan"), ZERO
        theta_i = self.theta[i]
        desired: dict[int, tuple[Vec2, Vec2]] = {}
        estimates: dict[int, tuple[Vec2, Vec2]] = {}
        p_star_i0, v_star_i0 = ctl.desired_relative_state(theta_i, self.gains, self.dt)
        desired[0] = (p_star_i0, v_star_i0)
        if est is not None:
            estimates[0] = (est.position, est.velocity)
        for j in neighbors:
            if j not in neighbor_thetas or (i, j) not in self.banks:
                continue
            p_star_j0, v_star_j0 = ctl.desired_relative_state(
                neighbor_thetas[j], self.gains, self.dt
            )
            desired[j] = ctl.desired_inter_agent(p_star_i0, v_star_i0, p_star_j0, v_star_j0)
            state = self.banks[(i, j)].states["modified"]
            estimates[j] = (state.position, state.velocity)
        try:
            cmd = ctl.formation_control(estimates, desired, self.gains, self.dt)
            u = cmd.u
            u_unsat = cmd.u1_raw + cmd.u2_raw + cmd.feedforward
        except ControllerInputError:
            u = self.last_u[i]
            u_unsat = u
        phases = [theta_i] + [neighbor_thetas[j] for j in neighbors if j in neighbor_thetas]
        self.theta[i] = ctl.oscillator_step(theta_i, phases, self.gains, self.dt)
        return u, u_unsat, theta_i, p_star_i0

    def _log_world(self, k: int) -> None:
        t = self.world.t
        tgt_state = self.world.target
        self.tables.world.append(
            [k, t, 0, tgt_state.p.x, tgt_state.p.y, tgt_state.v.x, tgt_state.v.y, 0.0, 1]
        )
        for i in sorted(self.world.agents):
            a = self.world.agents[i]
            self.tables.world.append(
                [k, t, i, a.p.x, a.p.y, a.v.x, a.v.y, a.psi, int(a.alive)]
            )

    # -- main loop ----------------------------------------------------------

    def run(self) -> LogTables:
        # step 0: warm-up samples so d_{k-1} and the target filters exist
        self._log_world(0)
        self._sample_uwb(0)
        for i in self.world.alive_ids():
            a = self.world.agents[i]
            sample = sn.sense_stereo(
                a, self.world.target, self.camera, self.world.obstacles,
                rng=self.rngs[f"stereo_{i}"],
            )
            if sample is not None:
                obs = sn.backproject((sample.u, sample.v), sample.depth, a.psi, self.camera)
                self.dkf[i] = self.dkf_cfg.initial_estimate(obs.q)
                if self.cfg.controller.mode == "cooperative":
                    self.theta[i] = wrap_positive(math.atan2(obs.q.y, obs.q.x))
        pending: dict[int, tuple[Vec2, float]] = {}
        for k in range(1, self.n_steps + 1):
            prev = dict(self.world.agents)
            self.world.advance(pending)
            died = self.world.apply_due_failures()
            if died:
                try:
                    self.topology = cm.update_topology(self.topology, self.world.alive_ids())
                except ScenarioEndSignal:
                    log.warning("step %d: no agents remain alive, ending run", k)
                    self._log_world(k)
                    break
            vio, stereo_q = self._sample_sensors(k, prev)
            priors = {}
            for i in self.world.alive_ids():
                if self.dkf[i] is not None:
                    priors[i] = tg.dkf_predict(self.dkf[i], self.last_u[i], self.dkf_cfg)
            inboxes = self._exchange(k, vio, stereo_q, priors)
            self._step_relative(k, vio, inboxes)
            self._step_target(k, stereo_q, priors, inboxes)
            controls = self._step_controller(k, vio, inboxes)
            pending = controls
            for i, (u, _) in controls.items():
                self.last_u[i] = u
            self._log_world(k)
        return self.tables


def run_scenario(
    cfg: ScenarioConfig,
    out_dir: Optional[Path | str] = None,
    estimator_kinds: tuple[str, ...] = ("modified",),
) -> RunResult:
    """Execute a scenario; write CSV logs and a metrics summary if out_dir."""
    from .metrics import compute_metrics_from_tables

    runner = ScenarioRunner(cfg, estimator_kinds=estimator_kinds)
    tables = runner.run()
    metrics = compute_metrics_from_tables(tables, cfg)
    result = RunResult(config=cfg, tables=tables, metrics=metrics)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        _write_csv(out / "world.csv", WORLD_COLUMNS, tables.world)
        _write_csv(out / "relative.csv", RELATIVE_COLUMNS, tables.relative)
        _write_csv(out / "target.csv", TARGET_COLUMNS, tables.target)
        _write_csv(out / "controller.csv", CONTROLLER_COLUMNS, tables.controller)
        if cfg.logging.uwb_trace:
            _write_csv(out / "uwb.csv", UWB_COLUMNS, tables.uwb)
        if cfg.logging.message_trace:
            _write_csv(out / "messages.csv", MESSAGE_COLUMNS, tables.messages)
        (out / "metrics.json").write_text(json.dumps(metrics, indent=2, sort_keys=True))
        from .config import serialize_config

        (out / "config.toml").write_text(serialize_config(cfg))
        result.out_dir = out
    return result
