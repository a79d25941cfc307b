import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from circumnav.errors import InvalidDepthError
from circumnav.geometry import Vec2, ZERO
from circumnav.sensors import (
    CameraConfig,
    UwbNoise,
    UwbStreamState,
    backproject,
    downsample_uwb,
    preprocess_uwb,
    project_relative,
    relative_displacement,
    sense_stereo,
    sense_uwb_raw,
    sense_vio,
)
from circumnav.world import AgentState, ObstacleSegment, TargetState

finite = st.floats(min_value=-100, max_value=100, allow_nan=False)


# -- VIO ---------------------------------------------------------------------

def test_vio_displacement():
    m = sense_vio(Vec2(1, 1), Vec2(0.9, 1), psi_true=0.2)
    assert m.delta.x == pytest.approx(0.1)
    assert m.delta.y == pytest.approx(0.0)
    assert m.psi == pytest.approx(0.2)


def test_vio_stationary():
    m = sense_vio(Vec2(2, 3), Vec2(2, 3), psi_true=0.0)
    assert m.delta == ZERO


def test_vio_noise_zero_mean():
    # Monte-Carlo oracle: mean of (measured - true) within 4 standard errors
    rng = np.random.default_rng(0)
    sigma = 0.05
    n = 10_000
    xs = []
    for _ in range(n):
        m = sense_vio(Vec2(1, 0), Vec2(0, 0), 0.0, displacement_std=sigma, rng=rng)
        xs.append(m.delta.x - 1.0)
    assert abs(np.mean(xs)) < 4 * sigma / 100


@given(finite, finite, finite, finite)
def test_relative_displacement_antisymmetric(ax, ay, bx, by):
    a, b = Vec2(ax, ay), Vec2(bx, by)
    assert relative_displacement(a, b) == -relative_displacement(b, a)


def test_relative_displacement_example():
    assert relative_displacement(Vec2(0.1, 0), Vec2(-0.1, 0)) == Vec2(0.2, 0)
    assert relative_displacement(Vec2(0.3, 0.4), Vec2(0.3, 0.4)) == ZERO


def test_relative_displacement_telescopes():
    # summing per-step relative displacements reproduces the end-to-end change
    rng = np.random.default_rng(3)
    p_i, p_j = Vec2(0, 0), Vec2(1, 1)
    start = p_i - p_j
    total = ZERO
    for _ in range(50):
        d_i = Vec2(*rng.normal(0, 0.1, 2))
        d_j = Vec2(*rng.normal(0, 0.1, 2))
        p_i, p_j = p_i + d_i, p_j + d_j
        total = total + relative_displacement(d_i, d_j)
    end = p_i - p_j
    assert (total - (end - start)).norm() < 1e-12


# -- UWB ---------------------------------------------------------------------

def test_uwb_raw_exact_distance():
    assert sense_uwb_raw(Vec2(3, 4), Vec2(0, 0)) == pytest.approx(5.0)
    assert sense_uwb_raw(Vec2(1, 1), Vec2(1, 1)) == pytest.approx(0.0)


def test_uwb_outlier_fraction():
    rng = np.random.default_rng(7)
    noise = UwbNoise(sigma=0.0, outlier_prob=0.05, outlier_min=0.5, outlier_max=3.0)
    n = 10_000
    hits = sum(
        1
        for _ in range(n)
        if abs(sense_uwb_raw(Vec2(0, 0), Vec2(4, 0), noise, rng) - 4.0) > 0.25
    )
    assert 0.03 <= hits / n <= 0.07


def _stream(beta=0.8, sigma_star=0.1, dt_uwb=0.005, dt=0.1):
    return UwbStreamState(beta=beta, sigma_star=sigma_star, dt_uwb=dt_uwb, dt=dt)


def test_preprocess_hold_on_jump():
    s = _stream(sigma_star=0.1)
    s, _ = preprocess_uwb(s, 5.00)
    s, out = preprocess_uwb(s, 5.50)
    assert out == pytest.approx(5.00)


def test_preprocess_ewm_step():
    s = _stream(beta=0.8, sigma_star=1.0)
    s, _ = preprocess_uwb(s, 4.0)
    s, out = preprocess_uwb(s, 5.0)
    assert out == pytest.approx(4.2)


def test_preprocess_fixed_point():
    for beta in (0.0, 0.3, 0.9):
        s = _stream(beta=beta, sigma_star=0.5)
        s, _ = preprocess_uwb(s, 2.5)
        s, out = preprocess_uwb(s, 2.5)
        assert out == pytest.approx(2.5)


def test_preprocess_matches_hand_recursion():
    rng = np.random.default_rng(11)
    s = _stream(beta=0.8, sigma_star=0.1)
    raw = 5.0 + 0.05 * rng.standard_normal(200)
    raw[50] += 2.0
    raw[120] -= 1.5
    expect = None
    for i, d in enumerate(raw):
        s, out = preprocess_uwb(s, float(d))
        if expect is None:
            expect = float(d)
        elif abs(d - expect) <= 0.3:
            expect = 0.8 * expect + 0.2 * float(d)
        assert out == pytest.approx(expect, abs=1e-12)


@given(st.floats(min_value=0.0, max_value=0.95), st.lists(finite, min_size=2, max_size=40))
@settings(max_examples=50)
def test_preprocess_bounded_increment(beta, values):
    s = _stream(beta=beta, sigma_star=0.1)
    prev = None
    for d in values:
        s, out = preprocess_uwb(s, d)
        if prev is not None:
            assert abs(out - prev) <= 3 * 0.1 * (1 - beta) + 1e-9
        prev = out


def test_downsample_emission_grid():
    s = _stream()
    assert s.substeps_per_sample == 20
    s, _ = preprocess_uwb(s, 4.0)
    assert downsample_uwb(s, 19) is None
    assert downsample_uwb(s, 20) == pytest.approx(4.0)
    emissions = sum(1 for n in range(1, 201) if downsample_uwb(s, n) is not None)
    assert emissions == 10


def test_stream_requires_divisible_rates():
    with pytest.raises(ValueError):
        UwbStreamState(beta=0.8, sigma_star=0.1, dt_uwb=0.03, dt=0.1)


# -- stereo camera -----------------------------------------------------------

def test_project_identity_config_on_boresight():
    # co-located in the plane; the virtual rig sees the target at its
    # mounting offset: centered pixel, depth equal to the offset
    cfg = CameraConfig(t_mount=np.array([0.0, 0.0, -2.0]))
    sample = project_relative(ZERO, psi=0.0, cfg=cfg)
    assert sample.u == pytest.approx(0.0)
    assert sample.v == pytest.approx(0.0)
    assert sample.depth == pytest.approx(2.0)


def test_backproject_identity_example():
    cfg = CameraConfig(t_mount=np.zeros(3))
    obs = backproject((0.0, 0.0), 2.0, psi=0.0, cfg=cfg)
    assert obs.q.x == pytest.approx(0.0)
    assert obs.q.y == pytest.approx(0.0)


def test_backproject_yaw_invariant_on_axis():
    cfg = CameraConfig(t_mount=np.zeros(3))
    obs = backproject((0.0, 0.0), 2.0, psi=math.pi / 2, cfg=cfg)
    assert obs.q.x == pytest.approx(0.0, abs=1e-12)
    assert obs.q.y == pytest.approx(0.0, abs=1e-12)


def test_backproject_needs_positive_depth():
    cfg = CameraConfig()
    with pytest.raises(InvalidDepthError):
        backproject((0.0, 0.0), 0.0, psi=0.0, cfg=cfg)


def _agent(p, psi):
    return AgentState(id=1, p=p, v=ZERO, psi=psi)


def test_stereo_occluded_returns_nothing():
    cfg = CameraConfig(fov_half_angle=math.radians(60))
    wall = ObstacleSegment(a=Vec2(1, -1), b=Vec2(1, 1))
    agent = _agent(Vec2(2, 0), psi=math.pi)
    target = TargetState(p=ZERO, v=ZERO)
    assert sense_stereo(agent, target, cfg, [wall]) is None
    assert sense_stereo(agent, target, cfg, []) is not None


def test_stereo_outside_fov_returns_nothing():
    cfg = CameraConfig(fov_half_angle=math.radians(45))
    agent = _agent(Vec2(2, 0), psi=0.0)  # looking away from the target
    target = TargetState(p=ZERO, v=ZERO)
    assert sense_stereo(agent, target, cfg, []) is None


def test_stereo_beyond_max_depth_returns_nothing():
    cfg = CameraConfig(max_depth=1.5)
    agent = _agent(Vec2(2, 0), psi=math.pi)
    target = TargetState(p=ZERO, v=ZERO)
    assert sense_stereo(agent, target, cfg, []) is None


def test_dead_agent_sees_nothing():
    cfg = CameraConfig()
    agent = AgentState(id=1, p=Vec2(2, 0), v=ZERO, psi=math.pi, alive=False)
    assert sense_stereo(agent, TargetState(p=ZERO, v=ZERO), cfg, []) is None


@given(
    st.floats(min_value=-4, max_value=4),
    st.floats(min_value=-4, max_value=4),
    st.floats(min_value=-3, max_value=3),
)
@settings(max_examples=100)
def test_stereo_roundtrip_recovers_relative_position(px, py, psi):
    # zero noise: backproject(project(q)) == q to 1e-9 for any pose
    cfg = CameraConfig()
    q_true = Vec2(px, py)
    sample = project_relative(q_true, psi, cfg)
    assert sample is not None  # virtual-height rig is always invertible
    obs = backproject((sample.u, sample.v), sample.depth, psi, cfg)
    assert (obs.q - q_true).norm() < 1e-9


def test_stereo_full_pipeline_roundtrip():
    cfg = CameraConfig(fov_half_angle=math.radians(80))
    rng = np.random.default_rng(5)
    for _ in range(50):
        p = Vec2(*rng.uniform(-3, 3, 2))
        target = TargetState(p=Vec2(*rng.uniform(-1, 1, 2)), v=ZERO)
        to_t = target.p - p
        if to_t.norm() < 1e-6:
            continue
        psi = math.atan2(to_t.y, to_t.x)
        agent = _agent(p, psi)
        sample = sense_stereo(agent, target, cfg, [])
        assert sample is not None
        obs = backproject((sample.u, sample.v), sample.depth, psi, cfg)
        assert (obs.q - (p - target.p)).norm() < 1e-9


def test_visibility_pure_function_of_geometry():
    cfg = CameraConfig()
    wall = ObstacleSegment(a=Vec2(1, -1), b=Vec2(1, 1))
    agent = _agent(Vec2(2, 0), psi=math.pi)
    target = TargetState(p=ZERO, v=ZERO)
    results = {sense_stereo(agent, target, cfg, [wall]) is None for _ in range(10)}
    assert results == {True}


def test_camera_config_validation():
    with pytest.raises(ValueError):
        CameraConfig(k_matrix=np.zeros((3, 3)))
    with pytest.raises(ValueError):
        CameraConfig(r_mount=2 * np.eye(3))
