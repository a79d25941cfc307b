import numpy as np
import pytest

from circumnav.comms import (
    ControlInput,
    DeliveryPolicy,
    Displacement,
    Message,
    MessageBus,
    Phase,
    TargetPacket,
    Topology,
    update_topology,
)
from circumnav.errors import ScenarioEndSignal
from circumnav.geometry import Vec2


def _broadcast_all(ids, step):
    out = []
    for i in ids:
        for payload in (
            Displacement(delta=Vec2(0.1, 0), psi=0.0),
            ControlInput(u=Vec2(0, 0)),
            TargetPacket(q=None, sigma_q=None, x_bar=None, p_minus=None),
            Phase(theta=0.5),
        ):
            out.append(Message(sender=i, recipient=None, step=step, payload=payload))
    return out


def test_full_topology_counting():
    topo = Topology.full([1, 2, 3])
    bus = MessageBus()
    inboxes = bus.exchange(_broadcast_all([1, 2, 3], 0), topo, 0)
    for i in (1, 2, 3):
        # two neighbors, four payload kinds each
        assert len(inboxes[i]) == 8
        kinds = {type(m.payload) for m in inboxes[i]}
        assert kinds == {Displacement, ControlInput, TargetPacket, Phase}


def test_total_loss_empties_inboxes():
    topo = Topology.full([1, 2])
    bus = MessageBus(policy=DeliveryPolicy(loss_prob=1.0))
    inboxes = bus.exchange(_broadcast_all([1, 2], 0), topo, 0)
    assert all(len(v) == 0 for v in inboxes.values())


def test_delay_shifts_arrival_step():
    topo = Topology.full([1, 2])
    bus = MessageBus(policy=DeliveryPolicy(delay_steps=1))
    first = bus.exchange(
        [Message(sender=1, recipient=None, step=5, payload=Phase(theta=1.0))], topo, 5
    )
    assert first[2] == []
    second = bus.exchange([], topo, 6)
    assert len(second[2]) == 1
    assert second[2][0].step == 5  # emitted-at tag preserved


def test_seeded_loss_reproducible():
    topo = Topology.full([1, 2, 3])

    def run():
        bus = MessageBus(
            policy=DeliveryPolicy(loss_prob=0.5), rng=np.random.default_rng(99)
        )
        out = []
        for k in range(20):
            inboxes = bus.exchange(_broadcast_all([1, 2, 3], k), topo, k)
            out.append({i: len(v) for i, v in inboxes.items()})
        return out

    assert run() == run()


def test_conservation():
    topo = Topology.full([1, 2, 3])
    bus = MessageBus(
        policy=DeliveryPolicy(loss_prob=0.3, delay_steps=2),
        rng=np.random.default_rng(0),
    )
    for k in range(50):
        bus.exchange(_broadcast_all([1, 2, 3], k), topo, k)
        s = bus.stats
        assert s.delivered + s.dropped + s.in_flight == s.emitted


def test_unicast_respects_topology():
    topo = Topology.ring([1, 2, 3, 4])
    bus = MessageBus()
    msg = Message(sender=1, recipient=3, step=0, payload=Phase(theta=0.0))
    inboxes = bus.exchange([msg], topo, 0)
    assert inboxes[3] == []  # 3 is not a ring neighbor of 1


def test_update_topology_removes_dead():
    topo = Topology.full([1, 2, 3])
    out = update_topology(topo, [1, 3])
    assert out.agents() == [1, 3]
    assert out.neighbors_of(1) == frozenset({3})
    assert out.neighbors_of(3) == frozenset({1})


def test_update_topology_single_agent():
    topo = Topology.full([1, 2])
    out = update_topology(topo, [2])
    assert out.neighbors_of(2) == frozenset()


def test_update_topology_empty_raises():
    topo = Topology.full([1, 2])
    with pytest.raises(ScenarioEndSignal):
        update_topology(topo, [])


def test_ring_minus_node_preserved():
    topo = Topology.ring([1, 2, 3, 4])
    out = update_topology(topo, [1, 2, 4])
    assert out.neighbors_of(1) == frozenset({2, 4})
    assert out.neighbors_of(2) == frozenset({1})
    assert out.neighbors_of(4) == frozenset({1})


def test_policy_validation():
    with pytest.raises(ValueError):
        DeliveryPolicy(loss_prob=1.5)
    with pytest.raises(ValueError):
        DeliveryPolicy(delay_steps=-1)
