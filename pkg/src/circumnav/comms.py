"""Inter-agent message bus with configurable topology and impairments.

The bus is the only channel between agents. It is flushed once per step;
with the default lossless zero-delay policy every input the estimators
and the controller expect is present in the consuming agent's inbox at
the step it is needed.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Union

import numpy as np

from .errors import ScenarioEndSignal
from .geometry import Vec2


@dataclass(frozen=True)
class Displacement:
    delta: Vec2
    psi: float


@dataclass(frozen=True)
class ControlInput:
    u: Vec2


@dataclass(frozen=True)
class TargetPacket:
    q: Optional[Vec2]
    sigma_q: Optional[np.ndarray]
    x_bar: Optional[np.ndarray]
    p_minus: Optional[np.ndarray]


@dataclass(frozen=True)
class Phase:
    theta: float


Payload = Union[Displacement, ControlInput, TargetPacket, Phase]


@dataclass(frozen=True)
class Message:
    sender: int
    recipient: Optional[int]  # None broadcasts to all neighbors
    step: int
    payload: Payload


@dataclass(frozen=True)
class Topology:
    """Symmetric neighbor sets without self-loops."""

    neighbors: Mapping[int, frozenset[int]]

    @staticmethod
    def full(agents: Iterable[int]) -> "Topology":
        ids = sorted(set(agents))
        return Topology(
            neighbors={
                i: frozenset(j for j in ids if j != i) for i in ids
            }
        )

    @staticmethod
    def ring(agents: Iterable[int]) -> "Topology":
        ids = sorted(set(agents))
        n = len(ids)
        nbrs: dict[int, set[int]] = {i: set() for i in ids}
        if n > 1:
            for idx, i in enumerate(ids):
                nbrs[i].add(ids[(idx + 1) % n])
                nbrs[i].add(ids[(idx - 1) % n])
        return Topology(neighbors={i: frozenset(s) for i, s in nbrs.items()})

    def agents(self) -> list[int]:
        return sorted(self.neighbors)

    def neighbors_of(self, i: int) -> frozenset[int]:
        return self.neighbors.get(i, frozenset())


def update_topology(topology: Topology, alive: Iterable[int]) -> Topology:
    """Induced subgraph over the surviving agents."""
    alive_set = set(alive)
    if not alive_set:
        raise ScenarioEndSignal("no agents remain alive")
    return Topology(
        neighbors={
            i: frozenset(j for j in topology.neighbors_of(i) if j in alive_set)
            for i in topology.agents()
            if i in alive_set
        }
    )


@dataclass
class DeliveryPolicy:
    loss_prob: float = 0.0
    delay_steps: int = 0

    def __post_init__(self):
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ValueError("loss probability must lie in [0, 1]")
        if self.delay_steps < 0:
            raise ValueError("delay must be non-negative")


@dataclass
class BusStats:
    emitted: int = 0
    delivered: int = 0
    dropped: int = 0
    in_flight: int = 0


class MessageBus:
    """Delivers messages along topology edges with seeded loss and delay.

    When ``trace`` is enabled, every routed delivery is appended to
    :attr:`trace_rows` as (step, sender, recipient, payload kind,
    delivered flag).
    """

    def __init__(
        self,
        policy: Optional[DeliveryPolicy] = None,
        rng: Optional[np.random.Generator] = None,
        trace: bool = False,
    ):
        self.policy = policy or DeliveryPolicy()
        self.rng = rng or np.random.default_rng(0)
        self.stats = BusStats()
        self.trace = trace
        self.trace_rows: list[tuple[int, int, int, str, int]] = []
        self._pending: deque[tuple[int, int, Message]] = deque()

    def _record(self, step: int, recipient: int, msg: Message, delivered: bool) -> None:
        if self.trace:
            self.trace_rows.append(
                (step, msg.sender, recipient, type(msg.payload).__name__, int(delivered))
            )

    def exchange(
        self, outbox: Iterable[Message], topology: Topology, step: int
    ) -> dict[int, list[Message]]:
        """Route one step's outbox; returns each agent's inbox for the step."""
        inboxes: dict[int, list[Message]] = {i: [] for i in topology.agents()}
        deliveries: list[tuple[int, int, Message]] = []
        for msg in outbox:
            recipients = (
                sorted(topology.neighbors_of(msg.sender))
                if msg.recipient is None
                else [msg.recipient]
            )
            for r in recipients:
                if r not in inboxes or r not in topology.neighbors_of(msg.sender):
                    continue
                self.stats.emitted += 1
                deliveries.append((step + self.policy.delay_steps, r, msg))
        for due, r, msg in deliveries:
            if self.policy.loss_prob > 0.0 and self.rng.random() < self.policy.loss_prob:
                self.stats.dropped += 1
                self._record(step, r, msg, delivered=False)
            else:
                self._pending.append((due, r, msg))
        still_pending: deque[tuple[int, int, Message]] = deque()
        for due, r, msg in self._pending:
            if due <= step:
                if r in inboxes:
                    inboxes[r].append(msg)
                    self.stats.delivered += 1
                    self._record(step, r, msg, delivered=True)
                else:
                    self.stats.dropped += 1  # recipient died in flight
                    self._record(step, r, msg, delivered=False)
            else:
                still_pending.append((due, r, msg))
        self._pending = still_pending
        self.stats.in_flight = len(self._pending)
        return inboxes
