"""Slow, literal engine: every node runs the state machine in :mod:`uiesim.node`.

Each slot is a two-phase step: collect every node's action, arbitrate, then
apply every node's update. Used to cross-check the vectorised engine on small
networks.
"""
from __future__ import annotations

import math
from collections import Counter
from typing import List

import numpy as np

from . import node as uie
from . import rng
from .arbiter import arbitrate
from .engine import RoundTrace, SimConfig
from .model import ActionKind, NodeState


class ReferenceWorld:
    def __init__(self, config: SimConfig, draw=None):
        """``draw`` has the vectorised signature used by :class:`uiesim.engine.World`."""
        self.config = config
        self.n, self.k = config.n, config.k
        self.channels = config.channels
        self.zeta = config.zeta
        self.seed = config.seed
        self.hold_active = config.hold_active
        self.t = 0
        if draw is None:
            self.draw_one = lambda t, tag, v: rng.uniform(self.seed, t, tag, v)
        else:
            self.draw_one = lambda t, tag, v: float(draw(t, tag, np.array([v]))[0])
        self.states: List[NodeState] = []
        for v in range(self.n):
            st = uie.init_node(v < self.k, v if v < self.k else None, self.zeta)
            if v < self.k and config.initial_p_override is not None:
                st = NodeState(st.activity, config.initial_p_override, st.q, st.packets)
            self.states.append(st)
        self.prev_active = self.active.copy()

    @property
    def active(self) -> np.ndarray:
        return np.array([s.is_active for s in self.states], dtype=bool)

    @property
    def p(self) -> np.ndarray:
        return np.array([s.p for s in self.states])

    @property
    def q(self) -> np.ndarray:
        return np.array([s.q for s in self.states])

    @property
    def active_count(self) -> int:
        return sum(s.is_active for s in self.states)

    def node_packets(self, node: int):
        return self.states[node].packets

    def active_union_is_full(self) -> bool:
        union = set()
        for s in self.states:
            if s.is_active:
                union |= s.packets
        return union == set(range(self.k))

    def everyone_complete(self) -> bool:
        full = frozenset(range(self.k))
        return all(s.packets == full for s in self.states)


def run_reference_round(world: ReferenceWorld) -> RoundTrace:
    t, F, zeta = world.t, world.channels, world.zeta
    hold = world.hold_active
    states = world.states
    world.prev_active = world.active.copy()
    act = [v for v, s in enumerate(states) if s.is_active]
    trace = RoundTrace(
        t=t,
        active=len(act),
        sum_p=math.fsum(states[v].p for v in act),
        sum_q=math.fsum(states[v].q for v in act),
    )

    # slot 1
    actions = {}
    for v, s in enumerate(states):
        stream = rng.NodeStream(world.draw_one, t, v, (rng.SLOT1_CHANNEL, rng.SLOT1_TRANSMIT))
        actions[v] = uie.decide_slot1(s, stream, F)
    res = arbitrate(actions)
    per_channel = Counter(a.channel for a in actions.values() if a.kind is not ActionKind.NOOP)
    trace.multi_channels = sum(1 for c in per_channel.values() if c >= 2)
    trace.s1 = len(res.successful_transmissions)
    states[:] = [
        uie.update_after_slot1(s, actions[v], res.observations.get(v), zeta)
        for v, s in enumerate(states)
    ]

    # slot 2
    actions = {v: uie.decide_slot2(s) for v, s in enumerate(states)}
    res = arbitrate(actions)
    before = [s.is_active for s in states]
    states[:] = [
        uie.update_after_slot2(s, res.observations.get(v), hold)
        for v, s in enumerate(states)
    ]
    trace.d2 = sum(b and not s.is_active for b, s in zip(before, states))

    # slot 3
    actions = {}
    for v, s in enumerate(states):
        stream = rng.NodeStream(world.draw_one, t, v, (rng.SLOT3_TRANSMIT,))
        actions[v] = uie.decide_slot3(s, stream)
    res = arbitrate(actions)
    trace.s3 = bool(res.successful_transmissions)
    states[:] = [
        uie.update_after_slot3(s, actions[v], res.observations.get(v), zeta)
        for v, s in enumerate(states)
    ]

    # slot 4
    actions = {v: uie.decide_slot4(s) for v, s in enumerate(states)}
    res = arbitrate(actions)
    before = [s.is_active for s in states]
    states[:] = [
        uie.update_after_slot4(s, res.observations.get(v), hold)
        for v, s in enumerate(states)
    ]
    trace.d4 = sum(b and not s.is_active for b, s in zip(before, states))

    world.t += 1
    return trace
