"""Per-node protocol state machine, one decide/update pair per slot.

Slots 1-2 run the multi-channel process on a uniformly chosen channel with
probability ``p``; slots 3-4 run the primary-channel process on channel 1
with probability ``q``. A node whose data was heard by somebody (it sees an
ack or a busy channel in the following slot) becomes inactive for good.
"""
from __future__ import annotations

import enum
from dataclasses import replace
from typing import Optional

from .model import (
    PRIMARY_CHANNEL,
    NOOP,
    Activity,
    ActionKind,
    ChannelObservation,
    NodeState,
    ObsKind,
    PacketId,
    SlotAction,
    SlotMemory,
)


class ConfigError(ValueError):
    pass


class ProbUpdateEvent(enum.Enum):
    TRANSMITTED_SELF = "transmitted_self"
    OBSERVED_IDLE = "observed_idle"
    RECEIVED_MESSAGE = "received_message"
    OBSERVED_BUSY = "observed_busy"


def init_node(is_source: bool, packet: Optional[PacketId], zeta: float) -> NodeState:
    if is_source and packet is None:
        raise ConfigError("a source node needs a packet")
    if not is_source and packet is not None:
        raise ConfigError("a non-source node cannot hold a packet")
    if is_source:
        return NodeState(Activity.ACTIVE, zeta, zeta, frozenset([packet]))
    return NodeState(Activity.INACTIVE, zeta, zeta, frozenset())


def update_probability(w: float, event: ProbUpdateEvent, zeta: float) -> float:
    if event is ProbUpdateEvent.OBSERVED_IDLE:
        return min(2 * w, zeta)
    return w / 2


def _event_for(action: SlotAction, obs: Optional[ChannelObservation]) -> ProbUpdateEvent:
    if action.kind is ActionKind.TRANSMIT_DATA:
        return ProbUpdateEvent.TRANSMITTED_SELF
    if obs is None:
        raise ValueError("a listening node needs an observation")
    if obs.kind is ObsKind.IDLE:
        return ProbUpdateEvent.OBSERVED_IDLE
    if obs.kind is ObsKind.MESSAGE:
        return ProbUpdateEvent.RECEIVED_MESSAGE
    return ProbUpdateEvent.OBSERVED_BUSY


def decide_slot1(state: NodeState, rand, n_channels: int) -> SlotAction:
    """Draw a channel, then transmit with probability ``p`` or listen.

    ``rand`` is anything with a ``random()`` method; the first draw picks
    the channel and the second decides whether to transmit.
    """
    if not state.is_active:
        return NOOP
    channel = 1 + int(rand.random() * n_channels)
    if rand.random() < state.p:
        return SlotAction.transmit_data(channel, state.packets)
    return SlotAction.listen(channel)


def update_after_slot1(
    state: NodeState,
    action: SlotAction,
    obs: Optional[ChannelObservation],
    zeta: float,
) -> NodeState:
    if action.kind is ActionKind.NOOP:
        return state
    event = _event_for(action, obs)
    memory = replace(
        state.memory,
        channel=action.channel,
        transmitted1=event is ProbUpdateEvent.TRANSMITTED_SELF,
        received1=event is ProbUpdateEvent.RECEIVED_MESSAGE,
    )
    packets = state.packets
    if event is ProbUpdateEvent.RECEIVED_MESSAGE:
        packets = packets | obs.packets
    return replace(
        state,
        p=update_probability(state.p, event, zeta),
        packets=packets,
        memory=memory,
    )


def decide_slot2(state: NodeState) -> SlotAction:
    mem = state.memory
    if mem.received1:
        return SlotAction.transmit_ack(mem.channel)
    if mem.transmitted1:
        return SlotAction.listen(mem.channel)
    return NOOP


def update_after_slot2(
    state: NodeState,
    obs: Optional[ChannelObservation],
    hold_active: bool = False,
) -> NodeState:
    if state.memory.transmitted1 and obs is not None and obs.is_busy and not hold_active:
        return replace(state, activity=Activity.INACTIVE)
    return state


def decide_slot3(state: NodeState, rand) -> SlotAction:
    if not state.is_active:
        return SlotAction.listen(PRIMARY_CHANNEL)
    if rand.random() < state.q:
        return SlotAction.transmit_data(PRIMARY_CHANNEL, state.packets)
    return SlotAction.listen(PRIMARY_CHANNEL)


def update_after_slot3(
    state: NodeState,
    action: SlotAction,
    obs: Optional[ChannelObservation],
    zeta: float,
) -> NodeState:
    if action.kind is ActionKind.NOOP:
        return state
    event = _event_for(action, obs)
    received = event is ProbUpdateEvent.RECEIVED_MESSAGE
    memory = replace(
        state.memory,
        transmitted3=event is ProbUpdateEvent.TRANSMITTED_SELF,
        received3=received,
    )
    packets = state.packets | obs.packets if received else state.packets
    q = update_probability(state.q, event, zeta) if state.is_active else state.q
    return replace(state, q=q, packets=packets, memory=memory)


def decide_slot4(state: NodeState) -> SlotAction:
    mem = state.memory
    if mem.received3:
        return SlotAction.transmit_ack(PRIMARY_CHANNEL)
    if state.is_active and mem.transmitted3:
        return SlotAction.listen(PRIMARY_CHANNEL)
    return NOOP


def update_after_slot4(
    state: NodeState,
    obs: Optional[ChannelObservation],
    hold_active: bool = False,
) -> NodeState:
    activity = state.activity
    if (
        state.is_active
        and state.memory.transmitted3
        and obs is not None
        and obs.is_busy
        and not hold_active
    ):
        activity = Activity.INACTIVE
    return replace(state, activity=activity, memory=SlotMemory())
