"""Single-slot collision model for a single-hop multi-channel network.

A listener on channel c hears silence with no transmitter, the message with
exactly one, and a collision with two or more. Transmitters hear nothing.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Tuple

from .model import (
    ACK,
    COLLISION,
    IDLE,
    ActionKind,
    ChannelObservation,
    NodeId,
    ObsKind,
    SlotAction,
)


@dataclass
class SlotResolution:
    observations: Dict[NodeId, ChannelObservation] = field(default_factory=dict)
    per_channel_transmitter_count: Dict[int, int] = field(default_factory=dict)
    successful_transmissions: List[Tuple[NodeId, int]] = field(default_factory=list)


def arbitrate(actions: Mapping[NodeId, SlotAction]) -> SlotResolution:
    transmitters: Dict[int, List[Tuple[NodeId, SlotAction]]] = defaultdict(list)
    listeners: Dict[int, List[NodeId]] = defaultdict(list)
    for node, action in actions.items():
        if action.kind is ActionKind.NOOP:
            continue
        if action.channel is None:
            raise ValueError(f"node {node}: action {action.kind.value} has no channel")
        if action.is_transmit:
            transmitters[action.channel].append((node, action))
        else:
            listeners[action.channel].append(node)

    res = SlotResolution()
    for channel in set(transmitters) | set(listeners):
        senders = transmitters.get(channel, [])
        res.per_channel_transmitter_count[channel] = len(senders)
        if not senders:
            obs = IDLE
        elif len(senders) == 1:
            sender, action = senders[0]
            if action.kind is ActionKind.TRANSMIT_ACK:
                obs = ChannelObservation(ObsKind.MESSAGE, ACK)
            else:
                obs = ChannelObservation(ObsKind.MESSAGE, action.packets)
            if listeners.get(channel):
                res.successful_transmissions.append((sender, channel))
        else:
            obs = COLLISION
        for node in listeners.get(channel, []):
            res.observations[node] = obs
    res.successful_transmissions.sort()
    return res
