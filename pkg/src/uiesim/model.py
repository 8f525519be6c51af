"""Shared value types: node state, slot actions and channel observations."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import FrozenSet, Optional, Union

NodeId = int
PacketId = int
PacketSet = FrozenSet[PacketId]

DEFAULT_ZETA = 1 / 32
PRIMARY_CHANNEL = 1


class Activity(enum.Enum):
    ACTIVE = "active"
    INACTIVE = "inactive"


class AckSignal:
    """Contentless acknowledgement payload (a singleton)."""

    _instance: Optional["AckSignal"] = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "ACK"


ACK = AckSignal()


class ObsKind(enum.Enum):
    IDLE = "idle"
    MESSAGE = "message"
    COLLISION = "collision"


@dataclass(frozen=True)
class ChannelObservation:
    kind: ObsKind
    payload: Union[PacketSet, AckSignal, None] = None

    @property
    def is_busy(self) -> bool:
        return self.kind is not ObsKind.IDLE

    @property
    def packets(self) -> PacketSet:
        if isinstance(self.payload, frozenset):
            return self.payload
        return frozenset()


IDLE = ChannelObservation(ObsKind.IDLE)
COLLISION = ChannelObservation(ObsKind.COLLISION)


class ActionKind(enum.Enum):
    TRANSMIT_DATA = "transmit_data"
    TRANSMIT_ACK = "transmit_ack"
    LISTEN = "listen"
    NOOP = "noop"


@dataclass(frozen=True)
class SlotAction:
    kind: ActionKind
    channel: Optional[int] = None
    packets: PacketSet = frozenset()

    @classmethod
    def transmit_data(cls, channel: int, packets: PacketSet) -> "SlotAction":
        return cls(ActionKind.TRANSMIT_DATA, channel, frozenset(packets))

    @classmethod
    def transmit_ack(cls, channel: int) -> "SlotAction":
        return cls(ActionKind.TRANSMIT_ACK, channel)

    @classmethod
    def listen(cls, channel: int) -> "SlotAction":
        return cls(ActionKind.LISTEN, channel)

    @property
    def is_transmit(self) -> bool:
        return self.kind in (ActionKind.TRANSMIT_DATA, ActionKind.TRANSMIT_ACK)


NOOP = SlotAction(ActionKind.NOOP)


@dataclass(frozen=True)
class SlotMemory:
    """Per-round scratch; cleared at every round boundary."""

    channel: Optional[int] = None
    transmitted1: bool = False
    received1: bool = False
    transmitted3: bool = False
    received3: bool = False


@dataclass(frozen=True)
class NodeState:
    activity: Activity
    p: float
    q: float
    packets: PacketSet = frozenset()
    memory: SlotMemory = field(default_factory=SlotMemory)

    @property
    def is_active(self) -> bool:
        return self.activity is Activity.ACTIVE


def merge_packets(a: PacketSet, b: PacketSet) -> PacketSet:
    return frozenset(a) | frozenset(b)
