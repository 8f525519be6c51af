import pytest

from uiesim.model import ACK, COLLISION, IDLE, NOOP, Activity, ActionKind, ChannelObservation, ObsKind, SlotAction, SlotMemory
from uiesim.node import (
    ConfigError,
    ProbUpdateEvent as Ev,
    decide_slot1,
    decide_slot2,
    decide_slot3,
    decide_slot4,
    init_node,
    update_after_slot1,
    update_after_slot2,
    update_after_slot3,
    update_after_slot4,
    update_probability,
)
from dataclasses import replace

Z = 1 / 32


class Scripted:
    def __init__(self, *values):
        self.values = list(values)

    def random(self):
        return self.values.pop(0)


def msg(*packets):
    return ChannelObservation(ObsKind.MESSAGE, frozenset(packets))


ACK_OBS = ChannelObservation(ObsKind.MESSAGE, ACK)


def active(p=0.02, q=0.02, packets=(1,), **mem):
    return replace(init_node(True, packets[0], Z), p=p, q=q, packets=frozenset(packets),
                   memory=SlotMemory(**mem))


def inactive(**mem):
    return replace(init_node(False, None, Z), memory=SlotMemory(**mem))


def test_init_node():
    s = init_node(True, 3, Z)
    assert (s.activity, s.p, s.q, s.packets) == (Activity.ACTIVE, Z, Z, {3})
    s = init_node(False, None, Z)
    assert (s.activity, s.p, s.q, s.packets) == (Activity.INACTIVE, Z, Z, frozenset())
    s = init_node(True, 0, 1 / 16)
    assert (s.p, s.q, s.packets) == (1 / 16, 1 / 16, {0})
    with pytest.raises(ConfigError):
        init_node(True, None, Z)
    with pytest.raises(ConfigError):
        init_node(False, 2, Z)


@pytest.mark.parametrize("w,ev,zeta,out", [
    (0.01, Ev.OBSERVED_IDLE, 1 / 32, 0.02),
    (0.03, Ev.OBSERVED_IDLE, 0.03125, 0.03125),
    (0.02, Ev.OBSERVED_BUSY, 1 / 32, 0.01),
    (0.02, Ev.TRANSMITTED_SELF, 1 / 32, 0.01),
    (0.02, Ev.RECEIVED_MESSAGE, 1 / 32, 0.01),
])
def test_update_probability(w, ev, zeta, out):
    assert update_probability(w, ev, zeta) == pytest.approx(out, abs=1e-15)


def test_decide_slot1():
    assert decide_slot1(inactive(), Scripted(), 4) is NOOP
    # channel draw 0.6 of F=4 -> 3, then 0.0 < p -> transmit
    a = decide_slot1(active(packets=(1, 2)), Scripted(0.6, 0.0), 4)
    assert a == SlotAction.transmit_data(3, frozenset({1, 2}))
    a = decide_slot1(active(), Scripted(0.1, 0.99), 4)
    assert a == SlotAction.listen(1)


def test_update_after_slot1():
    # zeta = 1/16 so that doubling 0.02 is not capped
    s = update_after_slot1(active(), SlotAction.listen(2), IDLE, 1 / 16)
    assert s.p == pytest.approx(0.04) and s.packets == {1}
    s = update_after_slot1(active(), SlotAction.listen(2), msg(2), Z)
    assert s.p == pytest.approx(0.01) and s.packets == {1, 2} and s.memory.received1
    s = update_after_slot1(active(), SlotAction.transmit_data(2, frozenset({1})), None, Z)
    assert s.p == pytest.approx(0.01) and s.memory.transmitted1 and s.memory.channel == 2
    s = update_after_slot1(active(), SlotAction.listen(2), COLLISION, Z)
    assert s.p == pytest.approx(0.01) and not s.memory.received1
    assert update_after_slot1(inactive(), NOOP, None, Z) == inactive()


def test_decide_slot2():
    assert decide_slot2(active(received1=True, channel=5)) == SlotAction.transmit_ack(5)
    assert decide_slot2(active(transmitted1=True, channel=5)) == SlotAction.listen(5)
    assert decide_slot2(active(channel=5)) is NOOP


@pytest.mark.parametrize("obs,still_active", [(ACK_OBS, False), (COLLISION, False), (IDLE, True)])
def test_update_after_slot2(obs, still_active):
    s = update_after_slot2(active(transmitted1=True, channel=1), obs)
    assert s.is_active == still_active
    assert s.p == 0.02


def test_update_after_slot2_hold_active():
    assert update_after_slot2(active(transmitted1=True), ACK_OBS, hold_active=True).is_active


def test_decide_slot3():
    assert decide_slot3(inactive(), Scripted()) == SlotAction.listen(1)
    assert decide_slot3(active(packets=(4,)), Scripted(0.0)) == SlotAction.transmit_data(1, frozenset({4}))
    assert decide_slot3(active(), Scripted(0.5)) == SlotAction.listen(1)


def test_update_after_slot3():
    s = update_after_slot3(active(q=0.01), SlotAction.listen(1), IDLE, Z)
    assert s.q == pytest.approx(0.02)
    everything = frozenset(range(1, 9))
    s = update_after_slot3(inactive(), SlotAction.listen(1), ChannelObservation(ObsKind.MESSAGE, everything), Z)
    assert s.packets == everything and s.memory.received3 and not s.is_active
    s = update_after_slot3(active(q=0.02), SlotAction.transmit_data(1, frozenset({1})), None, Z)
    assert s.q == pytest.approx(0.01) and s.memory.transmitted3


def test_decide_slot4():
    assert decide_slot4(inactive(received3=True)) == SlotAction.transmit_ack(1)
    assert decide_slot4(active(transmitted3=True)) == SlotAction.listen(1)
    assert decide_slot4(inactive()) is NOOP


@pytest.mark.parametrize("obs,still_active", [(COLLISION, False), (IDLE, True), (ACK_OBS, False)])
def test_update_after_slot4(obs, still_active):
    s = update_after_slot4(active(transmitted3=True, received1=True), obs)
    assert s.is_active == still_active
    assert s.memory == SlotMemory()
