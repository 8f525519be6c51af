import itertools
import time

import pytest

from uiesim.arbiter import arbitrate
from uiesim.model import ACK, NOOP, ChannelObservation, ObsKind, SlotAction

P1 = frozenset({1})


def test_idle_channel():
    res = arbitrate({0: SlotAction.listen(3)})
    assert res.observations[0].kind is ObsKind.IDLE
    assert res.successful_transmissions == []


def test_single_transmitter_is_heard():
    res = arbitrate({0: SlotAction.transmit_data(2, P1), 1: SlotAction.listen(2)})
    assert res.observations == {1: ChannelObservation(ObsKind.MESSAGE, P1)}
    assert res.successful_transmissions == [(0, 2)]


def test_two_transmitters_collide():
    res = arbitrate({
        0: SlotAction.transmit_data(2, P1),
        1: SlotAction.transmit_data(2, frozenset({2})),
        2: SlotAction.listen(2),
    })
    assert res.observations[2].kind is ObsKind.COLLISION
    assert res.successful_transmissions == []
    assert res.per_channel_transmitter_count[2] == 2


def test_no_listener_means_no_success():
    res = arbitrate({0: SlotAction.transmit_data(1, P1), 1: SlotAction.listen(2)})
    assert 0 not in res.observations
    assert res.successful_transmissions == []


def test_acks_arbitrate_like_data():
    one = arbitrate({0: SlotAction.transmit_ack(1), 1: SlotAction.listen(1)})
    assert one.observations[1] == ChannelObservation(ObsKind.MESSAGE, ACK)
    many = arbitrate({0: SlotAction.transmit_ack(1), 1: SlotAction.transmit_ack(1), 2: SlotAction.listen(1)})
    assert many.observations[2].kind is ObsKind.COLLISION


def test_noop_is_ignored():
    res = arbitrate({0: NOOP, 1: SlotAction.listen(1)})
    assert res.observations[1].kind is ObsKind.IDLE
    assert 0 not in res.observations


def _options(channels):
    opts = [NOOP]
    for c in range(1, channels + 1):
        opts += [SlotAction.listen(c), SlotAction.transmit_ack(c)]
    return opts


def _truth_table(actions):
    """Per-listener expectation written out case by case."""
    expected, success = {}, []
    for v, a in actions.items():
        if a.kind.value == "noop":
            continue
        senders = [u for u, b in actions.items() if b.is_transmit and b.channel == a.channel]
        if a.is_transmit:
            others_listen = any(
                b.kind.value == "listen" and b.channel == a.channel for b in actions.values()
            )
            if senders == [v] and others_listen:
                success.append((v, a.channel))
            continue
        if len(senders) == 0:
            expected[v] = ObsKind.IDLE
        elif len(senders) == 1:
            expected[v] = ObsKind.MESSAGE
        else:
            expected[v] = ObsKind.COLLISION
    return expected, sorted(success)


@pytest.mark.parametrize("channels", [1, 2])
def test_exhaustive_truth_table(channels):
    start = time.perf_counter()
    checked = 0
    for m in range(1, 5):
        # data payloads are distinct per node so message content can be checked too
        per_node = []
        for v in range(m):
            opts = _options(channels) + [
                SlotAction.transmit_data(c, frozenset({v})) for c in range(1, channels + 1)
            ]
            per_node.append(opts)
        for combo in itertools.product(*per_node):
            actions = dict(enumerate(combo))
            res = arbitrate(actions)
            expected, success = _truth_table(actions)
            assert {v: o.kind for v, o in res.observations.items()} == expected
            assert res.successful_transmissions == success
            for v, obs in res.observations.items():
                if obs.kind is ObsKind.MESSAGE:
                    (sender,) = [u for u, b in actions.items()
                                 if b.is_transmit and b.channel == actions[v].channel]
                    if actions[sender].kind.value == "transmit_data":
                        assert obs.payload == frozenset({sender})
                    else:
                        assert obs.payload is ACK
            checked += 1
    assert checked > 0
    assert time.perf_counter() - start < 1.0 * channels
