import numpy as np
from hypothesis import given, strategies as st

from uiesim import rng

u64 = st.integers(min_value=0, max_value=2 ** 64 - 1)


@given(u64, st.integers(0, 10 ** 6), st.sampled_from([rng.SLOT1_CHANNEL, rng.SLOT1_TRANSMIT, rng.SLOT3_TRANSMIT]),
       st.lists(st.integers(0, 2 ** 20), min_size=1, max_size=20))
def test_scalar_and_vector_agree(seed, t, tag, nodes):
    vec = rng.uniform_array(seed, t, tag, np.array(nodes))
    assert vec.tolist() == [rng.uniform(seed, t, tag, v) for v in nodes]
    assert np.all((vec >= 0) & (vec < 1))


def test_channels_are_roughly_uniform():
    u = rng.uniform_array(7, 0, rng.SLOT1_CHANNEL, np.arange(80_000))
    counts = np.bincount(rng.channel_from_uniform(u, 8), minlength=9)[1:]
    assert counts.min() > 9_500 and counts.max() < 10_500
    assert rng.channel_from_uniform(0.999999, 8) == 8


def test_streams_differ_by_tag_and_round():
    a = rng.uniform(1, 0, rng.SLOT1_CHANNEL, 5)
    assert a != rng.uniform(1, 0, rng.SLOT1_TRANSMIT, 5)
    assert a != rng.uniform(1, 1, rng.SLOT1_CHANNEL, 5)
    assert a != rng.uniform(2, 0, rng.SLOT1_CHANNEL, 5)


def test_node_stream_order():
    seen = []
    s = rng.NodeStream(lambda t, tag, v: seen.append((t, tag, v)) or 0.5, 3, 9, (1, 2))
    s.random(), s.random()
    assert seen == [(3, 1, 9), (3, 2, 9)]
