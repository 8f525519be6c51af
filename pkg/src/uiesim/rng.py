"""Counter-based random draws.

Every draw is a pure function of ``(seed, round, tag, node)``, so each node
owns an independent stream and the order in which nodes are evaluated never
changes the outcome. The scalar and vectorised paths produce identical bits.
"""
from __future__ import annotations

import numpy as np

MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_INV53 = 1.0 / (1 << 53)

# draw tags
SLOT1_CHANNEL = 0x10
SLOT1_TRANSMIT = 0x11
SLOT3_TRANSMIT = 0x30


def mix64(x: int) -> int:
    z = (x + _GOLDEN) & MASK
    z = ((z ^ (z >> 30)) * _M1) & MASK
    z = ((z ^ (z >> 27)) * _M2) & MASK
    return z ^ (z >> 31)


def _mix64_array(x: np.ndarray) -> np.ndarray:
    z = x + np.uint64(_GOLDEN)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def _round_key(seed: int, t: int, tag: int) -> int:
    h = mix64(seed & MASK)
    h = mix64(h ^ (t & MASK))
    return mix64(h ^ tag)


def uniform(seed: int, t: int, tag: int, node: int) -> float:
    """A float in [0, 1) for one node."""
    h = mix64(mix64(_round_key(seed, t, tag) ^ node))
    return (h >> 11) * _INV53


def uniform_array(seed: int, t: int, tag: int, nodes: np.ndarray) -> np.ndarray:
    key = np.uint64(_round_key(seed, t, tag))
    h = _mix64_array(_mix64_array(nodes.astype(np.uint64) ^ key))
    return (h >> np.uint64(11)).astype(np.float64) * _INV53


def channel_from_uniform(u, n_channels: int):
    """Map a uniform draw to a channel in [1, F]."""
    if isinstance(u, np.ndarray):
        return 1 + (u * n_channels).astype(np.int64)
    return 1 + int(u * n_channels)


class NodeStream:
    """Random source for one node in one slot.

    ``random()`` yields ``draw(t, tag, node)`` for each of ``tags`` in turn;
    the node state machine only ever calls ``random()``.
    """

    def __init__(self, draw, t: int, node: int, tags):
        self._draw = draw
        self._t = t
        self._node = node
        self._tags = list(tags)
        self._i = 0

    def random(self) -> float:
        if self._i >= len(self._tags):
            raise RuntimeError("node stream exhausted")
        tag = self._tags[self._i]
        self._i += 1
        return self._draw(self._t, tag, self._node)
