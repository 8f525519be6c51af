"""Round driver for the whole network.

The fast engine keeps the network in numpy arrays: activity flags, the two
transmission probabilities, and a packed packet bitset per source (only
sources can ever be active). Primary-channel broadcasts reach every node at
once, so they go into a shared log instead of being copied into each row.

Random draws come from :mod:`uiesim.rng`, keyed by (seed, round, slot, node),
so the per-node reference engine in :mod:`uiesim.reference` reproduces the
same runs bit for bit.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Callable, IO, List, Optional

import numpy as np

from . import rng
from ._kernels import or_into_rows, union_is_full
from .model import DEFAULT_ZETA, PacketSet


class TraceMode(enum.Enum):
    FULL = "full"
    SUMMARY_ONLY = "summary"


class Status(enum.Enum):
    COMPLETED = "Completed"
    ROUND_CAP_EXCEEDED = "RoundCapExceeded"


class ConfigError(ValueError):
    pass


def log2n(n: int) -> float:
    return math.log2(n) if n > 1 else 0.0


def default_max_rounds(n: int, k: int, n_channels: int) -> int:
    return int(math.ceil(64 * (k / n_channels + n_channels * log2n(n)))) + 10_000


def dyadic_below(zeta: float, p: float) -> float:
    """The value zeta * 2**-j nearest to ``p`` on a log scale (capped at zeta)."""
    if p <= 0:
        raise ConfigError("probability override must be positive")
    if p >= zeta:
        return zeta
    j = max(0, round(math.log2(zeta / p)))
    return math.ldexp(zeta, -j)


@dataclass
class SimConfig:
    n: int
    k: int
    channels: int
    zeta: float = DEFAULT_ZETA
    seed: int = 0
    max_rounds: Optional[int] = None
    trace_mode: TraceMode = TraceMode.FULL
    initial_p_override: Optional[float] = None
    hold_active: bool = False

    def __post_init__(self):
        if isinstance(self.trace_mode, str):
            self.trace_mode = TraceMode(self.trace_mode)
        if not 1 <= self.k <= self.n:
            raise ConfigError(f"need 1 <= k <= n, got n={self.n} k={self.k}")
        if self.channels < 1:
            raise ConfigError(f"need at least one channel, got {self.channels}")
        if not 0 < self.zeta < 0.5:
            raise ConfigError(f"zeta must lie in (0, 1/2), got {self.zeta}")
        if self.initial_p_override is not None and not 0 < self.initial_p_override <= self.zeta:
            raise ConfigError("initial_p_override must lie in (0, zeta]")
        if self.max_rounds is None:
            self.max_rounds = default_max_rounds(self.n, self.k, self.channels)
        if self.max_rounds < 0:
            raise ConfigError("max_rounds must be non-negative")

    @property
    def flogn(self) -> float:
        return self.channels * log2n(self.n)


@dataclass
class RoundTrace:
    t: int
    active: int
    sum_p: float
    sum_q: float
    d2: int = 0
    d4: int = 0
    s1: int = 0
    s3: bool = False
    multi_channels: int = 0

    JSON_KEYS = ("t", "active", "sum_p", "sum_q", "d2", "d4", "s1", "s3")

    def to_json(self) -> str:
        return json.dumps({key: getattr(self, key) for key in self.JSON_KEYS})

    @classmethod
    def from_json(cls, line: str) -> "RoundTrace":
        return cls(**json.loads(line))


@dataclass
class SimResult:
    status: Status
    completion_round: Optional[int]
    first_single_active_round: Optional[int]
    first_below_Flogn_round: Optional[int]
    rounds_run: int
    config: SimConfig
    traces: Optional[List[RoundTrace]] = None
    violations: List[str] = field(default_factory=list)

    def summary(self) -> dict:
        cfg = self.config
        return {
            "status": self.status.value,
            "completion_round": self.completion_round,
            "first_single_active_round": self.first_single_active_round,
            "first_below_Flogn_round": self.first_below_Flogn_round,
            "rounds_run": self.rounds_run,
            "n": cfg.n,
            "k": cfg.k,
            "F": cfg.channels,
            "zeta": cfg.zeta,
            "seed": cfg.seed,
            "max_rounds": cfg.max_rounds,
        }


def write_traces(traces, fh: IO[str]) -> None:
    for tr in traces:
        fh.write(tr.to_json())
        fh.write("\n")


def read_traces(fh: IO[str]) -> List[RoundTrace]:
    return [RoundTrace.from_json(line) for line in fh if line.strip()]


class BroadcastLog:
    """Append-only list of primary-channel broadcasts with fast suffix unions.

    Keeps the union of every aligned block of 2**j entries, so the union of
    entries ``[start, len)`` costs O(log len) row operations.
    """

    def __init__(self, words: int):
        self.words = words
        self._levels: List[List[np.ndarray]] = [[]]

    def __len__(self) -> int:
        return len(self._levels[0])

    def append(self, row: np.ndarray) -> None:
        self._levels[0].append(row)
        size, lvl = len(self._levels[0]), 1
        while size % (1 << lvl) == 0:
            if len(self._levels) <= lvl:
                self._levels.append([])
            below = self._levels[lvl - 1]
            self._levels[lvl].append(below[-2] | below[-1])
            lvl += 1

    def union_from(self, start: int) -> np.ndarray:
        out = np.zeros(self.words, dtype=np.uint64)
        pos, size = int(start), len(self)
        while pos < size:
            lvl = 0
            while (
                lvl + 1 < len(self._levels)
                and pos % (1 << (lvl + 1)) == 0
                and pos + (1 << (lvl + 1)) <= size
            ):
                lvl += 1
            out |= self._levels[lvl][pos >> lvl]
            pos += 1 << lvl
        return out


class World:
    """Vectorised network state. Sources are nodes ``0..k-1``; node i holds packet i.

    Node i's packet set is ``bits[i]`` (empty for non-sources) united with
    every broadcast in ``log[since[i]:]``. Only nodes whose packets are about
    to be sent get their row brought up to date.
    """

    def __init__(self, config: SimConfig, draw=None):
        """``draw(t, tag, nodes) -> floats in [0, 1)`` replaces the seeded draws (for scripting)."""
        self.config = config
        n, k = config.n, config.k
        self.n, self.k = n, k
        self.channels = config.channels
        self.zeta = config.zeta
        self.seed = config.seed
        self.hold_active = config.hold_active
        self.t = 0
        self.draw = draw or (lambda t, tag, nodes: rng.uniform_array(self.seed, t, tag, nodes))

        self.active = np.zeros(n, dtype=bool)
        self.active[:k] = True
        self.prev_active = self.active.copy()
        p0 = self.zeta if config.initial_p_override is None else config.initial_p_override
        self.p = np.full(n, self.zeta)
        self.p[:k] = p0
        self.q = np.full(n, self.zeta)

        self.words = (k + 63) // 64
        self.bits = np.zeros((k, self.words), dtype=np.uint64)
        idx = np.arange(k)
        self.bits[idx, idx // 64] = np.uint64(1) << (idx % 64).astype(np.uint64)
        self.full_row = np.zeros(self.words, dtype=np.uint64)
        for w in range(self.words):
            width = min(64, k - 64 * w)
            self.full_row[w] = np.uint64((1 << width) - 1)
        # active sources occupy rows [0, active_rows); a deactivated row is swapped past the end
        self.row_of = np.arange(k)
        self.node_of_row = np.arange(k)
        self.active_rows = k
        self.since = np.zeros(n, dtype=np.int64)
        self.log = BroadcastLog(self.words)

    @property
    def active_count(self) -> int:
        return int(self.active.sum())

    def row(self, node: int) -> np.ndarray:
        return self.bits[self.row_of[node]]

    def sync(self, node: int) -> np.ndarray:
        """Fold pending broadcasts into a source's row and return the row."""
        row = self.row(node)
        if self.since[node] < len(self.log):
            row |= self.log.union_from(self.since[node])
            self.since[node] = len(self.log)
        return row

    def deactivate(self, node: int) -> None:
        self.active[node] = False
        r, last = self.row_of[node], self.active_rows - 1
        other = self.node_of_row[last]
        self.bits[[r, last]] = self.bits[[last, r]]
        self.row_of[node], self.row_of[other] = last, r
        self.node_of_row[r], self.node_of_row[last] = other, node
        self.active_rows -= 1

    def node_packets(self, node: int) -> PacketSet:
        row = self.row(node).copy() if node < self.k else np.zeros(self.words, np.uint64)
        row |= self.log.union_from(self.since[node])
        return _row_to_set(row)

    def active_union_is_full(self) -> bool:
        if self.active_rows == 0:
            return True
        act = self.node_of_row[: self.active_rows]
        tail = self.log.union_from(self.since[act].min())
        return bool(union_is_full(self.bits, self.active_rows, tail, self.full_row))

    def everyone_complete(self) -> bool:
        tails = {int(s): self.log.union_from(s) for s in np.unique(self.since)}
        if any(not np.array_equal(tails[s], self.full_row) for s in np.unique(self.since[self.k:])):
            return False
        for node in range(self.k):
            if not np.array_equal(self.row(node) | tails[int(self.since[node])], self.full_row):
                return False
        return True


def _row_to_set(row: np.ndarray) -> PacketSet:
    out = []
    for w, word in enumerate(row.tolist()):
        while word:
            low = word & -word
            out.append(64 * w + low.bit_length() - 1)
            word ^= low
    return frozenset(out)


def run_round(world: World) -> RoundTrace:
    """Advance ``world`` by one round (four slots) in place and return its trace."""
    t, F, zeta = world.t, world.channels, world.zeta
    world.prev_active = world.active.copy()
    A = np.flatnonzero(world.active)
    trace = RoundTrace(
        t=t,
        active=int(A.size),
        sum_p=math.fsum(world.p[A].tolist()),
        sum_q=math.fsum(world.q[A].tolist()),
    )

    # slots 1-2: multi-channel process
    if A.size:
        ch = rng.channel_from_uniform(world.draw(t, rng.SLOT1_CHANNEL, A), F)
        tx = world.draw(t, rng.SLOT1_TRANSMIT, A) < world.p[A]
        per_channel = np.bincount(ch, minlength=F + 1)
        tx_count = np.bincount(ch[tx], minlength=F + 1)
        listen_count = per_channel - tx_count
        trace.multi_channels = int((per_channel >= 2).sum())

        heard = tx_count[ch]
        idle_listener = ~tx & (heard == 0)
        p_act = world.p[A]
        world.p[A] = np.where(idle_listener, np.minimum(2 * p_act, zeta), p_act / 2)

        lone = tx & (tx_count[ch] == 1) & (listen_count[ch] >= 1)
        trace.s1 = int(lone.sum())
        if trace.s1:
            receivers = ~tx & (heard == 1)
            for c, v in zip(ch[lone].tolist(), A[lone].tolist()):
                msg = world.sync(v).copy()
                or_into_rows(world.bits, world.row_of[A[receivers & (ch == c)]], msg)
            if not world.hold_active:
                for v in A[lone].tolist():
                    world.deactivate(v)
                trace.d2 = trace.s1

    # slots 3-4: primary channel
    A3 = np.flatnonzero(world.active)
    if A3.size:
        tx3 = world.draw(t, rng.SLOT3_TRANSMIT, A3) < world.q[A3]
        n_tx = int(tx3.sum())
        q_act = world.q[A3]
        if n_tx == 0:
            world.q[A3] = np.minimum(2 * q_act, zeta)
        else:
            world.q[A3] = q_act / 2
        if n_tx == 1 and world.n > 1:
            trace.s3 = True
            sender = int(A3[tx3][0])
            # every other node listened, so all of them now hold the message
            world.log.append(world.sync(sender).copy())
            world.since[sender] = len(world.log)
            if not world.hold_active:
                world.deactivate(sender)
                trace.d4 = 1

    world.t += 1
    return trace


def check_invariants(world) -> List[str]:
    """Return one description per violated invariant (empty when all hold).

    Works on any world exposing ``active``, ``prev_active``, ``p``, ``q``,
    ``zeta`` and ``active_union_is_full()``.
    """
    out = []
    active = np.asarray(world.active, dtype=bool)
    p = np.asarray(world.p, dtype=float)
    q = np.asarray(world.q, dtype=float)
    if np.any(p <= 0) or np.any(p > world.zeta):
        out.append("p out of range")
    if np.any(q <= 0) or np.any(q > world.zeta):
        out.append("q out of range")
    if active.any() and not world.active_union_is_full():
        out.append("active packet union incomplete")
    if np.any(active & ~np.asarray(world.prev_active, dtype=bool)):
        out.append("active set grew")
    return out


def run_simulation(
    config: SimConfig,
    trace_sink: Optional[Callable[[RoundTrace], None]] = None,
    check: bool = False,
    engine: str = "fast",
) -> SimResult:
    """Run rounds until every node holds all packets and none is active, or the cap.

    ``engine="reference"`` runs the per-node state machine instead; both
    produce identical traces for the same config.
    """
    if engine == "fast":
        world = World(config)
        step = run_round
    elif engine == "reference":
        from .reference import ReferenceWorld, run_reference_round

        world = ReferenceWorld(config)
        step = run_reference_round
    else:
        raise ValueError(f"unknown engine {engine!r}")

    keep = config.trace_mode is TraceMode.FULL
    traces: Optional[List[RoundTrace]] = [] if keep else None
    violations: List[str] = []
    first_single = first_below = completion = None
    status = Status.ROUND_CAP_EXCEEDED
    if check:
        violations += [f"t=0: {v}" for v in check_invariants(world)]

    while True:
        a = world.active_count
        if first_single is None and a == 1:
            first_single = world.t
        if first_below is None and a < config.flogn:
            first_below = world.t
        if a == 0:
            # nothing can change once nobody is active
            if world.everyone_complete():
                status = Status.COMPLETED
                completion = world.t
            break
        if world.t >= config.max_rounds:
            break
        tr = step(world)
        if keep:
            traces.append(tr)
        if trace_sink is not None:
            trace_sink(tr)
        if check:
            violations += [f"t={world.t}: {v}" for v in check_invariants(world)]

    return SimResult(
        status=status,
        completion_round=completion,
        first_single_active_round=first_single,
        first_below_Flogn_round=first_below,
        rounds_run=world.t,
        config=config,
        traces=traces,
        violations=violations,
    )
