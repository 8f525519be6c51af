"""Parameter sweeps, scaling fits and trace statistics."""
from __future__ import annotations

import csv
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from .engine import (
    ConfigError,
    RoundTrace,
    SimConfig,
    Status,
    TraceMode,
    World,
    dyadic_below,
    log2n,
    run_round,
    run_simulation,
)
from .model import DEFAULT_ZETA

ALPHA1 = 0.01
ALPHA2 = 8.0

CSV_HEADER = (
    "n",
    "k",
    "F",
    "seed",
    "completion_round",
    "first_single_active_round",
    "first_below_Flogn_round",
    "status",
)

Cell = Tuple[int, int, int]


def predictor(n: int, k: int, F: int) -> float:
    return k / F + F * log2n(n)


def resolve_k(token: str, n: int, F: int) -> int:
    """Turn a k token into a source count.

    Accepted forms: an integer, ``n``, ``n/D``, a fraction such as ``0.25``
    (of n), or ``Flogn`` for ``F * ceil(log2 n)``.
    """
    tok = token.strip().replace(" ", "")
    if tok == "n":
        return n
    if tok.lower() == "flogn":
        return F * math.ceil(log2n(n))
    if tok.startswith("n/"):
        return n // int(tok[2:])
    if "." in tok:
        return int(round(float(tok) * n))
    return int(tok)


@dataclass
class SweepSpec:
    n_values: List[int]
    k_values: List[str]
    F_values: List[int]
    seeds: List[int]
    zeta: float = DEFAULT_ZETA
    max_rounds: Optional[int] = None
    out: Optional[str] = None

    def cells(self) -> List[Cell]:
        out = []
        for n in self.n_values:
            for F in self.F_values:
                for tok in self.k_values:
                    k = resolve_k(str(tok), n, F)
                    cell = (n, k, F)
                    if cell not in out:
                        out.append(cell)
        return out

    def validate(self) -> None:
        for n, k, F in self.cells():
            try:
                SimConfig(n, k, F, zeta=self.zeta, max_rounds=self.max_rounds)
            except ConfigError as exc:
                raise ConfigError(f"invalid cell (n={n}, k={k}, F={F}): {exc}") from None

    @classmethod
    def parse(cls, text: str) -> "SweepSpec":
        """Parse ``key = v1, v2, ...`` lines; ``#`` starts a comment.

        Keys: ``n``, ``k``, ``F``, ``seeds`` (explicit list) or
        ``seeds_per_cell`` with optional ``seed_base``, ``zeta``,
        ``max_rounds``, ``out``.
        """
        raw: Dict[str, List[str]] = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {lineno}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            raw[key] = [v.strip() for v in value.split(",") if v.strip()]
        for key in ("n", "k", "F"):
            if key not in raw:
                raise ConfigError(f"sweep spec is missing '{key}'")
        if "seeds" in raw:
            seeds = [int(s) for s in raw["seeds"]]
        else:
            per_cell = int(raw.get("seeds_per_cell", ["1"])[0])
            base = int(raw.get("seed_base", ["0"])[0])
            seeds = list(range(base, base + per_cell))
        spec = cls(
            n_values=[int(v) for v in raw["n"]],
            k_values=raw["k"],
            F_values=[int(v) for v in raw["F"]],
            seeds=seeds,
            zeta=float(raw["zeta"][0]) if "zeta" in raw else DEFAULT_ZETA,
            max_rounds=int(raw["max_rounds"][0]) if "max_rounds" in raw else None,
            out=raw["out"][0] if "out" in raw else None,
        )
        spec.validate()
        return spec


def default_grid() -> SweepSpec:
    return SweepSpec(
        n_values=[2 ** 10, 2 ** 12, 2 ** 14],
        k_values=["Flogn", "n/4", "n"],
        F_values=[4, 8, 16, 32],
        seeds=list(range(20)),
    )


@dataclass
class SweepRow:
    n: int
    k: int
    F: int
    seed: int
    completion_round: Optional[int]
    first_single_active_round: Optional[int]
    first_below_Flogn_round: Optional[int]
    status: str

    @property
    def cell(self) -> Cell:
        return (self.n, self.k, self.F)


def run_cell(job) -> SweepRow:
    n, k, F, seed, zeta, max_rounds = job
    cfg = SimConfig(n, k, F, zeta=zeta, seed=seed, max_rounds=max_rounds,
                    trace_mode=TraceMode.SUMMARY_ONLY)
    res = run_simulation(cfg)
    return SweepRow(n, k, F, seed, res.completion_round, res.first_single_active_round,
                    res.first_below_Flogn_round, res.status.value)


def sweep(spec: SweepSpec, workers: int = 1) -> List[SweepRow]:
    spec.validate()
    jobs = [(n, k, F, s, spec.zeta, spec.max_rounds) for (n, k, F) in spec.cells() for s in spec.seeds]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_cell, jobs))
    else:
        rows = [run_cell(j) for j in jobs]
    rows.sort(key=lambda r: (r.n, r.k, r.F, r.seed))
    return rows


def write_csv(rows: Iterable[SweepRow], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for r in rows:
            writer.writerow(["" if getattr(r, c) is None else getattr(r, c) for c in CSV_HEADER])


def read_csv(path) -> List[SweepRow]:
    def opt(v):
        return None if v == "" else int(v)

    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {reader.fieldnames}")
        return [
            SweepRow(int(d["n"]), int(d["k"]), int(d["F"]), int(d["seed"]),
                     opt(d["completion_round"]), opt(d["first_single_active_round"]),
                     opt(d["first_below_Flogn_round"]), d["status"])
            for d in reader
        ]


@dataclass
class ScalingFit:
    C: float
    medians: Dict[Cell, float]
    residuals: Dict[Cell, float] = field(default_factory=dict)
    max_residual: float = 0.0


def fit_scaling(rows: Sequence[SweepRow]) -> ScalingFit:
    """Fit ``median(T*) <= C * (k/F + F*log2 n)`` with the smallest such C.

    A cell's residual is ``C*predictor/median - 1``: how far the fitted bound
    overshoots the observed median (1.0 means a factor of 2).
    """
    failed = sorted({r.cell for r in rows if r.status != Status.COMPLETED.value})
    if failed:
        raise ValueError(f"cells with runs that did not complete: {failed}")
    by_cell: Dict[Cell, List[int]] = {}
    for r in rows:
        by_cell.setdefault(r.cell, []).append(r.first_single_active_round)
    if not by_cell:
        raise ValueError("no rows to fit")
    medians = {c: float(statistics.median(v)) for c, v in by_cell.items()}
    C = max(m / predictor(*c) for c, m in medians.items())
    if C <= 0:
        raise ValueError("all medians are zero; nothing to fit")
    residuals = {
        c: (C * predictor(*c) / m - 1.0) if m > 0 else math.inf for c, m in medians.items()
    }
    return ScalingFit(C, medians, residuals, max(residuals.values()))


def _qualifying(traces, F, n):
    return [tr for tr in traces if tr.active >= F * log2n(n)]


def safe_range_occupancy(
    traces: Sequence[RoundTrace],
    alpha1: float,
    alpha2: float,
    F: int,
    n: int,
    skip: int = 0,
) -> Optional[float]:
    """Share of rounds (with at least F*log2 n active nodes) whose sum of p is in the safe band."""
    rounds = [tr for tr in _qualifying(traces, F, n) if tr.t >= skip]
    if not rounds:
        return None
    inside = sum(alpha1 * F <= tr.sum_p <= alpha2 * F for tr in rounds)
    return inside / len(rounds)


class DeactivationRate(NamedTuple):
    mean: float
    fraction_at_least: float
    rounds: int


def safe_band_deactivation_rate(
    traces: Sequence[RoundTrace],
    alpha1: float,
    alpha2: float,
    F: int,
    n: int,
    c2: float = 0.05,
) -> Optional[DeactivationRate]:
    """Mean slot-2 deactivations over safe-band rounds with many active nodes."""
    rounds = [
        tr for tr in _qualifying(traces, F, n) if alpha1 * F <= tr.sum_p <= alpha2 * F
    ]
    if not rounds:
        return None
    mean = statistics.fmean(tr.d2 for tr in rounds)
    frac = sum(tr.d2 >= c2 * F for tr in rounds) / len(rounds)
    return DeactivationRate(mean, frac, len(rounds))


@dataclass
class StabilizationReport:
    n: int
    F: int
    p_star: float
    per_node_p: float
    recovery: List[Optional[int]]
    predictor: float

    @property
    def censored(self) -> int:
        return sum(r is None for r in self.recovery)

    @property
    def median(self) -> float:
        vals = [math.inf if r is None else r for r in self.recovery]
        return float(statistics.median(vals)) if vals else math.nan


def recovery_round(config: SimConfig, alpha1: float, alpha2: float) -> Optional[int]:
    """First round whose sum of p over active nodes lies in [alpha1*F, alpha2*F]."""
    world = World(config)
    F = config.channels
    while world.t < config.max_rounds and world.active_count:
        tr = run_round(world)
        if alpha1 * F <= tr.sum_p <= alpha2 * F:
            return tr.t
    return None


def stabilization_experiment(
    n: int,
    F: int,
    p_star: float,
    seeds: Sequence[int],
    zeta: float = DEFAULT_ZETA,
    alpha1: float = ALPHA1,
    alpha2: float = ALPHA2,
    hold_active: bool = True,
    max_rounds: int = 2000,
) -> StabilizationReport:
    """Start every node active with total probability about ``p_star`` and time the recovery.

    Per-node probabilities are rounded to the nearest ``zeta * 2**-j`` so the
    usual dyadic structure is kept.
    """
    per_node = dyadic_below(zeta, p_star / n)
    recovery = []
    for seed in seeds:
        cfg = SimConfig(n, n, F, zeta=zeta, seed=seed, max_rounds=max_rounds,
                        trace_mode=TraceMode.SUMMARY_ONLY, initial_p_override=per_node,
                        hold_active=hold_active)
        recovery.append(recovery_round(cfg, alpha1, alpha2))
    pred = math.log2(max(p_star / F, F / p_star)) + log2n(n)
    return StabilizationReport(n, F, p_star, per_node, recovery, pred)
