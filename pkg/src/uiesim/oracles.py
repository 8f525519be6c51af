"""Closed-form and Monte-Carlo checks of the probabilistic building blocks.

* idle / single-transmission probabilities of a channel and the bound
  ``w0*S <= w1 <= 2*w0*S`` relating them;
* the product bound ``4**-S <= prod(1 - b_i) <= exp(-S)`` for ``b_i`` in [0, 1/2];
* weighted and unweighted balls-into-bins occupancy trials.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np


class DomainError(ValueError):
    pass


def _check_open_half(p: Sequence[float]) -> None:
    for x in p:
        if not 0 < x < 0.5:
            raise DomainError(f"probability {x} outside (0, 1/2)")


def exact_idle_and_single_probs(p: Sequence[float]) -> Tuple[float, float]:
    """Return ``(w0, w1)``: P(nobody transmits) and P(exactly one transmits)."""
    _check_open_half(p)
    w0 = math.prod(1.0 - x for x in p)
    # every p_i < 1/2, so dividing out (1 - p_i) is safe
    w1 = w0 * math.fsum(x / (1.0 - x) for x in p)
    return w0, w1


def verify_q1_q0_bound(p: Sequence[float], tol: float = 1e-9) -> bool:
    w0, w1 = exact_idle_and_single_probs(p)
    s = math.fsum(p)
    return w0 * s - tol <= w1 <= 2 * w0 * s + tol


def product_bound_check(b: Sequence[float], tol: float = 1e-12) -> bool:
    for x in b:
        if not 0 <= x <= 0.5:
            raise DomainError(f"value {x} outside [0, 1/2]")
    s = math.fsum(b)
    prod = math.prod(1.0 - x for x in b)
    return 4.0 ** (-s) - tol <= prod <= math.exp(-s) + tol


@dataclass
class BinStats:
    H: int
    alpha: float
    per_bin_weight: List[float]
    per_bin_count: List[int]
    good_weight_bins: int
    bins_with_2plus: int


def balls_in_bins_trial(H: int, weights: Sequence[float], alpha: float, rng) -> BinStats:
    """Throw one ball per weight into ``H`` bins uniformly at random.

    A bin is "good" when its total weight lies in ``[15*alpha/16, 2*alpha]``.
    ``rng`` is a ``numpy.random.Generator``.
    """
    if H < 1:
        raise DomainError("need at least one bin")
    w = np.asarray(weights, dtype=float)
    where = rng.integers(0, H, size=w.size)
    per_weight = np.bincount(where, weights=w, minlength=H)
    per_count = np.bincount(where, minlength=H)
    good = (per_weight >= alpha * 15 / 16) & (per_weight <= 2 * alpha)
    return BinStats(
        H=H,
        alpha=alpha,
        per_bin_weight=per_weight.tolist(),
        per_bin_count=per_count.tolist(),
        good_weight_bins=int(good.sum()),
        bins_with_2plus=int((per_count >= 2).sum()),
    )


def weighted_trials(H=64, alpha=1.0, zeta=1 / 32, trials=200, seed=0) -> List[BinStats]:
    """Trials with ``alpha*H/zeta`` balls, each of the maximal weight ``zeta``."""
    balls = int(round(alpha * H / zeta))
    rng = np.random.default_rng(seed)
    weights = np.full(balls, zeta)
    return [balls_in_bins_trial(H, weights, alpha, rng) for _ in range(trials)]


def unweighted_trials(H=64, delta=16, trials=200, seed=0) -> List[BinStats]:
    """Trials with ``H*delta`` unit balls."""
    rng = np.random.default_rng(seed)
    weights = np.ones(H * delta)
    return [balls_in_bins_trial(H, weights, float(delta), rng) for _ in range(trials)]


def success_rate(stats: Sequence[BinStats], field: str, fraction: float = 0.75) -> float:
    """Fraction of trials in which ``field`` reaches ``fraction * H``."""
    if not stats:
        return float("nan")
    return sum(getattr(s, field) >= fraction * s.H for s in stats) / len(stats)


def zeta_conditions(zeta: float, alpha: float = 0.01) -> dict:
    """The two "zeta small enough" conditions used for the weighted bins bound.

    Each must fall below 1/128; values are reported so callers can see by how
    much a given zeta misses.
    """
    lower = math.exp(-alpha / (16 ** 2 * 2 * zeta))
    upper = math.exp(-alpha / (3 * zeta))
    return {
        "lower_tail": lower,
        "lower_tail_ok": lower < 1 / 128,
        "upper_tail": upper,
        "upper_tail_ok": upper < 1 / 128,
    }
