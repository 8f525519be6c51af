"""Simulator for uniform information exchange on single-hop multi-channel radio networks."""
from .engine import (
    RoundTrace,
    SimConfig,
    SimResult,
    Status,
    TraceMode,
    World,
    check_invariants,
    run_round,
    run_simulation,
)
from .model import DEFAULT_ZETA, NodeState, merge_packets

__all__ = [
    "DEFAULT_ZETA",
    "NodeState",
    "RoundTrace",
    "SimConfig",
    "SimResult",
    "Status",
    "TraceMode",
    "World",
    "check_invariants",
    "merge_packets",
    "run_round",
    "run_simulation",
]
