"""Exhaustive state-space exploration of the protocol."""

from .core import (
    CHECKS,
    ExplorationReport,
    Violation,
    applicable_checks,
    explore,
    reachability_dot,
    resolve_checks,
    state_key,
    tree_digest,
)
from .kernels import USE_NUMBA
from .stubborn import explore_reduced, stubborn_set
from .unfold import NotSafeError, PackedNet, unfold

__all__ = [
    "CHECKS",
    "ExplorationReport",
    "NotSafeError",
    "PackedNet",
    "USE_NUMBA",
    "Violation",
    "applicable_checks",
    "explore",
    "explore_reduced",
    "reachability_dot",
    "resolve_checks",
    "state_key",
    "stubborn_set",
    "tree_digest",
    "unfold",
]
