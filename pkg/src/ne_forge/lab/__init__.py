"""Exhaustive search over small games and the Nash-solvability conjectures."""
from .enumerate import EnumSpec, SpecError, enumerate_games, is_canonical, iter_graphs
from .scan import (
    CONJECTURES,
    COUNTEREXAMPLE,
    VERIFIED,
    SearchReport,
    check_conjecture,
    find_ne_free,
    find_une_free,
    merge_reports,
    run_scan,
    scan_shard,
)
from .surgery import extend_une_to_ne, extend_with_prefix, remove_initial

__all__ = [
    "CONJECTURES",
    "COUNTEREXAMPLE",
    "VERIFIED",
    "EnumSpec",
    "SearchReport",
    "SpecError",
    "check_conjecture",
    "enumerate_games",
    "extend_une_to_ne",
    "extend_with_prefix",
    "find_ne_free",
    "find_une_free",
    "is_canonical",
    "iter_graphs",
    "merge_reports",
    "remove_initial",
    "run_scan",
    "scan_shard",
]
