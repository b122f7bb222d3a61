"""Nash equilibria of deterministic graphical (DG) and multi-stage (DGMS) games."""
from .equilibrium import (
    Certificate,
    NeInventory,
    achievable_outcomes,
    find_ne,
    find_une,
    is_ne,
    is_une,
    ne_inventory,
    refute_ne,
    refute_une,
    verify_certificate,
)
from .game import C, Cyclic, Game, GameError, GameForm, Mode, Outcome, Terminal, validate
from .graph import Digraph, SccClass, scc_decompose
from .play import StrategyProfile, deviate, enumerate_profiles, resolve_play
from .solvers import backward_induction, solve_two_person

__version__ = "0.1.0"

__all__ = [
    "C",
    "Certificate",
    "Cyclic",
    "Digraph",
    "Game",
    "GameError",
    "GameForm",
    "Mode",
    "NeInventory",
    "Outcome",
    "SccClass",
    "StrategyProfile",
    "Terminal",
    "achievable_outcomes",
    "backward_induction",
    "deviate",
    "enumerate_profiles",
    "find_ne",
    "find_une",
    "is_ne",
    "is_une",
    "ne_inventory",
    "refute_ne",
    "refute_une",
    "resolve_play",
    "scc_decompose",
    "solve_two_person",
    "validate",
    "verify_certificate",
]
