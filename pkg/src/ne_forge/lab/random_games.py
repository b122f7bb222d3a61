"""Seeded random games for randomized test suites and the ``random-game`` command."""
from __future__ import annotations

import random

from ..game import Game, GameForm, Mode
from ..graph import Digraph


def random_game(
    rng: random.Random,
    n: int,
    max_nonterminal: int,
    max_terminals: int,
    max_outdeg: int = 3,
    mode: Mode | str = Mode.DG,
    *,
    acyclic: bool = False,
    min_nonterminal: int = 1,
) -> Game:
    """A random game with vertex 0 initial, non-terminals first, sinks last.

    With ``acyclic`` every edge points to a larger vertex id (at least one
    terminal is then always created).
    """
    mode = Mode(mode)
    nt = rng.randint(min_nonterminal, max_nonterminal)
    t = rng.randint(1 if acyclic else 0, max_terminals)
    total = nt + t
    succ: list[list[int]] = []
    for v in range(nt):
        pool = list(range(v + 1, total)) if acyclic else list(range(total))
        k = rng.randint(1, min(max_outdeg, len(pool)))
        succ.append(sorted(rng.sample(pool, k)))
    graph = Digraph.from_successors(succ + [[] for _ in range(t)])
    owner = tuple(rng.randint(1, n) for _ in range(nt)) + (0,) * t
    form = GameForm(graph, n, owner, 0, mode)
    prefs = []
    for _ in range(n):
        order = list(form.outcomes)
        rng.shuffle(order)
        prefs.append(tuple(order))
    return Game(form, tuple(prefs))


def random_games(seed: int, count: int, **kwargs) -> list[Game]:
    rng = random.Random(seed)
    return [random_game(rng, **kwargs) for _ in range(count)]
