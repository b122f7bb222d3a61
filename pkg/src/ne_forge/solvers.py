"""Constructive solvers: backward induction and a two-person solver."""
from __future__ import annotations

from collections import deque
from functools import lru_cache
from typing import Sequence

from .game import Game, GameForm
from .graph import SccClass, topological_order
from .play import StrategyProfile, profile_at
from .tables import ProfileTable


class SolverError(ValueError):
    pass


def backward_induction(game: Game) -> StrategyProfile:
    """Standard BI on an acyclic digraph, for any number of players.

    Each owner picks the successor whose induced outcome it ranks best; equal
    outcomes go to the smallest successor id.
    """
    return StrategyProfile(tuple(_bi_choice(game.form, game.ranks)))


def _bi_choice(form: GameForm, ranks: Sequence[Sequence[int]]) -> list[int | None]:
    g = form.graph
    order = topological_order(g)
    if order is None:
        raise SolverError("backward induction needs an acyclic digraph")
    value = [-1] * g.vertex_count
    choice: list[int | None] = [None] * g.vertex_count
    for v in reversed(order):
        if not g.succ[v]:
            value[v] = form.sink_outcome[v]
            continue
        rank = ranks[form.owner[v] - 1]
        w = min(g.succ[v], key=lambda x: (rank[value[x]], x))
        choice[v] = w
        value[v] = value[w]
    return choice


def _route_toward(succ: Sequence[Sequence[int]], comp: frozenset[int], target: int) -> dict[int, int]:
    """Inside a strongly connected ``comp``, next hop of every vertex on a shortest path to ``target``."""
    dist = {target: 0}
    pred: dict[int, list[int]] = {v: [] for v in comp}
    for v in comp:
        for w in succ[v]:
            if w in comp:
                pred[w].append(v)
    queue = deque([target])
    while queue:
        w = queue.popleft()
        for v in pred[w]:
            if v not in dist:
                dist[v] = dist[w] + 1
                queue.append(v)
    hops = {}
    for v in comp:
        if v != target:
            hops[v] = min(w for w in succ[v] if w in comp and dist[w] == dist[v] - 1)
    return hops


class TwoPersonSolver:
    """Condensation-guided candidate, verified against the deviation table.

    SCCs are processed bottom-up.  Sinks and closed SCCs have fixed values, a
    transient vertex takes its owner's best successor, and an interior SCC is
    routed either around a cycle or out through one exit, preferring an option
    that no player inside the component can locally beat.  The candidate is
    accepted only if it is a NE; otherwise the lexicographic scan decides.
    """

    def __init__(self, form: GameForm):
        if form.n != 2:
            raise SolverError(f"the two-person solver needs n = 2, got n = {form.n}")
        if form.initial is None:
            raise SolverError("the game has no initial vertex")
        self.form = form
        g = form.graph
        part = form.partition
        self.table = ProfileTable.of(form, (form.initial,))
        cond_order = topological_order(part.condensation)
        self.steps: list[tuple] = []
        for cid in reversed(cond_order):
            comp = part.components[cid]
            cls = part.scc_class[cid]
            if cls is SccClass.TERMINAL:
                fixed = {v: (g.succ[v][0] if g.succ[v] else None) for v in comp}
                vals = {v: (form.cycle_outcome[v] if g.succ[v] else form.sink_outcome[v]) for v in comp}
                self.steps.append(("fixed", fixed, vals))
            elif cls is SccClass.TRANSIENT:
                (v,) = comp
                self.steps.append(("transient", v, g.succ[v], form.owner[v]))
            else:
                m = min(comp)
                cyc = form.cycle_outcome[m]
                stay = _route_toward(g.succ, comp, m)
                stay[m] = min(w for w in g.succ[m] if w in comp)
                exits = [(u, w) for u in sorted(comp) for w in g.succ[u] if w not in comp]
                routes = {u: _route_toward(g.succ, comp, u) for u in {u for u, _ in exits}}
                players = {form.owner[v] for v in comp}
                self.steps.append(("interior", comp, cyc, stay, exits, routes, players, form.owner[m]))
        self.weights = {}
        w = 1
        for v in reversed(g.nonterminals):
            self.weights[v] = (w, g.succ[v])
            w *= len(g.succ[v])

    def candidate(self, ranks: Sequence[Sequence[int]]) -> dict[int, int]:
        owner = self.form.owner
        val: dict[int, int] = {}
        choice: dict[int, int] = {}
        for step in self.steps:
            kind = step[0]
            if kind == "fixed":
                for v, w in step[1].items():
                    if w is not None:
                        choice[v] = w
                val.update(step[2])
            elif kind == "transient":
                _, v, succ, who = step
                rank = ranks[who - 1]
                w = min(succ, key=lambda x: (rank[val[x]], x))
                choice[v] = w
                val[v] = val[w]
            else:
                _, comp, cyc, stay, exits, routes, players, lead = step
                options = [(None, cyc)] + [((u, w), val[w]) for u, w in exits]
                picked = None
                for opt, o in options:
                    if self._locally_stable(opt, o, cyc, exits, val, ranks, owner, players):
                        picked = (opt, o)
                        break
                if picked is None:
                    rank = ranks[lead - 1]
                    picked = min(options, key=lambda t: rank[t[1]])
                opt, o = picked
                if opt is None:
                    choice.update(stay)
                else:
                    u, w = opt
                    choice.update(routes[u])
                    choice[u] = w
                for v in comp:
                    val[v] = o
        return choice

    @staticmethod
    def _locally_stable(opt, o, cyc, exits, val, ranks, owner, players) -> bool:
        for u, w in exits:
            if ranks[owner[u] - 1][val[w]] < ranks[owner[u] - 1][o]:
                return False
        if opt is not None:
            for i in players:
                if ranks[i - 1][cyc] < ranks[i - 1][o]:
                    return False
        return True

    def index_of(self, choice: dict[int, int]) -> int:
        return sum(wt * succ.index(choice[v]) for v, (wt, succ) in self.weights.items())

    def is_equilibrium(self, k: int, ranks: Sequence[Sequence[int]]) -> bool:
        t = self.table
        (o,) = t.outcomes[k]
        for i, rank in enumerate(ranks):
            (m,) = t.masks[i][k]
            r = rank[o]
            while m:
                low = m & -m
                if rank[low.bit_length() - 1] < r:
                    return False
                m ^= low
        return True

    def solve_index(self, ranks: Sequence[Sequence[int]]) -> tuple[int | None, bool]:
        """(profile index, whether the candidate was accepted without fallback)."""
        k = self.index_of(self.candidate(ranks))
        if self.is_equilibrium(k, ranks):
            return k, True
        return self.table.first_stable(ranks), False


@lru_cache(maxsize=64)
def _solver(form: GameForm) -> TwoPersonSolver:
    return TwoPersonSolver(form)


def solve_two_person_index(form: GameForm, ranks: Sequence[Sequence[int]]) -> int | None:
    """Index (in profile enumeration order) of the profile :func:`solve_two_person` returns."""
    if form.n != 2:
        raise SolverError(f"the two-person solver needs n = 2, got n = {form.n}")
    if form.graph.is_acyclic():
        choice = _bi_choice(form, ranks)
        k = 0
        for v in form.graph.nonterminals:
            succ = form.graph.succ[v]
            k = k * len(succ) + succ.index(choice[v])
        return k
    return _solver(form).solve_index(ranks)[0]


def solve_two_person(game: Game) -> StrategyProfile:
    """A NE from the initial vertex of a two-person DG or DGMS game."""
    if game.n != 2:
        raise SolverError(f"the two-person solver needs n = 2, got n = {game.n}")
    if game.graph.is_acyclic():
        return backward_induction(game)
    k = solve_two_person_index(game.form, game.ranks)
    if k is None:
        raise SolverError("no Nash equilibrium exists for this two-person game")
    return profile_at(game, k)
