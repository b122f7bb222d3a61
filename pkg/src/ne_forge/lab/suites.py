"""Exhaustive desk suites over two-person games: the solver and outcome merging.

Both drivers run on table-level data (profile indices and per-order
stability masks) so that millions of games fit in minutes; the object-level
functions they mirror are cross-checked against them in the test suite.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from ..game import Game, GameError, GameForm, Mode, contract_game, merge_cyclic_outcomes
from ..solvers import solve_two_person_index
from ..tables import ProfileTable
from .enumerate import EnumSpec, iter_graphs, iter_owners, preference_orders


@dataclass
class SuiteResult:
    forms: int = 0
    games: int = 0
    failures: list[tuple[int, int, int]] = field(default_factory=list)  # (graph, owner, pref) indices


def _ranks_of(orders, form: GameForm) -> list[tuple[int, ...]]:
    idx = form.outcome_index
    out = []
    for order in orders:
        r = [0] * len(idx)
        for pos, o in enumerate(order):
            r[idx[o]] = pos
        out.append(tuple(r))
    return out


def two_person_suite(spec: EnumSpec, max_failures: int = 10) -> SuiteResult:
    """Run the two-person solver on every game of ``spec``; count outputs that are not a NE at v_0."""
    if spec.n != 2:
        raise ValueError("the two-person suite needs n = 2")
    res = SuiteResult()
    for item in iter_graphs(spec):
        for o_idx, owner in enumerate(iter_owners(2, item.nonterminal)):
            form = item.form(2, spec.mode, owner)
            res.forms += 1
            orders = preference_orders(form.outcomes)
            ranks = _ranks_of(orders, form)
            table = ProfileTable.of(form, (form.initial,))
            stable1 = [table.stable_mask(1, r) for r in ranks]
            stable2 = [table.stable_mask(2, r) for r in ranks]
            for (k1, r1), (k2, r2) in itertools.product(enumerate(ranks), repeat=2):
                res.games += 1
                k = solve_two_person_index(form, (r1, r2))
                if k is None or not (stable1[k1] & stable2[k2]) >> k & 1:
                    if len(res.failures) < max_failures:
                        res.failures.append((item.index, o_idx, k1 * len(ranks) + k2))
    return res


def _contiguous(order) -> bool:
    pos = [k for k, o in enumerate(order) if o.is_cyclic]
    return not pos or pos == list(range(pos[0], pos[0] + len(pos)))


def _profile_map(form: GameForm, contracted: GameForm, vmap: tuple[int, ...]) -> list[int]:
    """Profile index in ``form`` -> index of its image in the contracted form."""
    g, h = form.graph, contracted.graph
    out = []
    for combo in itertools.product(*(g.succ[v] for v in g.nonterminals)):
        choice = dict(zip(g.nonterminals, combo))
        k = 0
        for x in h.nonterminals:
            v = vmap.index(x)  # a non-sink of the contraction comes from exactly one vertex
            succ = h.succ[x]
            k = k * len(succ) + succ.index(vmap[choice[v]])
        out.append(k)
    return out


@dataclass
class MergeResult:
    forms: int = 0
    games: int = 0
    equilibria: int = 0
    skipped_graphs: int = 0  # v_0 inside a terminal SCC: contraction leaves no move at v_0
    failures: list[tuple[int, int, int]] = field(default_factory=list)


def merge_suite(spec: EnumSpec, max_failures: int = 10) -> MergeResult:
    """For every DGMS game with block-contiguous cyclic preferences, every NE at v_0 must
    map to a NE of the merged DG game (after contracting terminal SCCs)."""
    if spec.mode is not Mode.DGMS:
        raise ValueError("the merge suite enumerates DGMS games")
    res = MergeResult()
    for item in iter_graphs(spec):
        base = item.form(spec.n, spec.mode)
        try:
            contracted, vmap = contract_game(Game(base, ()))
        except GameError:
            res.skipped_graphs += 1
            continue
        pmap = _profile_map(base, contracted.form, vmap) if contracted.form.graph != base.graph else None
        for o_idx, owner in enumerate(iter_owners(spec.n, item.nonterminal)):
            form = item.form(spec.n, spec.mode, owner)
            res.forms += 1
            orders = preference_orders(form.outcomes)
            keep = [k for k, order in enumerate(orders) if _contiguous(order)]
            cform = contract_game(Game(form, ()))[0].form
            dg_form = GameForm(cform.graph, cform.n, cform.owner, cform.initial, Mode.DG)
            table = ProfileTable.of(form, (form.initial,))
            dg_table = ProfileTable.of(dg_form, (dg_form.initial,))
            ranks = _ranks_of(orders, form)
            stable = [{k: table.stable_mask(i, ranks[k]) for k in keep} for i in range(1, spec.n + 1)]
            dg_stable = []
            for i in range(1, spec.n + 1):
                per = {}
                for k in keep:
                    merged = merge_cyclic_outcomes(Game(cform, (orders[k],))).prefs[0]
                    per[k] = dg_table.stable_mask(i, _ranks_of([merged], dg_form)[0])
                dg_stable.append(per)
            size = len(orders)
            for combo in itertools.product(keep, repeat=spec.n):
                res.games += 1
                eq = -1
                dg_eq = -1
                for i, k in enumerate(combo):
                    eq &= stable[i][k]
                    dg_eq &= dg_stable[i][k]
                x = 0
                while eq:
                    if eq & 1:
                        res.equilibria += 1
                        image = x if pmap is None else pmap[x]
                        if not dg_eq >> image & 1:
                            if len(res.failures) < max_failures:
                                pref = 0
                                for k in combo:
                                    pref = pref * size + k
                                res.failures.append((item.index, o_idx, pref))
                            break
                    eq >>= 1
                    x += 1
    return res

