"""Exhaustive scans for NE-free and UNE-free games, and conjecture checks.

For each digraph the deviation tables are computed once; for each ownership
the per-player stability masks are computed once per preference order; the
preference profiles are then counted by folding players one at a time over
(equilibrium mask, filter state) buckets.  Every game that ends up in a
report is re-proven on the slow path with a replayed certificate.
"""
from __future__ import annotations

import itertools
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd
from typing import Any, Iterable, Iterator, Sequence

from ..equilibrium import Certificate, find_ne, find_une, refute_ne, refute_une, verify_certificate
from ..game import (
    Game,
    Mode,
    check_condition_C,
    check_condition_C22,
    check_condition_Cprime,
    check_condition_Cprime22,
    game_to_json,
)
from ..graph import is_bidirected
from ..tables import GraphTables, ProfileTable
from .enumerate import EnumSpec, SpecError, accept_graph, iter_owners, iter_raw_graphs, preference_orders

log = logging.getLogger(__name__)

VERIFIED = "verified-up-to-bound"
COUNTEREXAMPLE = "counterexample"


@dataclass(frozen=True)
class Conjecture:
    name: str
    mode: Mode
    requires: frozenset[str]
    statement: str


CONJECTURES = {
    c.name: c
    for c in (
        Conjecture("catch22", Mode.DG, frozenset({"C22"}), "(C22) implies Nash-solvability"),
        Conjecture("c-implies-ns", Mode.DG, frozenset({"C"}), "(C) implies Nash-solvability"),
        Conjecture("bidirected-ns", Mode.DG, frozenset({"bidirected"}), "DG games on bidirected digraphs are Nash-solvable"),
        Conjecture("cprime22-ns", Mode.DGMS, frozenset({"Cprime22"}), "(C'22) implies Nash-solvability of DGMS games"),
        Conjecture("two-witnesses", Mode.DG, frozenset(), "every NE-free game has two players with k_c >= 2"),
    )
}


# -- preference space -------------------------------------------------------


@dataclass(frozen=True)
class PrefSpace:
    """All strict orders of p + q outcomes, with their comparison masks and filter category."""

    orders: tuple[tuple[int, ...], ...]
    aboves: tuple[tuple[int, ...], ...]
    cats: tuple[int, ...]  # min(max terminals ranked below a cyclic outcome, 2)


@lru_cache(maxsize=32)
def pref_space(p: int, q: int) -> PrefSpace:
    m = p + q
    orders = tuple(itertools.permutations(range(m)))
    aboves = []
    cats = []
    for order in orders:
        above = [0] * m
        seen = 0
        for o in order:
            above[o] = seen
            seen |= 1 << o
        aboves.append(tuple(above))
        worst = 0
        for pos, o in enumerate(order):
            if o >= p:
                worst = max(worst, sum(1 for x in order[pos + 1 :] if x < p))
        cats.append(min(worst, 2))
    return PrefSpace(orders, tuple(aboves), tuple(cats))


def _filter_ok(filters: frozenset[str], all_zero: bool, heavy: int) -> bool:
    if ("C" in filters or "Cprime" in filters) and not all_zero:
        return False
    if ("C22" in filters or "Cprime22" in filters) and heavy >= 2:
        return False
    return True


def passes_filters(game: Game, filters: Iterable[str]) -> bool:
    """Object-level filter check, independent of the bucketed counting."""
    for f in filters:
        if f == "C" and not check_condition_C(game):
            return False
        if f == "C22" and not check_condition_C22(game)[0]:
            return False
        if f == "Cprime" and not check_condition_Cprime(game):
            return False
        if f == "Cprime22" and not check_condition_Cprime22(game)[0]:
            return False
        if f == "bidirected" and not is_bidirected(game.graph):
            return False
    return True


def _stable_masks(table: ProfileTable, player: int, space: PrefSpace, memo: dict) -> tuple[tuple[int, ...], list]:
    """Per order: profiles where ``player`` is stable; plus (mask, cat) -> (count, first order) groups."""
    rows = table.groups[player - 1]
    key = tuple(rows)
    hit = memo.get(key)
    if hit is not None:
        return hit
    out = []
    for above in space.aboves:
        res = 0
        for outs, ms, bits in rows:
            for o, m in zip(outs, ms):
                if m & above[o]:
                    break
            else:
                res |= bits
        out.append(res)
    groups: dict[tuple[int, int], list[int]] = {}
    for k, mc in enumerate(zip(out, space.cats)):
        g = groups.get(mc)
        if g is None:
            groups[mc] = [1, k]
        else:
            g[0] += 1
    hit = (tuple(out), [(m, cat, cnt, first) for (m, cat), (cnt, first) in groups.items()])
    memo[key] = hit
    return hit


@dataclass
class FormCount:
    scanned: int = 0
    free: int = 0
    counterexamples: int = 0
    first_counterexample: tuple[int, ...] | None = None


def count_form(
    table: ProfileTable,
    n: int,
    space: PrefSpace,
    filters: frozenset[str],
    two_witnesses: bool,
    memo: dict,
) -> tuple[FormCount, list[tuple[int, ...]]]:
    """Fold players into (equilibrium mask, all-cat-zero, heavy count) buckets."""
    full = (1 << table.size) - 1
    per_player = [_stable_masks(table, i, space, memo) for i in range(1, n + 1)]
    # bucket -> (count, lexicographically smallest preference tuple)
    buckets: dict[tuple[int, bool, int], tuple[int, tuple[int, ...]]] = {(full, True, 0): (1, ())}
    for _, groups in per_player[:-1]:
        nxt: dict[tuple[int, bool, int], tuple[int, tuple[int, ...]]] = {}
        for (eq, zero, heavy), (cnt, first) in buckets.items():
            for m, cat, size, k0 in groups:
                key = (eq & m, zero and cat == 0, min(heavy + (cat == 2), 2))
                c2 = cnt * size
                old = nxt.get(key)
                if old is None:
                    nxt[key] = (c2, first + (k0,))
                else:
                    f2 = first + (k0,)
                    nxt[key] = (old[0] + c2, f2 if f2 < old[1] else old[1])
        buckets = nxt
    # the last player is folded straight into the totals
    res = FormCount()
    need_zero = not _filter_ok(filters, False, 0)
    need_light = not _filter_ok(filters, True, 2)
    for (eq, zero, heavy), (cnt, first) in buckets.items():
        for m, cat, size, k0 in per_player[-1][1]:
            h = heavy + (cat == 2)
            if (need_zero and (cat or not zero)) or (need_light and h >= 2):
                continue
            c2 = cnt * size
            res.scanned += c2
            if eq & m:
                continue
            res.free += c2
            if not two_witnesses or h <= 1:
                res.counterexamples += c2
                f2 = first + (k0,)
                if res.first_counterexample is None or f2 < res.first_counterexample:
                    res.first_counterexample = f2
    return res, [m for m, _ in per_player]


def _pref_index(tup: Sequence[int], size: int) -> int:
    k = 0
    for x in tup:
        k = k * size + x
    return k


def iter_free_prefs(
    masks: list[tuple[int, ...]], space: PrefSpace, filters: frozenset[str]
) -> Iterator[tuple[int, ...]]:
    """Preference tuples (order indices) of a form without equilibrium, in stream order."""
    size = len(space.orders)
    for tup in itertools.product(range(size), repeat=len(masks)):
        eq = -1
        for m, k in zip(masks, tup):
            eq &= m[k]
        if eq:
            continue
        cats = [space.cats[k] for k in tup]
        if _filter_ok(filters, all(c == 0 for c in cats), min(sum(c == 2 for c in cats), 2)):
            yield tup


# -- reports ----------------------------------------------------------------


def _normalize_shard(indices: Iterable[int], total: int) -> tuple[list[int], int]:
    idx = set(indices)
    for m in range(1, total + 1):
        if total % m:
            continue
        reduced = {x % m for x in idx}
        if {x for x in range(total) if x % m in reduced} == idx:
            return sorted(reduced), m
    return sorted(idx), total


@dataclass
class SearchReport:
    spec: dict[str, Any]
    kind: str
    conjecture: str | None
    max_examples: int
    counts: dict[str, int] = field(default_factory=dict)
    examples: list[dict[str, Any]] = field(default_factory=list)
    first_counterexample: dict[str, Any] | None = None
    shard: tuple[list[int], int] = ([0], 1)

    @property
    def verdict(self) -> str | None:
        if self.conjecture is None:
            return None
        return COUNTEREXAMPLE if self.counts.get("counterexamples", 0) else VERIFIED

    def to_json(self) -> dict[str, Any]:
        return {
            "spec": self.spec,
            "kind": self.kind,
            "conjecture": self.conjecture,
            "max_examples": self.max_examples,
            "counts": dict(sorted(self.counts.items())),
            "examples": self.examples,
            "first_counterexample": self.first_counterexample,
            "verdict": self.verdict,
            "shard": {"indices": list(self.shard[0]), "total": self.shard[1]},
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> SearchReport:
        return cls(
            spec=data["spec"],
            kind=data["kind"],
            conjecture=data["conjecture"],
            max_examples=data["max_examples"],
            counts=dict(data["counts"]),
            examples=list(data["examples"]),
            first_counterexample=data["first_counterexample"],
            shard=(list(data["shard"]["indices"]), data["shard"]["total"]),
        )


def merge_reports(reports: Sequence[SearchReport]) -> SearchReport:
    """Combine shard reports; associative, commutative and deterministic."""
    if not reports:
        raise ValueError("nothing to merge")
    head = reports[0]
    for r in reports[1:]:
        if (r.spec, r.kind, r.conjecture, r.max_examples) != (head.spec, head.kind, head.conjecture, head.max_examples):
            raise ValueError("cannot merge reports of different scans")
    total = 1
    for r in reports:
        total = total * r.shard[1] // gcd(total, r.shard[1])
    covered: set[int] = set()
    for r in reports:
        idx, m = r.shard
        part = {x for x in range(total) if x % m in set(idx)}
        if part & covered:
            raise ValueError("shard reports overlap")
        covered |= part
    counts: dict[str, int] = {}
    for r in reports:
        for k, v in r.counts.items():
            counts[k] = counts.get(k, 0) + v
    examples = sorted((e for r in reports for e in r.examples), key=lambda e: e["index"])
    cex = [r.first_counterexample for r in reports if r.first_counterexample is not None]
    return SearchReport(
        spec=head.spec,
        kind=head.kind,
        conjecture=head.conjecture,
        max_examples=head.max_examples,
        counts=counts,
        examples=examples[: head.max_examples],
        first_counterexample=min(cex, key=lambda e: e["index"]) if cex else None,
        shard=_normalize_shard(covered, total),
    )


# -- the scan ---------------------------------------------------------------


def _entry(index: list[int], game: Game, cert: Certificate) -> dict[str, Any]:
    problems = verify_certificate(cert)
    if problems:
        raise RuntimeError(f"certificate replay failed for game {index}: {problems[:3]}")
    return {"index": index, "game": game_to_json(game), "certificate": cert.to_json()}


def _certify(game: Game, kind: str) -> Certificate:
    return refute_ne(game) if kind == "ne" else refute_une(game)


def _check_kind(kind: str) -> None:
    if kind not in ("ne", "une"):
        raise SpecError(f"unknown search kind {kind!r}")


def scan_shard(
    spec: EnumSpec,
    kind: str = "ne",
    conjecture: str | None = None,
    max_examples: int = 20,
) -> SearchReport:
    """Scan the shard named in ``spec`` (single process)."""
    _check_kind(kind)
    two_witnesses = conjecture == "two-witnesses"
    filters = spec.filters
    counts = dict.fromkeys(
        ("graphs", "graphs_scanned", "forms", "games_total", "games_scanned", "free", "counterexamples"), 0
    )
    examples: list[dict[str, Any]] = []
    first_cex: dict[str, Any] | None = None
    idx, total = spec.shard
    for item in iter_raw_graphs(spec):
        if item.index % total != idx:
            continue
        counts["graphs"] += 1
        if not accept_graph(spec, item):
            continue
        counts["graphs_scanned"] += 1
        base = item.form(spec.n, spec.mode)
        starts = (0,) if kind == "ne" else base.graph.nonterminals
        gt = GraphTables(base, starts)
        space = pref_space(base.p, base.q)
        size = len(space.orders)
        memo: dict = {}
        pad = (0,) * item.terminals
        for o_idx, owner in enumerate(iter_owners(spec.n, item.nonterminal)):
            counts["forms"] += 1
            counts["games_total"] += size**spec.n
            table = gt.table(owner + pad, spec.n)
            fc, masks = count_form(table, spec.n, space, filters, two_witnesses, memo)
            counts["games_scanned"] += fc.scanned
            counts["free"] += fc.free
            counts["counterexamples"] += fc.counterexamples
            if not fc.free:
                continue
            form = item.form(spec.n, spec.mode, owner)
            orders = preference_orders(form.outcomes)

            def game_of(tup: tuple[int, ...]) -> Game:
                return Game(form, tuple(orders[k] for k in tup))

            if conjecture is not None and first_cex is None and fc.first_counterexample is not None:
                tup = fc.first_counterexample
                game = game_of(tup)
                first_cex = _entry([item.index, o_idx, _pref_index(tup, size)], game, _certify(game, "ne"))
            if len(examples) < max_examples:
                for tup in itertools.islice(iter_free_prefs(masks, space, filters), max_examples - len(examples)):
                    game = game_of(tup)
                    examples.append(_entry([item.index, o_idx, _pref_index(tup, size)], game, _certify(game, kind)))
    if conjecture is None:
        del counts["counterexamples"]  # only meaningful against a conjecture
    return SearchReport(
        spec=spec.echo(),
        kind=kind,
        conjecture=conjecture,
        max_examples=max_examples,
        counts=counts,
        examples=examples,
        first_counterexample=first_cex,
        shard=([idx], total),
    )


def _scan_args(args: tuple) -> SearchReport:
    return scan_shard(*args)


def run_scan(
    spec: EnumSpec,
    kind: str = "ne",
    conjecture: str | None = None,
    max_examples: int = 20,
    jobs: int = 1,
) -> SearchReport:
    """Scan ``spec``'s shard, split across ``jobs`` worker processes."""
    if jobs < 1:
        raise SpecError("jobs must be at least 1")
    t0 = time.perf_counter()
    idx, total = spec.shard
    parts = [(spec.with_shard(idx + total * j, total * jobs), kind, conjecture, max_examples) for j in range(jobs)]
    if jobs == 1:
        reports = [scan_shard(spec, kind, conjecture, max_examples)]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(_scan_args, parts))
    merged = merge_reports(reports)
    log.info("scanned %d games in %.1fs", merged.counts["games_scanned"], time.perf_counter() - t0)
    return merged


def resolve_conjecture(spec: EnumSpec, which: str) -> EnumSpec:
    """Spec with the conjecture's hypothesis filters added; rejects incoherent pairings."""
    conj = CONJECTURES.get(which)
    if conj is None:
        raise SpecError(f"unknown conjecture {which!r}; choose from {sorted(CONJECTURES)}")
    if spec.mode is not conj.mode:
        raise SpecError(f"conjecture {which} concerns {conj.mode.value} games, spec enumerates {spec.mode.value}")
    if which == "two-witnesses" and spec.filters & {"C22"}:
        raise SpecError("two-witnesses scans all NE-free games; drop the C22 filter (use catch22 instead)")
    from dataclasses import replace

    return replace(spec, filters=spec.filters | conj.requires)


def check_conjecture(
    spec: EnumSpec,
    which: str,
    *,
    games: Sequence[Game] | None = None,
    max_examples: int = 20,
    jobs: int = 1,
) -> SearchReport:
    """Scan for NE-free games violating conjecture ``which``.

    With ``games`` given, those games are scanned one by one on the slow path
    instead of the enumeration (useful for planted instances).
    """
    spec = resolve_conjecture(spec, which)
    if games is None:
        return run_scan(spec, "ne", which, max_examples, jobs)
    return _scan_games(spec, which, games, max_examples)


def _scan_games(spec: EnumSpec, which: str, games: Sequence[Game], max_examples: int) -> SearchReport:
    counts = dict.fromkeys(
        ("graphs", "graphs_scanned", "forms", "games_total", "games_scanned", "free", "counterexamples"), 0
    )
    examples: list[dict[str, Any]] = []
    first_cex = None
    for pos, game in enumerate(games):
        counts["games_total"] += 1
        if game.mode is not spec.mode or not passes_filters(game, spec.filters):
            continue
        counts["games_scanned"] += 1
        if find_ne(game) is not None:
            continue
        counts["free"] += 1
        cert = refute_ne(game)
        entry = _entry([pos, 0, 0], game, cert)
        if len(examples) < max_examples:
            examples.append(entry)
        if which == "two-witnesses" and not check_condition_C22(game)[0]:
            continue
        counts["counterexamples"] += 1
        if first_cex is None:
            first_cex = entry
    return SearchReport(spec.echo(), "ne", which, max_examples, counts, examples, first_cex, ([0], 1))


def iter_free_games(spec: EnumSpec, kind: str = "ne") -> Iterator[tuple[tuple[int, int, int], Game, Certificate]]:
    _check_kind(kind)
    idx, total = spec.shard
    for item in iter_raw_graphs(spec):
        if item.index % total != idx or not accept_graph(spec, item):
            continue
        base = item.form(spec.n, spec.mode)
        starts = (0,) if kind == "ne" else base.graph.nonterminals
        gt = GraphTables(base, starts)
        space = pref_space(base.p, base.q)
        memo: dict = {}
        pad = (0,) * item.terminals
        for o_idx, owner in enumerate(iter_owners(spec.n, item.nonterminal)):
            table = gt.table(owner + pad, spec.n)
            fc, masks = count_form(table, spec.n, space, spec.filters, False, memo)
            if not fc.free:
                continue
            form = item.form(spec.n, spec.mode, owner)
            orders = preference_orders(form.outcomes)
            for tup in iter_free_prefs(masks, space, spec.filters):
                game = Game(form, tuple(orders[k] for k in tup))
                cert = _certify(game, kind)
                problems = verify_certificate(cert)
                if problems:
                    raise RuntimeError(f"certificate replay failed: {problems[:3]}")
                yield (item.index, o_idx, _pref_index(tup, len(space.orders))), game, cert


def find_ne_free(spec: EnumSpec) -> Iterator[tuple[Game, Certificate]]:
    """Every NE-free game of the scan, each with a replay-validated certificate."""
    for _, game, cert in iter_free_games(spec, "ne"):
        yield game, cert


def find_une_free(spec: EnumSpec) -> Iterator[tuple[Game, Certificate]]:
    """Every game without a uniform NE, with per-profile (start, deviation) witnesses."""
    for _, game, cert in iter_free_games(spec, "une"):
        yield game, cert


def confirm_free(game: Game, kind: str = "ne") -> bool:
    """Slow-path check used by tests: the game has no (uniform) NE."""
    return (find_ne(game) if kind == "ne" else find_une(game)) is None
