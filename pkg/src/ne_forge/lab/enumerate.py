"""Deterministic enumeration of small games.

Stream order: digraphs (by non-terminal count, terminal count, then the
successor sets of vertices 0, 1, ... in lexicographic order), then owner
assignments, then preference profiles.  Non-terminal vertices are
``0 .. N-1`` with ``0`` the initial vertex, terminals are ``N .. N+T-1``.
Shards split the stream by digraph index so that all ownerships and
preference profiles of one digraph stay on one worker.
"""
from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from typing import Any, Iterator

from ..game import Game, GameForm, Mode, Outcome
from ..graph import Digraph, is_bidirected

FILTERS = ("C", "C22", "Cprime", "Cprime22", "bidirected")
_DG_ONLY = {"C", "C22"}
_DGMS_ONLY = {"Cprime", "Cprime22"}


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class EnumSpec:
    n: int
    max_nonterminal: int
    max_terminals: int
    max_outdeg: int
    mode: Mode = Mode.DG
    filters: frozenset[str] = field(default_factory=frozenset)
    shard: tuple[int, int] = (0, 1)
    canonical_dedup: bool = False
    min_nonterminal: int = 1
    min_terminals: int = 0
    min_outdeg: int = 1
    max_interior: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "filters", frozenset(self.filters))
        object.__setattr__(self, "shard", tuple(self.shard))
        idx, total = self.shard
        if total < 1 or not 0 <= idx < total:
            raise SpecError(f"invalid shard {idx}/{total}")
        if self.n < 1 or self.max_nonterminal < 1 or self.max_outdeg < 1:
            raise SpecError("player count, non-terminal bound and out-degree bound must be positive")
        if self.max_terminals < 0 or self.min_terminals < 0:
            raise SpecError("terminal bounds must be non-negative")
        if not 1 <= self.min_nonterminal <= self.max_nonterminal:
            raise SpecError("need 1 <= min_nonterminal <= max_nonterminal")
        if self.min_terminals > self.max_terminals or not 1 <= self.min_outdeg <= self.max_outdeg:
            raise SpecError("minimum bounds exceed maximum bounds")
        unknown = self.filters - set(FILTERS)
        if unknown:
            raise SpecError(f"unknown filters {sorted(unknown)}")
        wrong = self.filters & (_DGMS_ONLY if self.mode is Mode.DG else _DG_ONLY)
        if wrong:
            raise SpecError(f"filters {sorted(wrong)} do not apply to {self.mode.value} games")
        if self.max_interior is not None and self.mode is Mode.DG:
            raise SpecError("max_interior only applies to DGMS enumeration")

    def with_shard(self, index: int, total: int) -> EnumSpec:
        return _replace(self, shard=(index, total))

    def echo(self) -> dict[str, Any]:
        """JSON view without shard metadata."""
        d = asdict(self)
        d.pop("shard")
        d["mode"] = self.mode.value
        d["filters"] = sorted(self.filters)
        return d


def _replace(spec: EnumSpec, **changes: Any) -> EnumSpec:
    from dataclasses import replace

    return replace(spec, **changes)


@dataclass(frozen=True)
class GraphItem:
    index: int
    nonterminal: int
    terminals: int
    succ: tuple[tuple[int, ...], ...]

    @property
    def graph(self) -> Digraph:
        return Digraph.from_successors(list(self.succ) + [()] * self.terminals)

    def form(self, n: int, mode: Mode, owner: tuple[int, ...] | None = None) -> GameForm:
        owner = owner if owner is not None else (1,) * self.nonterminal
        return GameForm(self.graph, n, owner + (0,) * self.terminals, 0, mode)


def _successor_options(v_count: int, lo: int, hi: int) -> list[tuple[int, ...]]:
    return [c for k in range(lo, min(hi, v_count) + 1) for c in itertools.combinations(range(v_count), k)]


def iter_raw_graphs(spec: EnumSpec) -> Iterator[GraphItem]:
    """All candidate digraphs with their global index (before sharding and dedup)."""
    index = 0
    for nt in range(spec.min_nonterminal, spec.max_nonterminal + 1):
        for t in range(spec.min_terminals, spec.max_terminals + 1):
            options = _successor_options(nt + t, spec.min_outdeg, spec.max_outdeg)
            for succ in itertools.product(options, repeat=nt):
                yield GraphItem(index, nt, t, succ)
                index += 1


@lru_cache(maxsize=64)
def _relabelings(nt: int, t: int) -> tuple[tuple[int, ...], ...]:
    out = []
    for p_nt in itertools.permutations(range(1, nt)):
        for p_t in itertools.permutations(range(nt, nt + t)):
            out.append((0,) + p_nt + p_t)
    return tuple(out[1:])  # drop the identity


def is_canonical(item: GraphItem) -> bool:
    """Lexicographically minimal among relabelings that fix vertex 0."""
    succ = item.succ
    for sigma in _relabelings(item.nonterminal, item.terminals):
        inv = [0] * len(sigma)
        for a, b in enumerate(sigma):
            inv[b] = a
        relabeled = tuple(tuple(sorted(sigma[w] for w in succ[inv[v]])) for v in range(item.nonterminal))
        if relabeled < succ:
            return False
    return True


def iter_graphs(spec: EnumSpec) -> Iterator[GraphItem]:
    """Digraphs of this shard that pass dedup and graph-level filters."""
    idx, total = spec.shard
    for item in iter_raw_graphs(spec):
        if item.index % total != idx:
            continue
        if accept_graph(spec, item):
            yield item


def accept_graph(spec: EnumSpec, item: GraphItem) -> bool:
    if spec.canonical_dedup and not is_canonical(item):
        return False
    if "bidirected" in spec.filters and not is_bidirected(item.graph):
        return False
    if spec.max_interior is not None:
        if item.form(spec.n, spec.mode).q > spec.max_interior:
            return False
    return True


def iter_owners(n: int, nonterminal: int) -> Iterator[tuple[int, ...]]:
    return itertools.product(range(1, n + 1), repeat=nonterminal)


def preference_orders(outcomes: tuple[Outcome, ...]) -> list[tuple[Outcome, ...]]:
    return list(itertools.permutations(outcomes))


def enumerate_games(spec: EnumSpec) -> Iterator[tuple[tuple[int, int, int], Game]]:
    """Every game of the shard with its global index ``(digraph, owner, preferences)``.

    Preference filters are applied; the slow, object-level counterpart of the
    scan engine, meant for small bounds and cross-checks.
    """
    from .scan import passes_filters

    for item in iter_graphs(spec):
        for o_idx, owner in enumerate(iter_owners(spec.n, item.nonterminal)):
            form = item.form(spec.n, spec.mode, owner)
            orders = preference_orders(form.outcomes)
            for p_idx, prefs in enumerate(itertools.product(orders, repeat=spec.n)):
                game = Game(form, prefs)
                if passes_filters(game, spec.filters):
                    yield (item.index, o_idx, p_idx), game
