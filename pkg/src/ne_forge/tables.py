"""Precomputed outcome and deviation tables over all profiles of a game form.

For every profile the table stores the outcome from each start vertex and,
per player, the bitmask of outcomes reachable by a unilateral deviation.
Preferences only enter afterwards, so one table answers equilibrium queries
for every preference profile.  Deviation masks depend on ownership only
through the deviator's vertex set, which lets :class:`GraphTables` share them
across all ownerships of one digraph.
"""
from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Iterator, Sequence

from .equilibrium import achievable_mask, one_player_masks
from .game import GameForm
from .play import walk


class GraphTables:
    """Owner-independent data for one digraph and mode."""

    def __init__(self, form: GameForm, starts: Sequence[int]):
        self.form = form
        self.starts = tuple(starts)
        g = form.graph
        self.nonterminals = g.nonterminals
        base: list[int | None] = [None] * g.vertex_count
        self.choices: list[tuple[int | None, ...]] = []
        for combo in itertools.product(*(g.succ[v] for v in self.nonterminals)):
            for v, w in zip(self.nonterminals, combo):
                base[v] = w
            self.choices.append(tuple(base))
        self.outcomes = [
            tuple(walk(form, choice, st)[2] for st in self.starts) for choice in self.choices
        ]
        self._by_deviator: dict[int, list[tuple[int, ...]]] = {}
        self._groups: dict[int, list] = {}

    def deviation_masks(self, deviators: int) -> list[tuple[int, ...]]:
        """Per profile, achievable-outcome masks (one per start) for a deviator owning ``deviators``."""
        hit = self._by_deviator.get(deviators)
        if hit is not None:
            return hit
        fixed = [v for v in self.nonterminals if not (deviators >> v) & 1]
        memo: dict[tuple, tuple[int, ...]] = {}
        out = []
        form = self.form
        for choice in self.choices:
            key = tuple(choice[v] for v in fixed)
            masks = memo.get(key)
            if masks is None:
                h = one_player_masks(form, choice, deviators)
                masks = tuple(achievable_mask(form, h, st) for st in self.starts)
                memo[key] = masks
            out.append(masks)
        self._by_deviator[deviators] = out
        return out

    def table(self, owner: Sequence[int], n: int) -> ProfileTable:
        masks = []
        groups = []
        for i in range(1, n + 1):
            dev = sum(1 << v for v in self.nonterminals if owner[v] == i)
            masks.append(self.deviation_masks(dev))
            if dev not in self._groups:
                self._groups[dev] = _group_rows(self.outcomes, masks[-1])
            groups.append(self._groups[dev])
        return ProfileTable(self.outcomes, masks, len(self.form.outcome_index), groups)


def _group_rows(outcomes: list[tuple[int, ...]], pm: list[tuple[int, ...]]) -> list[tuple[tuple[int, ...], tuple[int, ...], int]]:
    """Distinct (outcomes, masks) rows -> bitmask of the profiles sharing them."""
    acc: dict[tuple, int] = {}
    for k, row in enumerate(zip(outcomes, pm)):
        acc[row] = acc.get(row, 0) | (1 << k)
    return [(o, m, bits) for (o, m), bits in acc.items()]


class ProfileTable:
    def __init__(
        self,
        outcomes: list[tuple[int, ...]],
        masks: list[list[tuple[int, ...]]],
        n_outcomes: int,
        groups: list[list] | None = None,
    ):
        self.outcomes = outcomes
        self.masks = masks
        self.n_outcomes = n_outcomes
        self.size = len(outcomes)
        # distinct (outcomes, masks) rows per player -> bitmask of profiles sharing them
        self.groups = groups if groups is not None else [_group_rows(outcomes, pm) for pm in masks]

    @classmethod
    def of(cls, form: GameForm, starts: Sequence[int]) -> ProfileTable:
        return _cached_table(form, tuple(starts))

    def stable_mask(self, player: int, rank: Sequence[int]) -> int:
        """Profiles at which ``player`` (1-based) cannot improve from any start."""
        above = [0] * self.n_outcomes
        for o in range(self.n_outcomes):
            r = rank[o]
            above[o] = sum(1 << x for x in range(self.n_outcomes) if rank[x] < r)
        res = 0
        for outs, ms, bits in self.groups[player - 1]:
            for o, m in zip(outs, ms):
                if m & above[o]:
                    break
            else:
                res |= bits
        return res

    def equilibrium_mask(self, ranks: Sequence[Sequence[int]]) -> int:
        res = (1 << self.size) - 1
        for i, rank in enumerate(ranks, start=1):
            res &= self.stable_mask(i, rank)
            if not res:
                break
        return res

    def first_stable(self, ranks: Sequence[Sequence[int]]) -> int | None:
        res = self.equilibrium_mask(ranks)
        return (res & -res).bit_length() - 1 if res else None

    def stable_indices(self, ranks: Sequence[Sequence[int]]) -> Iterator[int]:
        res = self.equilibrium_mask(ranks)
        k = 0
        while res:
            if res & 1:
                yield k
            res >>= 1
            k += 1


@lru_cache(maxsize=256)
def _cached_table(form: GameForm, starts: tuple[int, ...]) -> ProfileTable:
    return GraphTables(form, starts).table(form.owner, form.n)
