"""Nash equilibria in pure stationary strategies.

A unilateral deviation by player ``i`` is analysed on the one-player graph in
which ``i``'s vertices keep all their moves and every other vertex keeps only
its chosen move.  Terminal outcomes are achievable iff reachable there; a
cyclic outcome is achievable iff ``i`` can reach a part of its region from
which the play can be kept inside the region forever.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Iterator

from .game import Game, GameForm, Outcome, game_from_json, game_to_json, parse_outcome
from .play import (
    StrategyProfile,
    check_profile,
    deviate,
    enumerate_profiles,
    profile_at,
    profile_count,
    resolve_play,
    walk,
)


# -- bitmask kernels ------------------------------------------------------


def _bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def one_player_masks(form: GameForm, choice: tuple[int | None, ...], deviators: int) -> list[int]:
    """Successor bitmasks of the one-player graph; ``deviators`` is a vertex bitmask."""
    succ_mask = form.succ_mask
    return [
        succ_mask[v] if (deviators >> v) & 1 else (0 if w is None else 1 << w)
        for v, w in enumerate(choice)
    ]


def reach_mask(h: list[int], start: int) -> int:
    seen = frontier = 1 << start
    while frontier:
        nxt = 0
        for v in _bits(frontier):
            nxt |= h[v]
        frontier = nxt & ~seen
        seen |= frontier
    return seen


def safe_core(h: list[int], region: int) -> int:
    """Largest subset of ``region`` in which every vertex keeps a move inside it."""
    core = region
    while core:
        drop = 0
        for v in _bits(core):
            if not h[v] & core:
                drop |= 1 << v
        if not drop:
            break
        core &= ~drop
    return core


def achievable_mask(form: GameForm, h: list[int], start: int) -> int:
    reach = reach_mask(h, start)
    mask = 0
    for vm, o in form.terminal_targets:
        if reach & vm:
            mask |= 1 << o
    for region, o in form.cyclic_targets:
        if region & reach and safe_core(h, region & reach):
            mask |= 1 << o
    return mask


def player_mask(form: GameForm, player: int) -> int:
    return sum(1 << v for v in form.vertices_of(player))


# -- public API -------------------------------------------------------------


def _start(game: Game, start: int | None) -> int:
    start = game.initial if start is None else start
    if start is None:
        raise ValueError("game has no initial vertex; pass start explicitly")
    return start


def achievable_outcomes(game: Game | GameForm, s: StrategyProfile, i: int, start: int) -> frozenset[Outcome]:
    """Outcomes player ``i`` can obtain from ``start`` by changing only their own strategy."""
    form = game.form if isinstance(game, Game) else game
    h = one_player_masks(form, s.choice, player_mask(form, i))
    mask = achievable_mask(form, h, start)
    return frozenset(form.outcomes[o] for o in _bits(mask))


def deviation_to(game: Game | GameForm, s: StrategyProfile, i: int, start: int, target: Outcome) -> dict[int, int]:
    """A stationary strategy of player ``i`` that steers the play from ``start`` to ``target``."""
    form = game.form if isinstance(game, Game) else game
    mine = player_mask(form, i)
    h = one_player_masks(form, s.choice, mine)
    o = form.outcome_index[target]
    reach = reach_mask(h, start)
    goal = 0
    stay = 0
    for vm, k in form.terminal_targets:
        if k == o:
            goal = vm & reach
    for region, k in form.cyclic_targets:
        if k == o:
            stay = safe_core(h, region & reach)
            goal = stay
    if not goal:
        raise ValueError(f"outcome {target} is not achievable for player {i}")
    strategy = {v: s.choice[v] for v in _bits(mine)}
    # shortest path to the goal set fixes the moves along the way
    parent = {start: None}
    queue = deque([start])
    hit = start if (goal >> start) & 1 else None
    while queue and hit is None:
        u = queue.popleft()
        for w in _bits(h[u]):
            if w not in parent:
                parent[w] = u
                if (goal >> w) & 1:
                    hit = w
                    break
                queue.append(w)
    assert hit is not None
    v = hit
    while parent[v] is not None:
        u = parent[v]
        if (mine >> u) & 1:
            strategy[u] = v
        v = u
    for v in _bits(stay & mine):
        strategy[v] = next(_bits(h[v] & stay))
    return strategy


def best_deviation(game: Game, s: StrategyProfile, i: int, start: int | None = None) -> tuple[Outcome, dict[int, int]] | None:
    """Player ``i``'s most preferred achievable outcome, if strictly better than the current one."""
    start = _start(game, start)
    current = resolve_play(game, s, start, check=False).outcome
    options = achievable_outcomes(game, s, i, start)
    order = game.prefs[i - 1]
    best = min(options, key=order.index)
    if order.index(best) >= order.index(current):
        return None
    return best, deviation_to(game, s, i, start, best)


def is_ne(game: Game, s: StrategyProfile, start: int | None = None) -> bool:
    start = _start(game, start)
    check_profile(game, s)
    form = game.form
    _, _, o = walk(form, s.choice, start)
    for i in range(1, game.n + 1):
        rank = game.ranks[i - 1]
        better = sum(1 << k for k in range(len(rank)) if rank[k] < rank[o])
        if not better:
            continue
        h = one_player_masks(form, s.choice, player_mask(form, i))
        if achievable_mask(form, h, start) & better:
            return False
    return True


def nonterminal_starts(game: Game | GameForm) -> tuple[int, ...]:
    form = game.form if isinstance(game, Game) else game
    return form.graph.nonterminals


def is_une(game: Game, s: StrategyProfile) -> bool:
    return all(is_ne(game, s, v) for v in nonterminal_starts(game))


# -- certificates -----------------------------------------------------------


@dataclass(frozen=True)
class Refutation:
    profile_index: int
    start: int
    player: int
    deviation: dict[int, int]
    outcome: Outcome
    improved_outcome: Outcome


@dataclass(frozen=True)
class Certificate:
    """Proof that no profile of ``game`` is a NE (kind "ne") or a uniform NE (kind "une")."""

    game: Game
    kind: str
    refutations: tuple[Refutation, ...] = field(default_factory=tuple)

    def to_json(self) -> dict[str, Any]:
        label = self.game.form.outcome_label
        return {
            "kind": self.kind,
            "game": game_to_json(self.game),
            "refutations": [
                {
                    "profile_index": r.profile_index,
                    "start": r.start,
                    "player": r.player,
                    "deviation": {str(v): w for v, w in sorted(r.deviation.items())},
                    "outcome": label(r.outcome),
                    "improved_outcome": label(r.improved_outcome),
                }
                for r in self.refutations
            ],
        }

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> Certificate:
        game = game_from_json(data["game"])
        q = game.form.q

        def parse(x: str) -> Outcome:
            return parse_outcome(x, game.mode, q)

        refs = tuple(
            Refutation(
                int(r["profile_index"]),
                int(r["start"]),
                int(r["player"]),
                {int(v): int(w) for v, w in r["deviation"].items()},
                parse(r["outcome"]),
                parse(r["improved_outcome"]),
            )
            for r in data["refutations"]
        )
        return cls(game, data["kind"], refs)


def _refute(game: Game, s: StrategyProfile, index: int, starts: tuple[int, ...]) -> Refutation | None:
    for start in starts:
        for i in range(1, game.n + 1):
            dev = best_deviation(game, s, i, start)
            if dev is not None:
                current = resolve_play(game, s, start, check=False).outcome
                return Refutation(index, start, i, dev[1], current, dev[0])
    return None


def find_ne(game: Game) -> StrategyProfile | None:
    """Lexicographically first NE from the initial vertex, or ``None``."""
    from .tables import ProfileTable

    table = ProfileTable.of(game.form, (_start(game, None),))
    k = table.first_stable(game.ranks)
    return None if k is None else profile_at(game, k)


def find_une(game: Game) -> StrategyProfile | None:
    from .tables import ProfileTable

    table = ProfileTable.of(game.form, nonterminal_starts(game))
    k = table.first_stable(game.ranks)
    return None if k is None else profile_at(game, k)


def _certificate(game: Game, kind: str, starts: tuple[int, ...]) -> Certificate:
    refs = []
    for k, s in enumerate(enumerate_profiles(game)):
        r = _refute(game, s, k, starts)
        if r is None:
            raise ValueError(f"profile {k} is an equilibrium; no certificate exists")
        refs.append(r)
    return Certificate(game, kind, tuple(refs))


def refute_ne(game: Game) -> Certificate:
    """Certificate mapping every profile to an improving deviation from the initial vertex."""
    return _certificate(game, "ne", (_start(game, None),))


def refute_une(game: Game) -> Certificate:
    """Certificate mapping every profile to a start vertex and an improving deviation there."""
    return _certificate(game, "une", nonterminal_starts(game))


def verify_certificate(cert: Certificate) -> list[str]:
    """Replay every refutation; returns the list of problems (empty when valid)."""
    game = cert.game
    problems = []
    count = profile_count(game)
    indices = sorted(r.profile_index for r in cert.refutations)
    if indices != list(range(count)):
        problems.append(f"refutations must cover profiles 0..{count - 1} exactly once")
    if cert.kind == "ne":
        allowed = {game.initial}
    elif cert.kind == "une":
        allowed = set(nonterminal_starts(game))
    else:
        return problems + [f"unknown certificate kind {cert.kind!r}"]
    for r in cert.refutations:
        if r.start not in allowed:
            problems.append(f"profile {r.profile_index}: start {r.start} not allowed for kind {cert.kind}")
            continue
        try:
            s = profile_at(game, r.profile_index)
            before = resolve_play(game, s, r.start).outcome
            after = resolve_play(game, deviate(game, s, r.player, r.deviation), r.start).outcome
        except ValueError as exc:
            problems.append(f"profile {r.profile_index}: {exc}")
            continue
        if before != r.outcome or after != r.improved_outcome:
            problems.append(f"profile {r.profile_index}: replay gives {before}->{after}")
        elif not game.prefers(r.player, after, before):
            problems.append(f"profile {r.profile_index}: deviation does not improve player {r.player}")
    return problems


# -- inventory --------------------------------------------------------------


@dataclass(frozen=True)
class NeInventory:
    terminal_ne: tuple[tuple[StrategyProfile, Outcome], ...]
    cyclic_ne: tuple[tuple[StrategyProfile, Outcome], ...]
    vt_reachable_from_initial: bool


def ne_inventory(game: Game) -> NeInventory:
    from .tables import ProfileTable

    start = _start(game, None)
    form = game.form
    table = ProfileTable.of(form, (start,))
    terminal, cyclic = [], []
    for k in table.stable_indices(game.ranks):
        s = profile_at(game, k)
        o = form.outcomes[table.outcomes[k][0]]
        (terminal if o.is_terminal else cyclic).append((s, o))
    reach = form.graph.reachable_from(start)
    vt = any(reach & grp for grp in form.terminal_groups)
    return NeInventory(tuple(terminal), tuple(cyclic), vt)
