"""Pure stationary strategy profiles and the plays they induce."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import prod
from typing import Iterator, Mapping

from .game import Game, GameForm, Outcome
from .graph import to_dot


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class StrategyProfile:
    """One chosen successor per non-terminal vertex (``None`` at terminals)."""

    choice: tuple[int | None, ...]

    def __getitem__(self, v: int) -> int | None:
        return self.choice[v]

    def as_dict(self) -> dict[int, int]:
        return {v: w for v, w in enumerate(self.choice) if w is not None}

    def strategy_of(self, form: GameForm, player: int) -> dict[int, int]:
        return {v: self.choice[v] for v in form.vertices_of(player)}

    def edges(self) -> list[tuple[int, int]]:
        return [(v, w) for v, w in enumerate(self.choice) if w is not None]

    @classmethod
    def from_mapping(cls, form: GameForm | Game, mapping: Mapping[int, int]) -> StrategyProfile:
        form = form.form if isinstance(form, Game) else form
        choice: list[int | None] = [None] * form.graph.vertex_count
        for v, w in mapping.items():
            choice[int(v)] = int(w)
        s = cls(tuple(choice))
        check_profile(form, s)
        return s


@dataclass(frozen=True)
class Play:
    """A finite path, or a lasso whose cycle is ``path[cycle_start:]``."""

    path: tuple[int, ...]
    cycle_start: int | None
    outcome: Outcome

    @property
    def is_finite(self) -> bool:
        return self.cycle_start is None

    @property
    def stem(self) -> tuple[int, ...]:
        return self.path if self.cycle_start is None else self.path[: self.cycle_start]

    @property
    def cycle(self) -> tuple[int, ...]:
        return () if self.cycle_start is None else self.path[self.cycle_start :]

    def edges(self) -> list[tuple[int, int]]:
        out = list(zip(self.path, self.path[1:]))
        if self.cycle_start is not None:
            out.append((self.path[-1], self.path[self.cycle_start]))
        return out


def _form(game: Game | GameForm) -> GameForm:
    return game.form if isinstance(game, Game) else game


def check_profile(game: Game | GameForm, s: StrategyProfile) -> None:
    g = _form(game).graph
    if len(s.choice) != g.vertex_count:
        raise ProfileError("profile length differs from the vertex count")
    for v in g.vertices:
        w = s.choice[v]
        if not g.succ[v]:
            if w is not None:
                raise ProfileError(f"terminal vertex {v} cannot choose a move")
        elif w is None:
            raise ProfileError(f"no move chosen at non-terminal vertex {v}")
        elif (v, w) not in g.edges:
            raise ProfileError(f"chosen move {v}->{w} is not an edge")


def walk(form: GameForm, choice: tuple[int | None, ...], start: int) -> tuple[list[int], int | None, int]:
    """Follow ``choice`` from ``start``; returns (path, cycle start, outcome index)."""
    seen: dict[int, int] = {}
    path: list[int] = []
    v = start
    while True:
        if v in seen:
            at = seen[v]
            return path, at, form.cycle_outcome[v]
        seen[v] = len(path)
        path.append(v)
        w = choice[v]
        if w is None:
            return path, None, form.sink_outcome[v]
        v = w


def resolve_play(game: Game | GameForm, s: StrategyProfile, start: int, *, check: bool = True) -> Play:
    form = _form(game)
    if check:
        check_profile(form, s)
    path, at, o = walk(form, s.choice, start)
    return Play(tuple(path), at, form.outcomes[o])


def profile_count(game: Game | GameForm) -> int:
    g = _form(game).graph
    return prod(len(g.succ[v]) for v in g.nonterminals)


def enumerate_profiles(game: Game | GameForm, start_index: int = 0) -> Iterator[StrategyProfile]:
    """All profiles, lexicographic in (vertex id, successor id), from ``start_index`` on."""
    g = _form(game).graph
    nts = g.nonterminals
    choices = [g.succ[v] for v in nts]
    base: list[int | None] = [None] * g.vertex_count
    for combo in itertools.islice(itertools.product(*choices), start_index, None):
        for v, w in zip(nts, combo):
            base[v] = w
        yield StrategyProfile(tuple(base))


def profile_at(game: Game | GameForm, index: int) -> StrategyProfile:
    g = _form(game).graph
    choice: list[int | None] = [None] * g.vertex_count
    if not 0 <= index < profile_count(game):
        raise ProfileError(f"profile index {index} out of range")
    for v in reversed(g.nonterminals):
        succ = g.succ[v]
        index, r = divmod(index, len(succ))
        choice[v] = succ[r]
    return StrategyProfile(tuple(choice))


def profile_index(game: Game | GameForm, s: StrategyProfile) -> int:
    g = _form(game).graph
    index = 0
    for v in g.nonterminals:
        succ = g.succ[v]
        index = index * len(succ) + succ.index(s.choice[v])
    return index


def deviate(game: Game | GameForm, s: StrategyProfile, player: int, t: Mapping[int, int]) -> StrategyProfile:
    """Replace player ``player``'s strategy in ``s`` by ``t``."""
    form = _form(game)
    mine = set(form.vertices_of(player))
    foreign = set(map(int, t)) - mine
    if foreign:
        raise ProfileError(f"deviation of player {player} touches foreign vertices {sorted(foreign)}")
    if set(map(int, t)) != mine:
        raise ProfileError(f"deviation of player {player} must cover all of {sorted(mine)}")
    choice = list(s.choice)
    for v, w in t.items():
        v, w = int(v), int(w)
        if (v, w) not in form.graph.edges:
            raise ProfileError(f"deviation move {v}->{w} is not an edge")
        choice[v] = w
    return StrategyProfile(tuple(choice))


def profile_to_json(s: StrategyProfile) -> dict[str, int]:
    return {str(v): w for v, w in s.as_dict().items()}


def profile_from_json(game: Game | GameForm, data: Mapping[str, int]) -> StrategyProfile:
    try:
        mapping = {int(v): int(w) for v, w in data.items()}
    except (TypeError, ValueError) as exc:
        raise ProfileError(f"malformed profile JSON: {exc}") from exc
    return StrategyProfile.from_mapping(_form(game), mapping)


def game_to_dot(game: Game, s: StrategyProfile | None = None, start: int | None = None) -> str:
    """DOT view of a game: SCC clusters, owners and outcome labels, and optionally a profile.

    Chosen edges are drawn blue; edges of the play realized from ``start``
    (default: the initial vertex) are drawn red and bold.
    """
    form = game.form
    g = form.graph
    labels = {}
    for v in g.vertices:
        if g.succ[v]:
            labels[v] = f"{v} (P{form.owner[v]})"
        else:
            labels[v] = f"{v} {form.outcome_label(form.outcomes[form.sink_outcome[v]])}"
    attrs: dict[tuple[int, int], str] = {}
    if s is not None:
        check_profile(form, s)
        for e in s.edges():
            attrs[e] = "color=blue"
        origin = start if start is not None else form.initial
        if origin is not None:
            for e in resolve_play(form, s, origin, check=False).edges():
                attrs[e] = "color=red, penwidth=2"
    return to_dot(g, form.partition, labels=labels, edge_attrs=attrs, name="game")
