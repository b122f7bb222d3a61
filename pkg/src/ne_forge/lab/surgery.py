"""Removing the initial vertex, re-extending a uniform NE, and acyclic prefixes."""
from __future__ import annotations

from typing import Mapping

from ..equilibrium import is_une
from ..game import Game, GameError, GameForm, Mode
from ..graph import Digraph, GraphError
from ..play import StrategyProfile, resolve_play

NEW_SINK = "new-sink"
STRUCTURE_CHANGED = "structure-changed"


def remove_initial(game: Game) -> Game:
    """The subgame on V minus v_0; it has no designated initial vertex."""
    v0 = game.initial
    if v0 is None:
        raise GameError("no-initial", "game has no initial vertex to remove")
    form = game.form
    g = form.graph
    keep = [v for v in g.vertices if v != v0]
    sub, index = g.induced(keep)
    for v in keep:
        if g.succ[v] and not sub.succ[index[v]]:
            raise GameError(NEW_SINK, f"v_0 removal creates a new sink at vertex {v}")
    owner = tuple(form.owner[v] for v in keep)
    new_form = GameForm(sub, form.n, owner, None, form.mode)
    if form.mode is Mode.DGMS:
        old_t = [frozenset(index[v] for v in grp) for grp in form.terminal_groups]
        old_c = [frozenset(index[v] for v in grp if v != v0) for grp in form.interior_groups]
        if list(new_form.terminal_groups) != old_t or list(new_form.interior_groups) != old_c:
            raise GameError(STRUCTURE_CHANGED, "v_0 removal changes the SCC outcome structure")
    return Game(new_form, game.prefs)


def lift_profile(game: Game, sub_profile: StrategyProfile) -> list[int | None]:
    """Subgame choices re-indexed onto the full game (``None`` at v_0)."""
    v0 = game.initial
    back = [v for v in game.graph.vertices if v != v0]
    choice: list[int | None] = [None] * game.graph.vertex_count
    for x, w in enumerate(sub_profile.choice):
        if w is not None:
            choice[back[x]] = back[w]
    return choice


def extend_une_to_ne(game: Game, une_of_subgame: StrategyProfile) -> StrategyProfile:
    """Add the v_0 owner's best reply to a uniform NE of the subgame without v_0."""
    sub = remove_initial(game)
    if not is_une(sub, une_of_subgame):
        raise GameError("not-une", "profile is not a uniform NE of the subgame without v_0")
    v0 = game.initial
    choice = lift_profile(game, une_of_subgame)
    rank = game.ranks[game.owner[v0] - 1]
    best = None
    for w in game.graph.succ[v0]:
        choice[v0] = w
        s = StrategyProfile(tuple(choice))
        o = game.form.outcome_index[resolve_play(game, s, v0, check=False).outcome]
        if best is None or rank[o] < best[0]:
            best = (rank[o], w)
    choice[v0] = best[1]
    return StrategyProfile(tuple(choice))


def extend_with_prefix(
    core: Game,
    prefix: Digraph,
    attach: Mapping[int, int],
    prefix_owner: Mapping[int, int],
    initial: int | None = None,
) -> Game:
    """Glue an acyclic ``prefix`` above ``core``; its sinks are identified with core vertices.

    Non-sink prefix vertices are appended after the core's vertices, so the
    core keeps its numbering and deleting the prefix gives back the core.
    Players keep their core preferences.
    """
    if not prefix.is_acyclic():
        raise GraphError("prefix must be acyclic")
    sinks = set(prefix.terminals)
    inner = [v for v in prefix.vertices if v not in sinks]
    if not inner:
        raise GraphError("prefix has no non-terminal vertex to start from")
    if set(attach) != sinks:
        raise GraphError(f"prefix sinks {sorted(sinks)} must be attached exactly; got {sorted(attach)}")
    cg = core.graph
    for x, y in attach.items():
        if not 0 <= y < cg.vertex_count:
            raise GraphError(f"dangling attachment {x}->{y}")
    sources = [v for v in inner if not prefix.pred[v]]
    if initial is None:
        initial = sources[0]
    if initial not in sources:
        raise GraphError(f"initial vertex {initial} is not a prefix source")
    base = cg.vertex_count
    new_id = {v: base + k for k, v in enumerate(inner)}
    target = {**new_id, **{x: int(y) for x, y in attach.items()}}
    edges = set(cg.edges)
    for u, v in prefix.edges:
        edges.add((new_id[u], target[v]))
    graph = Digraph(base + len(inner), frozenset(edges))
    owner = list(core.owner) + [0] * len(inner)
    for v in inner:
        who = prefix_owner.get(v)
        if who is None or not 1 <= who <= core.n:
            raise GameError("ownership-gap", f"prefix vertex {v} needs an owner in 1..{core.n}")
        owner[new_id[v]] = who
    form = GameForm(graph, core.n, tuple(owner), new_id[initial], core.mode)
    return Game(form, core.prefs)
