"""DG and DGMS games: outcomes, preferences, condition predicates and merging.

Outcome labels are derived from graph structure.  In DG mode the terminal
outcomes are the sink vertices (in vertex order) and every infinite play is
the single cyclic outcome ``c``.  In DGMS mode each terminal SCC is a terminal
outcome and each interior SCC a cyclic outcome, both numbered by smallest
member vertex.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Any, Mapping, NamedTuple, Sequence

from .graph import Digraph, SccPartition, contract_terminal_sccs, scc_decompose


class Mode(str, Enum):
    DG = "dg"
    DGMS = "dgms"


class GameError(ValueError):
    """Invalid game; ``code`` names the violated invariant."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


OWNERSHIP_GAP = "ownership-gap"
INITIAL_TERMINAL = "initial-terminal"
NOT_PERMUTATION = "preference-not-permutation"
LABEL_MISMATCH = "label-mismatch"
MODE_MISMATCH = "mode-mismatch"
WRONG_MODE = "wrong-mode"
MERGE_UNDEFINED = "merge-undefined"


class Outcome(NamedTuple):
    kind: str  # "a" for terminal outcomes, "c" for cyclic ones
    index: int  # 1-based

    @property
    def is_terminal(self) -> bool:
        return self.kind == "a"

    @property
    def is_cyclic(self) -> bool:
        return self.kind == "c"

    def label(self, mode: Mode | str = Mode.DGMS) -> str:
        if self.kind == "a":
            return f"a:{self.index}"
        return "c" if Mode(mode) is Mode.DG else f"c:{self.index}"


def Terminal(k: int) -> Outcome:
    return Outcome("a", k)


def Cyclic(j: int = 1) -> Outcome:
    return Outcome("c", j)


C = Cyclic(1)


def parse_outcome(text: str, mode: Mode | str, q: int | None = None) -> Outcome:
    """Parse ``"a:<k>"``, ``"c"`` or ``"c:<j>"``."""
    mode = Mode(mode)
    text = text.strip()
    if text == "c":
        if mode is Mode.DGMS and q is not None and q != 1:
            raise GameError(MODE_MISMATCH, f"bare 'c' is ambiguous in a DGMS game with q={q}")
        return C
    kind, sep, num = text.partition(":")
    if not sep or kind not in ("a", "c") or not num.isdigit() or int(num) < 1:
        raise GameError(NOT_PERMUTATION, f"unknown outcome id {text!r}")
    if kind == "c" and mode is Mode.DG and int(num) != 1:
        raise GameError(MODE_MISMATCH, f"DG games have a single cyclic outcome, got {text!r}")
    return Outcome(kind, int(num))


@dataclass(frozen=True)
class GameForm:
    """Everything about a game except the players' preferences."""

    graph: Digraph
    n: int
    owner: tuple[int, ...]  # per vertex; 0 on terminal vertices
    initial: int | None = 0
    mode: Mode = Mode.DG

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "owner", tuple(int(x) for x in self.owner))

    @cached_property
    def partition(self) -> SccPartition:
        return scc_decompose(self.graph)

    @cached_property
    def terminal_groups(self) -> tuple[frozenset[int], ...]:
        """Vertex sets of a_1..a_p."""
        if self.mode is Mode.DG:
            return tuple(frozenset([v]) for v in self.graph.terminals)
        part = self.partition
        return tuple(part.components[c] for c in part.terminal_ids)

    @cached_property
    def interior_groups(self) -> tuple[frozenset[int], ...]:
        """Vertex sets of c_1..c_q (DGMS); in DG mode all interior SCCs share ``c``."""
        part = self.partition
        return tuple(part.components[c] for c in part.interior_ids)

    @property
    def p(self) -> int:
        return len(self.terminal_groups)

    @property
    def q(self) -> int:
        return 1 if self.mode is Mode.DG else len(self.interior_groups)

    @cached_property
    def outcomes(self) -> tuple[Outcome, ...]:
        return tuple(Terminal(k) for k in range(1, self.p + 1)) + tuple(
            Cyclic(j) for j in range(1, self.q + 1)
        )

    @cached_property
    def outcome_index(self) -> dict[Outcome, int]:
        return {o: i for i, o in enumerate(self.outcomes)}

    @cached_property
    def cycle_outcome(self) -> tuple[int, ...]:
        """Outcome index of a play whose cycle passes through each vertex (-1 if impossible)."""
        out = [-1] * self.graph.vertex_count
        part = self.partition
        if self.mode is Mode.DG:
            c = self.p
            for v in self.graph.nonterminals:
                out[v] = c
            return tuple(out)
        for k, cid in enumerate(part.terminal_ids):
            for v in part.components[cid]:
                if self.graph.succ[v]:
                    out[v] = k
        for j, cid in enumerate(part.interior_ids):
            for v in part.components[cid]:
                out[v] = self.p + j
        return tuple(out)

    @cached_property
    def sink_outcome(self) -> tuple[int, ...]:
        """Outcome index of a play ending at each sink vertex (-1 elsewhere)."""
        out = [-1] * self.graph.vertex_count
        for k, group in enumerate(self.terminal_groups):
            for v in group:
                if not self.graph.succ[v]:
                    out[v] = k
        return tuple(out)

    @cached_property
    def succ_mask(self) -> tuple[int, ...]:
        return tuple(sum(1 << w for w in ws) for ws in self.graph.succ)

    @cached_property
    def terminal_targets(self) -> tuple[tuple[int, int], ...]:
        """(vertex bitmask, outcome index): entering the set fixes the outcome."""
        return tuple((sum(1 << v for v in grp), k) for k, grp in enumerate(self.terminal_groups))

    @cached_property
    def cyclic_targets(self) -> tuple[tuple[int, int], ...]:
        """(region bitmask, outcome index): staying in the region forever yields the outcome."""
        if self.mode is Mode.DG:
            return ((sum(1 << v for v in self.graph.nonterminals), self.p),)
        return tuple(
            (sum(1 << v for v in grp), self.p + j) for j, grp in enumerate(self.interior_groups)
        )

    def vertices_of(self, player: int) -> tuple[int, ...]:
        return tuple(v for v in self.graph.nonterminals if self.owner[v] == player)

    def outcome_label(self, o: Outcome) -> str:
        return o.label(self.mode)


@dataclass(frozen=True)
class Game:
    form: GameForm
    prefs: tuple[tuple[Outcome, ...], ...]  # per player, best first

    @classmethod
    def build(
        cls,
        graph: Digraph,
        owner: Mapping[int, int] | Sequence[int],
        prefs: Sequence[Sequence[Outcome | str]],
        *,
        n: int | None = None,
        initial: int | None = 0,
        mode: Mode | str = Mode.DG,
    ) -> Game:
        mode = Mode(mode)
        if isinstance(owner, Mapping):
            own = [0] * graph.vertex_count
            for v, i in owner.items():
                own[int(v)] = int(i)
        else:
            own = list(owner)
        if n is None:
            n = len(prefs)
        form = GameForm(graph, n, tuple(own), initial, mode)
        q = form.q
        parsed = tuple(
            tuple(o if isinstance(o, Outcome) else parse_outcome(o, mode, q) for o in order)
            for order in prefs
        )
        return cls(form, parsed)

    # convenience views on the form
    @property
    def graph(self) -> Digraph:
        return self.form.graph

    @property
    def n(self) -> int:
        return self.form.n

    @property
    def owner(self) -> tuple[int, ...]:
        return self.form.owner

    @property
    def initial(self) -> int | None:
        return self.form.initial

    @property
    def mode(self) -> Mode:
        return self.form.mode

    @property
    def outcomes(self) -> tuple[Outcome, ...]:
        return self.form.outcomes

    @cached_property
    def ranks(self) -> tuple[tuple[int, ...], ...]:
        """``ranks[i-1][outcome index]``; 0 is best."""
        idx = self.form.outcome_index
        out = []
        for order in self.prefs:
            r = [0] * len(idx)
            for pos, o in enumerate(order):
                r[idx[o]] = pos
            out.append(tuple(r))
        return tuple(out)

    def prefers(self, player: int, a: Outcome, b: Outcome) -> bool:
        """Strictly ``a`` over ``b`` for ``player``."""
        order = self.prefs[player - 1]
        return order.index(a) < order.index(b)

    def with_prefs(self, prefs: Sequence[Sequence[Outcome]]) -> Game:
        return Game(self.form, tuple(tuple(p) for p in prefs))


def validate(game: Game, *, labels: Mapping[str, Any] | None = None) -> None:
    """Raise :class:`GameError` unless ``game`` is well formed.

    ``labels`` optionally declares the vertex sets behind the outcome labels
    (keys ``"terminals"`` and ``"interiors"``); they must match the structure.
    """
    form = game.form
    g = form.graph
    if form.n < 1:
        raise GameError(OWNERSHIP_GAP, "a game needs at least one player")
    if len(form.owner) != g.vertex_count:
        raise GameError(OWNERSHIP_GAP, "owner map does not cover the vertex set")
    for v in g.vertices:
        who = form.owner[v]
        if g.succ[v] and not 1 <= who <= form.n:
            raise GameError(OWNERSHIP_GAP, f"ownership gap: non-terminal vertex {v} has no owner in 1..{form.n}")
        if not g.succ[v] and who != 0:
            raise GameError(OWNERSHIP_GAP, f"terminal vertex {v} cannot be owned")
    if form.initial is not None:
        if not 0 <= form.initial < g.vertex_count:
            raise GameError(INITIAL_TERMINAL, f"initial vertex {form.initial} out of range")
        if not g.succ[form.initial]:
            raise GameError(INITIAL_TERMINAL, f"initial vertex {form.initial} is terminal")
    if labels is not None:
        _check_labels(form, labels)
    if len(game.prefs) != form.n:
        raise GameError(NOT_PERMUTATION, f"expected {form.n} preference orders, got {len(game.prefs)}")
    expected = set(form.outcomes)
    for i, order in enumerate(game.prefs, start=1):
        cyc = {o for o in order if o.is_cyclic}
        if form.mode is Mode.DG and cyc - {C}:
            raise GameError(MODE_MISMATCH, f"player {i}: DG games have only the cyclic outcome c")
        if form.mode is Mode.DGMS and any(o.index > form.q for o in cyc):
            raise GameError(MODE_MISMATCH, f"player {i}: cyclic outcome beyond q={form.q}")
        if len(order) != len(expected) or set(order) != expected:
            raise GameError(NOT_PERMUTATION, f"player {i}: preference not a permutation of the outcomes")


def _check_labels(form: GameForm, labels: Mapping[str, Any]) -> None:
    declared_t = labels.get("terminals")
    if declared_t is not None:
        if [frozenset(x) for x in declared_t] != list(form.terminal_groups):
            raise GameError(LABEL_MISMATCH, "declared terminal labels do not match the SCC structure")
    declared_c = labels.get("interiors")
    if declared_c is not None:
        if [frozenset(x) for x in declared_c] != list(form.interior_groups):
            raise GameError(LABEL_MISMATCH, "declared interior labels do not match the SCC structure")


def _require(game: Game, mode: Mode, hint: str) -> None:
    if game.mode is not mode:
        raise GameError(WRONG_MODE, f"needs a {mode.value.upper()} game; {hint}")


def _below(order: Sequence[Outcome], pivot: Outcome) -> int:
    pos = order.index(pivot)
    return sum(1 for o in order[pos + 1 :] if o.is_terminal)


def k_c(game: Game, i: int) -> int:
    """Number of terminal outcomes player ``i`` ranks below ``c``."""
    _require(game, Mode.DG, "use k_interior for DGMS games")
    return _below(game.prefs[i - 1], C)


def check_condition_C(game: Game) -> bool:
    _require(game, Mode.DG, "use check_condition_Cprime for DGMS games")
    return all(k_c(game, i) == 0 for i in range(1, game.n + 1))


def check_condition_C22(game: Game) -> tuple[bool, tuple[int, int] | None]:
    """(C22) holds unless two players each rank at least two terminals below ``c``."""
    _require(game, Mode.DG, "use check_condition_Cprime22 for DGMS games")
    heavy = [i for i in range(1, game.n + 1) if k_c(game, i) >= 2]
    if len(heavy) >= 2:
        return False, (heavy[0], heavy[1])
    return True, None


def k_interior(game: Game, i: int, j: int) -> int:
    """Number of terminal outcomes player ``i`` ranks below ``c_j``."""
    _require(game, Mode.DGMS, "use k_c for DG games")
    if not 1 <= j <= game.form.q:
        raise GameError(MODE_MISMATCH, f"cyclic index {j} out of range 1..{game.form.q}")
    return _below(game.prefs[i - 1], Cyclic(j))


def check_condition_Cprime(game: Game, polarity: str = "worse") -> bool:
    """Every interior outcome against every terminal outcome, for every player.

    The default ``"worse"`` polarity requires every cyclic outcome to be ranked
    below all terminal ones (it reduces to (C) when q = 1).  ``"better"`` gives
    the literal reading with the opposite comparison.
    """
    _require(game, Mode.DGMS, "use check_condition_C for DG games")
    p, q = game.form.p, game.form.q
    if polarity == "worse":
        want = 0
    elif polarity == "better":
        want = p
    else:
        raise ValueError(f"unknown polarity {polarity!r}")
    return all(k_interior(game, i, j) == want for i in range(1, game.n + 1) for j in range(1, q + 1))


def check_condition_Cprime22(
    game: Game,
) -> tuple[bool, tuple[tuple[int, int], tuple[int, int]] | None]:
    _require(game, Mode.DGMS, "use check_condition_C22 for DG games")
    found: list[tuple[int, int]] = []
    for i in range(1, game.n + 1):
        for j in range(1, game.form.q + 1):
            if k_interior(game, i, j) >= 2:
                found.append((i, j))
                break
        if len(found) == 2:
            return False, (found[0], found[1])
    return True, None


def merge_cyclic_outcomes(game: Game) -> Game:
    """Collapse c_1..c_q of a DGMS game into the single DG outcome ``c``.

    Each player's cyclic outcomes must form one contiguous block; ``c`` takes
    the block's place.  With q = 0, ``c`` is unreachable and is ranked last.
    Terminal SCCs must already be sinks (see :func:`contract_game`), since the
    DG reading would otherwise turn a closed cycle into ``c``.
    """
    _require(game, Mode.DGMS, "merging applies to DGMS games")
    form = game.form
    g = form.graph
    if any(len(grp) != 1 or g.succ[next(iter(grp))] for grp in form.terminal_groups):
        raise GameError(MERGE_UNDEFINED, "merge undefined: contract terminal SCCs to sinks first")
    merged_prefs = []
    for i, order in enumerate(game.prefs, start=1):
        pos = [k for k, o in enumerate(order) if o.is_cyclic]
        if pos and pos != list(range(pos[0], pos[0] + len(pos))):
            raise GameError(
                MERGE_UNDEFINED,
                f"merge undefined for this preference profile (player {i} interleaves cyclic outcomes)",
            )
        terms = [o for o in order if o.is_terminal]
        at = pos[0] if pos else len(terms)
        merged_prefs.append(tuple(terms[:at]) + (C,) + tuple(terms[at:]))
    new_form = GameForm(g, form.n, form.owner, form.initial, Mode.DG)
    return Game(new_form, tuple(merged_prefs))


def contract_game(game: Game) -> tuple[Game, tuple[int, ...]]:
    """DGMS game with every terminal SCC collapsed to a sink; outcomes keep their labels."""
    _require(game, Mode.DGMS, "contraction of terminal SCCs changes DG games")
    form = game.form
    graph, vmap = contract_terminal_sccs(form.graph)
    owner = [0] * graph.vertex_count
    for v in form.graph.vertices:
        if graph.succ[vmap[v]]:
            owner[vmap[v]] = form.owner[v]
    initial = None if form.initial is None else vmap[form.initial]
    if initial is not None and not graph.succ[initial]:
        raise GameError(INITIAL_TERMINAL, "initial vertex lies in a terminal SCC")
    return Game(GameForm(graph, form.n, tuple(owner), initial, form.mode), game.prefs), vmap


# -- JSON -----------------------------------------------------------------


def game_to_json(game: Game) -> dict[str, Any]:
    form = game.form
    return {
        "players": form.n,
        "vertices": form.graph.vertex_count,
        "edges": [list(e) for e in form.graph.sorted_edges()],
        "owner": {str(v): form.owner[v] for v in form.graph.nonterminals},
        "initial": form.initial,
        "mode": form.mode.value,
        "preferences": [[form.outcome_label(o) for o in order] for order in game.prefs],
    }


def game_from_json(data: Mapping[str, Any]) -> Game:
    """Parse and validate the JSON game schema."""
    try:
        edges = [(int(u), int(v)) for u, v in data["edges"]]
        n = int(data["players"])
        mode = Mode(data.get("mode", "dg"))
        count = data.get("vertices")
        owner = {int(v): int(i) for v, i in data["owner"].items()}
        prefs_raw = data["preferences"]
        initial = data.get("initial", 0)
    except (KeyError, TypeError, ValueError) as exc:
        raise GameError("malformed", f"malformed game JSON: {exc}") from exc
    if count is None:
        mentioned = [x for e in edges for x in e] + list(owner) + ([initial] if initial is not None else [])
        count = 1 + max(mentioned, default=0)
    graph = Digraph.from_edges(edges, int(count))
    own = [0] * graph.vertex_count
    for v, i in owner.items():
        if not 0 <= v < graph.vertex_count:
            raise GameError(OWNERSHIP_GAP, f"owner given for unknown vertex {v}")
        own[v] = i
    form = GameForm(graph, n, tuple(own), None if initial is None else int(initial), mode)
    prefs = tuple(tuple(parse_outcome(str(o), mode, form.q) for o in order) for order in prefs_raw)
    game = Game(form, prefs)
    labels = {k: data[k] for k in ("terminals", "interiors") if k in data}
    validate(game, labels=labels or None)
    return game
