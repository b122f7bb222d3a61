"""Finite digraphs, strongly connected components and related surgery.

Vertices are the integers ``0 .. vertex_count - 1``.  A vertex is terminal
exactly when it has no outgoing edge; terminality is never stored.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Iterable, Mapping, Sequence


class GraphError(ValueError):
    """Raised for structurally invalid digraph inputs."""


class SccClass(str, Enum):
    TERMINAL = "terminal"
    INTERIOR = "interior"
    TRANSIENT = "transient"


@dataclass(frozen=True)
class Digraph:
    vertex_count: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.vertex_count < 1:
            raise GraphError("a digraph needs at least one vertex")
        edges = frozenset((int(u), int(v)) for u, v in self.edges)
        for u, v in edges:
            if not (0 <= u < self.vertex_count and 0 <= v < self.vertex_count):
                raise GraphError(f"edge {u}->{v} out of range")
        object.__setattr__(self, "edges", edges)

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], vertex_count: int | None = None) -> Digraph:
        edges = list(edges)
        if vertex_count is None:
            vertex_count = 1 + max((max(e) for e in edges), default=0)
        return cls(vertex_count, frozenset(edges))

    @classmethod
    def from_successors(cls, succ: Sequence[Iterable[int]]) -> Digraph:
        return cls(len(succ), frozenset((u, v) for u, vs in enumerate(succ) for v in vs))

    @cached_property
    def succ(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for u, v in self.edges:
            out[u].append(v)
        return tuple(tuple(sorted(vs)) for vs in out)

    @cached_property
    def pred(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for u, v in self.edges:
            out[v].append(u)
        return tuple(tuple(sorted(vs)) for vs in out)

    @property
    def vertices(self) -> range:
        return range(self.vertex_count)

    @cached_property
    def terminals(self) -> tuple[int, ...]:
        return tuple(v for v in self.vertices if not self.succ[v])

    @cached_property
    def nonterminals(self) -> tuple[int, ...]:
        return tuple(v for v in self.vertices if self.succ[v])

    def is_terminal(self, v: int) -> bool:
        return not self.succ[v]

    def out_degree(self, v: int) -> int:
        return len(self.succ[v])

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def is_acyclic(self) -> bool:
        return topological_order(self) is not None

    def reachable_from(self, start: int) -> frozenset[int]:
        seen = {start}
        stack = [start]
        while stack:
            u = stack.pop()
            for v in self.succ[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return frozenset(seen)

    def induced(self, keep: Iterable[int]) -> tuple[Digraph, dict[int, int]]:
        """Subgraph on ``keep`` renumbered in increasing vertex order."""
        keep = sorted(set(keep))
        index = {v: i for i, v in enumerate(keep)}
        edges = {(index[u], index[v]) for u, v in self.edges if u in index and v in index}
        return Digraph(len(keep), frozenset(edges)), index


@dataclass(frozen=True)
class SccPartition:
    component_of: tuple[int, ...]
    components: tuple[frozenset[int], ...]
    scc_class: tuple[SccClass, ...]
    condensation: Digraph

    def ids_of(self, cls: SccClass) -> tuple[int, ...]:
        return tuple(c for c, k in enumerate(self.scc_class) if k is cls)

    @property
    def terminal_ids(self) -> tuple[int, ...]:
        return self.ids_of(SccClass.TERMINAL)

    @property
    def interior_ids(self) -> tuple[int, ...]:
        return self.ids_of(SccClass.INTERIOR)


def topological_order(g: Digraph) -> list[int] | None:
    """Kahn's algorithm; ``None`` when ``g`` has a cycle (self-loops included)."""
    indeg = [0] * g.vertex_count
    for _, v in g.edges:
        indeg[v] += 1
    ready = [v for v in g.vertices if indeg[v] == 0]
    order = []
    while ready:
        u = ready.pop()
        order.append(u)
        for v in g.succ[u]:
            indeg[v] -= 1
            if indeg[v] == 0:
                ready.append(v)
    return order if len(order) == g.vertex_count else None


def _tarjan(g: Digraph) -> list[list[int]]:
    # iterative, so deep chains do not hit the recursion limit
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    result: list[list[int]] = []
    counter = 0
    for root in g.vertices:
        if root in index:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack.add(v)
            succ = g.succ[v]
            recurse = False
            while i < len(succ):
                w = succ[i]
                i += 1
                if w not in index:
                    work.append((v, i))
                    work.append((w, 0))
                    recurse = True
                    break
                if w in on_stack:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == v:
                        break
                result.append(comp)
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
    return result


def scc_decompose(g: Digraph) -> SccPartition:
    """Partition ``g`` into SCCs, numbered by smallest member vertex."""
    comps = sorted((frozenset(c) for c in _tarjan(g)), key=min)
    component_of = [0] * g.vertex_count
    for cid, comp in enumerate(comps):
        for v in comp:
            component_of[v] = cid
    cond_edges = set()
    has_cycle = [False] * len(comps)
    for u, v in g.edges:
        cu, cv = component_of[u], component_of[v]
        if cu != cv:
            cond_edges.add((cu, cv))
        else:
            has_cycle[cu] = True
    exits = {cu for cu, _ in cond_edges}
    classes = []
    for cid in range(len(comps)):
        if cid not in exits:
            classes.append(SccClass.TERMINAL)
        elif has_cycle[cid]:
            classes.append(SccClass.INTERIOR)
        else:
            classes.append(SccClass.TRANSIENT)
    return SccPartition(
        component_of=tuple(component_of),
        components=tuple(comps),
        scc_class=tuple(classes),
        condensation=Digraph(len(comps), frozenset(cond_edges)),
    )


def is_bidirected(g: Digraph) -> bool:
    """Every move between two non-terminal vertices is reversible."""
    for u, v in g.edges:
        if g.succ[u] and g.succ[v] and (v, u) not in g.edges:
            return False
    return True


def contract_terminal_sccs(g: Digraph) -> tuple[Digraph, tuple[int, ...]]:
    """Collapse every terminal SCC to a single sink.

    New ids are handed out in order of first occurrence, so the relative order
    of components by smallest member is preserved.
    """
    part = scc_decompose(g)
    terminal = set(part.terminal_ids)
    vertex_map: list[int] = [0] * g.vertex_count
    assigned: dict[int, int] = {}
    next_id = 0
    for v in g.vertices:
        cid = part.component_of[v]
        if cid in terminal:
            if cid not in assigned:
                assigned[cid] = next_id
                next_id += 1
            vertex_map[v] = assigned[cid]
        else:
            vertex_map[v] = next_id
            next_id += 1
    edges = set()
    for u, v in g.edges:
        if part.component_of[u] in terminal:
            continue
        edges.add((vertex_map[u], vertex_map[v]))
    return Digraph(next_id, frozenset(edges)), tuple(vertex_map)


@dataclass(frozen=True)
class Substitute:
    """A strongly connected digraph standing in for one base vertex."""

    graph: Digraph
    entry: int = 0
    exits: frozenset[int] | None = None  # None means every vertex


def inflation_map(base: Digraph, subs: Mapping[int, Substitute]) -> dict[int, tuple[int, ...]]:
    blocks: dict[int, tuple[int, ...]] = {}
    next_id = 0
    for v in base.vertices:
        size = subs[v].graph.vertex_count if v in subs else 1
        blocks[v] = tuple(range(next_id, next_id + size))
        next_id += size
    return blocks


def inflate(base: Digraph, subs: Mapping[int, Substitute]) -> Digraph:
    """Replace non-terminal vertices of an acyclic ``base`` by strongly connected pieces.

    Edges into a substituted vertex land on its entry vertex; each edge out of
    it is replicated from every vertex of the exit set.
    """
    if not base.is_acyclic():
        raise GraphError("inflate needs an acyclic base digraph")
    for v, sub in subs.items():
        if base.is_terminal(v):
            raise GraphError(f"cannot substitute terminal vertex {v}")
        part = scc_decompose(sub.graph)
        if len(part.components) != 1 or not sub.graph.edges:
            raise GraphError(f"substitute for {v} must be strongly connected with a cycle")
        if not 0 <= sub.entry < sub.graph.vertex_count:
            raise GraphError(f"entry of substitute for {v} out of range")
        if sub.exits is not None and (
            not sub.exits or any(not 0 <= x < sub.graph.vertex_count for x in sub.exits)
        ):
            raise GraphError(f"exit set of substitute for {v} must be a non-empty vertex subset")
    blocks = inflation_map(base, subs)
    edges: set[tuple[int, int]] = set()
    for v, sub in subs.items():
        off = blocks[v][0]
        edges.update((off + a, off + b) for a, b in sub.graph.edges)

    def entry(v: int) -> int:
        return blocks[v][subs[v].entry] if v in subs else blocks[v][0]

    def exits(v: int) -> Iterable[int]:
        if v not in subs:
            return blocks[v]
        ex = subs[v].exits
        return blocks[v] if ex is None else (blocks[v][x] for x in sorted(ex))

    for u, v in base.edges:
        target = entry(v)
        for x in exits(u):
            edges.add((x, target))
    return Digraph(sum(len(b) for b in blocks.values()), frozenset(edges))


def condensation_is_acyclic(part: SccPartition) -> bool:
    return part.condensation.is_acyclic()


def to_dot(
    g: Digraph,
    partition: SccPartition | None = None,
    *,
    labels: Mapping[int, str] | None = None,
    highlight: Iterable[tuple[int, int]] = (),
    edge_attrs: Mapping[tuple[int, int], str] | None = None,
    name: str = "G",
) -> str:
    """Graphviz source; SCCs become labelled clusters when a partition is given.

    ``edge_attrs`` maps an edge to a raw attribute string and wins over ``highlight``.
    """
    labels = labels or {}
    hot = set(highlight)
    edge_attrs = edge_attrs or {}
    lines = [f"digraph {name} {{"]

    def node(v: int) -> str:
        shape = "box" if g.is_terminal(v) else "circle"
        return f'  {v} [label="{labels.get(v, v)}", shape={shape}];'

    if partition is None:
        lines.extend(node(v) for v in g.vertices)
    else:
        for cid, comp in enumerate(partition.components):
            lines.append(f"  subgraph cluster_{cid} {{")
            lines.append(f'    label="{partition.scc_class[cid].value}";')
            lines.extend("  " + node(v) for v in sorted(comp))
            lines.append("  }")
    for u, v in g.sorted_edges():
        if (u, v) in edge_attrs:
            style = f" [{edge_attrs[(u, v)]}]"
        else:
            style = " [color=red, penwidth=2]" if (u, v) in hot else ""
        lines.append(f"  {u} -> {v}{style};")
    lines.append("}")
    return "\n".join(lines) + "\n"
