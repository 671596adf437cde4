"""Directed acyclic sort graph, subsort order, and its partition into kinds.

Sorts are plain strings compared by exact code-point equality.  A kind is
a connected component of the undirected sort graph; its canonical id is
the lexicographically least sort name in the component, which keeps ids
stable no matter in which order declarations were elaborated.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Union

from .errors import CycleError, UnknownSort

SortName = str


@dataclass(frozen=True)
class Kind:
    """Connected component of the sort graph, named by its least member."""

    name: str

    def __str__(self) -> str:
        return f"[{self.name}]"


SortOrKind = Union[SortName, Kind]


@dataclass(frozen=True)
class SortDecl:
    name: SortName


@dataclass(frozen=True)
class SubsortDecl:
    lesser: SortName
    greater: SortName


@dataclass(frozen=True)
class SortGraph:
    sorts: frozenset[SortName]
    edges: frozenset[tuple[SortName, SortName]]  # (lesser, greater)

    def __post_init__(self):
        for lo, hi in self.edges:
            if lo not in self.sorts or hi not in self.sorts:
                raise UnknownSort(f"subsort edge {lo} ⊆ {hi} mentions an undeclared sort")
        cycle = _find_cycle(self.sorts, self.edges)
        if cycle is not None:
            raise CycleError("subsort cycle: " + " ⊆ ".join(cycle + [cycle[0]]))

    @cached_property
    def _above(self) -> dict[SortName, frozenset[SortName]]:
        """Reflexive-transitive closure: sort -> all sorts ≥ it."""
        up: dict[SortName, set[SortName]] = {s: set() for s in self.sorts}
        for lo, hi in self.edges:
            up[lo].add(hi)
        closed: dict[SortName, frozenset[SortName]] = {}

        def close(s: SortName) -> frozenset[SortName]:
            if s in closed:
                return closed[s]
            acc = {s}
            for t in up[s]:
                acc |= close(t)
            closed[s] = frozenset(acc)
            return closed[s]

        for s in self.sorts:
            close(s)
        return closed

    @cached_property
    def _kind_of(self) -> dict[SortName, Kind]:
        neighbours: dict[SortName, set[SortName]] = {s: set() for s in self.sorts}
        for lo, hi in self.edges:
            neighbours[lo].add(hi)
            neighbours[hi].add(lo)
        assignment: dict[SortName, Kind] = {}
        for start in self.sorts:
            if start in assignment:
                continue
            component = {start}
            stack = [start]
            while stack:
                for n in neighbours[stack.pop()]:
                    if n not in component:
                        component.add(n)
                        stack.append(n)
            kind = Kind(min(component))
            for s in component:
                assignment[s] = kind
        return assignment

    @property
    def kinds(self) -> frozenset[Kind]:
        return frozenset(self._kind_of.values())

    def has(self, s: SortName) -> bool:
        return s in self.sorts

    def require(self, s: SortName) -> None:
        if s not in self.sorts:
            raise UnknownSort(f"unknown sort {s}")

    def is_subsort(self, a: SortName, b: SortName) -> bool:
        """True iff a == b or a chain of subsort edges leads from a to b."""
        self.require(a)
        self.require(b)
        return b in self._above[a]

    def kind_of(self, s: SortOrKind) -> Kind:
        if isinstance(s, Kind):
            return s
        self.require(s)
        return self._kind_of[s]

    def at_or_below(self, s: SortName) -> frozenset[SortName]:
        self.require(s)
        return frozenset(t for t in self.sorts if s in self._above[t])

    def kind_members(self, k: Kind) -> frozenset[SortName]:
        return frozenset(s for s, kk in self._kind_of.items() if kk == k)

    def merged(self, other: "SortGraph") -> "SortGraph":
        if other.sorts <= self.sorts and other.edges <= self.edges:
            return self
        return SortGraph(self.sorts | other.sorts, self.edges | other.edges)

    def renamed(self, mapping: dict[SortName, SortName]) -> "SortGraph":
        ren = lambda s: mapping.get(s, s)
        return SortGraph(
            frozenset(ren(s) for s in self.sorts),
            frozenset((ren(lo), ren(hi)) for lo, hi in self.edges),
        )


def build_sort_graph(decls: Iterable[SortDecl | SubsortDecl]) -> SortGraph:
    """Build a graph from declarations in any order.

    Duplicate declarations merge silently; a subsort declaration declares
    its endpoint sorts if they are new.  Raises CycleError if the subsort
    relation closes a loop.
    """
    sorts: set[SortName] = set()
    edges: set[tuple[SortName, SortName]] = set()
    for d in decls:
        if isinstance(d, SortDecl):
            sorts.add(d.name)
        else:
            sorts.add(d.lesser)
            sorts.add(d.greater)
            edges.add((d.lesser, d.greater))
    return SortGraph(frozenset(sorts), frozenset(edges))


def _find_cycle(
    sorts: frozenset[SortName], edges: frozenset[tuple[SortName, SortName]]
) -> list[SortName] | None:
    succ: dict[SortName, list[SortName]] = {s: [] for s in sorts}
    for lo, hi in edges:
        succ[lo].append(hi)
    WHITE, GREY, BLACK = 0, 1, 2
    colour = {s: WHITE for s in sorts}
    parent: dict[SortName, SortName] = {}

    for root in sorted(sorts):
        if colour[root] != WHITE:
            continue
        stack: list[tuple[SortName, int]] = [(root, 0)]
        colour[root] = GREY
        while stack:
            node, i = stack[-1]
            if i < len(succ[node]):
                stack[-1] = (node, i + 1)
                nxt = succ[node][i]
                if colour[nxt] == GREY:
                    # unwind the grey path from node back to nxt
                    cycle = [node]
                    while cycle[-1] != nxt:
                        cycle.append(parent[cycle[-1]])
                    cycle.reverse()
                    return cycle
                if colour[nxt] == WHITE:
                    colour[nxt] = GREY
                    parent[nxt] = node
                    stack.append((nxt, 0))
            else:
                colour[node] = BLACK
                stack.pop()
    return None


EMPTY_GRAPH = SortGraph(frozenset(), frozenset())
