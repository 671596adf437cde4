"""Operator signatures and term construction with order-sorted inference.

A term whose arguments fit a declaration only at the kind level (same
connected component, wrong subsort) is still built, but its inferred slot
holds a Kind instead of a sort name: the error flag.  Kind mismatches
reject the term outright.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Mapping, Sequence, Union

from . import lattice
from .errors import ConflictError, KindMismatch, NoSuchOperator, PreregularityError, UnknownSort
from .sorts import Kind, SortGraph, SortName, SortOrKind


class Fixity(Enum):
    PREFIX = "prefix"
    INFIX = "infix"
    BRACKET = "bracket"
    SUBSCRIPT = "subscript"
    SUPERSCRIPT = "superscript"

    def __repr__(self) -> str:
        return f"Fixity.{self.name}"


#: fixities whose declarations take exactly two arguments
BINARY_FIXITIES = frozenset({Fixity.INFIX, Fixity.BRACKET, Fixity.SUBSCRIPT, Fixity.SUPERSCRIPT})

BRACKET_OP = "[]"
SUBSCRIPT_OP = "_"
SUPERSCRIPT_OP = "^"


@dataclass(frozen=True)
class OperatorDecl:
    name: str
    fixity: Fixity
    arg_sorts: tuple[SortName, ...]
    result_sort: SortName

    def __post_init__(self):
        if self.fixity in BINARY_FIXITIES and len(self.arg_sorts) != 2:
            raise ConflictError(f"{self.fixity.value} operator {self.name} must take exactly 2 arguments")

    @property
    def arity(self) -> int:
        return len(self.arg_sorts)

    @property
    def group_key(self) -> tuple[str, Fixity, int]:
        return (self.name, self.fixity, self.arity)


@dataclass(frozen=True)
class VariableDecl:
    name: str
    sort: SortName


# ---------------------------------------------------------------------------
# terms


class Term:
    """Base class; concrete nodes are frozen dataclasses below."""

    sort: SortOrKind

    @property
    def is_flagged(self) -> bool:
        return isinstance(self.sort, Kind)


@dataclass(frozen=True)
class RationalTerm(Term):
    value: Fraction
    sort: SortName

    def __str__(self) -> str:
        return str(self.value)


@dataclass(frozen=True)
class FP64Term(Term):
    bits: int
    sort: SortName = lattice.FP64


@dataclass(frozen=True)
class VarRef(Term):
    name: str
    sort: SortName


@dataclass(frozen=True)
class App(Term):
    op: str
    fixity: Fixity
    args: tuple[Term, ...]
    sort: SortOrKind


def rational_term(value: Fraction | int, graph: SortGraph | None = None) -> RationalTerm:
    """Exact rational literal; its sort is fixed by the value.

    When a graph is given, checks that the lattice sort actually exists
    there (contexts that never pull in builtins/numbers cannot hold
    number literals).
    """
    value = Fraction(value)
    sort = lattice.literal_sort(value)
    if graph is not None and not graph.has(sort):
        raise UnknownSort(f"number literal {value} needs sort {sort}, absent from this context")
    return RationalTerm(value, sort)


_NAN_BITS = 0x7FF8000000000000


def fp64_term(bits: int, graph: SortGraph | None = None) -> FP64Term:
    """Binary64 literal from a raw bit pattern; NaNs collapse to one quiet NaN."""
    if bits & 0x7FF0000000000000 == 0x7FF0000000000000 and bits & 0x000FFFFFFFFFFFFF:
        bits = _NAN_BITS
    if graph is not None and not graph.has(lattice.FP64):
        raise UnknownSort("binary64 literal needs sort FP64, absent from this context")
    return FP64Term(bits)


# ---------------------------------------------------------------------------
# signatures


@dataclass(frozen=True)
class Signature:
    decls: frozenset[OperatorDecl] = frozenset()

    @cached_property
    def _groups(self) -> dict[tuple[str, Fixity, int], tuple[OperatorDecl, ...]]:
        groups: dict[tuple[str, Fixity, int], list[OperatorDecl]] = {}
        for d in self.decls:
            groups.setdefault(d.group_key, []).append(d)
        return {k: tuple(sorted(v, key=lambda d: (d.arg_sorts, d.result_sort))) for k, v in groups.items()}

    @cached_property
    def _names(self) -> frozenset[str]:
        return frozenset(d.name for d in self.decls)

    def group(self, name: str, fixity: Fixity, arity: int) -> tuple[OperatorDecl, ...]:
        return self._groups.get((name, fixity, arity), ())

    def has_name(self, name: str) -> bool:
        return name in self._names

    def nullary(self, name: str) -> OperatorDecl | None:
        g = self.group(name, Fixity.PREFIX, 0)
        return g[0] if g else None

    def with_decl(self, d: OperatorDecl, graph: SortGraph) -> "Signature":
        """Add one declaration; identical repeats are a no-op.

        Checks sorts exist, rejects a second result sort for the same
        argument profile, and re-checks preregularity of the group.
        """
        if d in self.decls:
            return self
        for s in (*d.arg_sorts, d.result_sort):
            graph.require(s)
        for other in self.group(*d.group_key):
            if other.arg_sorts == d.arg_sorts:
                raise ConflictError(
                    f"operator {d.name} already declared with result {other.result_sort}, "
                    f"conflicting result {d.result_sort}"
                )
        sig = Signature(self.decls | {d})
        sig.check_group(d.group_key, graph)
        return sig

    def merged(self, other: "Signature", graph: SortGraph) -> "Signature":
        sig = self
        for d in sorted(other.decls, key=lambda d: (d.name, d.fixity.value, d.arg_sorts, d.result_sort)):
            sig = sig.with_decl(d, graph)
        return sig

    def renamed(self, op_map: Mapping[str, str], sort_map: Mapping[str, str]) -> "Signature":
        rs = lambda s: sort_map.get(s, s)
        return Signature(
            frozenset(
                OperatorDecl(op_map.get(d.name, d.name), d.fixity, tuple(rs(a) for a in d.arg_sorts), rs(d.result_sort))
                for d in self.decls
            )
        )

    def check_group(self, key: tuple[str, Fixity, int], graph: SortGraph) -> None:
        """Preregularity of one overload group.

        Within each kind profile every applicable set of declarations
        must yield a unique least result sort, and all declarations of
        one kind profile must agree on the result kind (otherwise the
        error flag of a kind-level term would be ambiguous).
        """
        decls = self.group(*key)
        if not decls or key[2] == 0:
            return
        by_profile: dict[tuple[Kind, ...], list[OperatorDecl]] = {}
        for d in decls:
            profile = tuple(graph.kind_of(s) for s in d.arg_sorts)
            by_profile.setdefault(profile, []).append(d)
        name = key[0]
        for profile, ds in by_profile.items():
            result_kinds = {graph.kind_of(d.result_sort) for d in ds}
            if len(result_kinds) > 1:
                raise PreregularityError(
                    f"operator {name}: declarations with the same argument kinds "
                    f"produce results in different kinds"
                )
            candidates = [
                sorted(set().union(*(graph.at_or_below(d.arg_sorts[i]) for d in ds)))
                for i in range(key[2])
            ]
            for args in _product(candidates):
                applicable = [
                    d for d in ds
                    if all(graph.is_subsort(a, s) for a, s in zip(args, d.arg_sorts))
                ]
                if not applicable:
                    continue
                results = {d.result_sort for d in applicable}
                least = [r for r in results if all(graph.is_subsort(r, o) for o in results)]
                if len(least) != 1:
                    raise PreregularityError(
                        f"operator {name} has no unique least result sort for arguments "
                        f"({', '.join(args)}); candidates: {', '.join(sorted(results))}"
                    )

    def check_preregular(self, graph: SortGraph) -> None:
        for key in self._groups:
            self.check_group(key, graph)


EMPTY_SIGNATURE = Signature()


def _product(pools: Sequence[Sequence[str]]):
    if not pools:
        yield ()
        return
    for head in pools[0]:
        for rest in _product(pools[1:]):
            yield (head, *rest)


def declare_operator(sig: Signature, graph: SortGraph, d: OperatorDecl) -> Signature:
    return sig.with_decl(d, graph)


# ---------------------------------------------------------------------------
# inference


def infer_sort(
    sig: Signature,
    graph: SortGraph,
    name: str,
    fixity: Fixity,
    arg_sorts: Sequence[SortOrKind],
) -> SortOrKind:
    """Resolve one application.

    Proper-sort arguments fitting some declaration give the unique least
    result sort.  Arguments that only align at the kind level give the
    result kind (error flag).  Arguments whose kinds fit no declaration
    reject the term.
    """
    group = sig.group(name, fixity, len(arg_sorts))
    if not group:
        raise NoSuchOperator(f"no operator {name!r} ({fixity.value}) taking {len(arg_sorts)} arguments")
    arg_kinds = tuple(graph.kind_of(s) for s in arg_sorts)
    aligned = [
        d for d in group
        if tuple(graph.kind_of(s) for s in d.arg_sorts) == arg_kinds
    ]
    if not aligned:
        raise KindMismatch(
            f"operator {name}: argument kinds ({', '.join(str(k) for k in arg_kinds)}) "
            f"fit no declaration"
        )
    if all(isinstance(s, str) for s in arg_sorts):
        applicable = [
            d for d in aligned
            if all(graph.is_subsort(a, s) for a, s in zip(arg_sorts, d.arg_sorts))
        ]
        if applicable:
            results = {d.result_sort for d in applicable}
            least = [r for r in results if all(graph.is_subsort(r, o) for o in results)]
            if len(least) != 1:  # elaboration checked preregularity; be loud anyway
                raise PreregularityError(f"ambiguous least result sort for {name}")
            return least[0]
    return graph.kind_of(aligned[0].result_sort)


@dataclass(frozen=True)
class ContextView:
    """What term construction needs to know about a context."""

    graph: SortGraph
    signature: Signature
    variables: Mapping[str, SortName] = field(default_factory=dict)


def make_term(view: ContextView, name: str, fixity: Fixity, args: Iterable[Term]) -> App:
    args = tuple(args)
    sort = infer_sort(view.signature, view.graph, name, fixity, [a.sort for a in args])
    return App(name, fixity, args, sort)
