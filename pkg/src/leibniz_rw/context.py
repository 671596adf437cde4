"""Contexts: elaboration from order-free declarations, inclusion, assets.

A context couples a sort graph, an operator signature, variables, an
ordered rewrite-rule list and labeled assets.  Declarations may appear
in any order in the source; elaboration runs in three phases (inclusions
and sorts, then operators and variables, then rules and assets in
textual order) so that only rule order is semantically significant.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Union

from . import exprs, lattice
from .arith import BUILTIN_OPS
from .errors import (
    ConflictError,
    DuplicateLabel,
    LeibnizError,
    RenameCollision,
    UnknownLabel,
    UnknownReference,
    UnknownSort,
)
from .rewrite import RewriteRule, validate_rule
from .sorts import EMPTY_GRAPH, SortDecl, SortGraph, SubsortDecl
from .terms import (
    App,
    ContextView,
    EMPTY_SIGNATURE,
    OperatorDecl,
    Signature,
    Term,
    VariableDecl,
    VarRef,
    make_term,
)

#: engine-known names that inclusion renamings must leave alone
RESERVED_SORTS = lattice.NUMERIC_SORTS | {lattice.BOOLEAN, lattice.FP64}
RESERVED_OP_NAMES = frozenset(BUILTIN_OPS) | {"true", "false"}

USE = "use"
EXTEND = "extend"
DERIVED = "derive-fp"


@dataclass(frozen=True)
class Equation:
    left: Term
    right: Term


Asset = Union[Term, Equation]


@dataclass(frozen=True)
class Renaming:
    sort_pairs: tuple[tuple[str, str], ...] = ()
    op_pairs: tuple[tuple[str, str], ...] = ()

    @staticmethod
    def of(sorts: Mapping[str, str] | None = None, ops: Mapping[str, str] | None = None) -> "Renaming":
        return Renaming(
            tuple(sorted((sorts or {}).items())),
            tuple(sorted((ops or {}).items())),
        )

    @property
    def sorts(self) -> dict[str, str]:
        return dict(self.sort_pairs)

    @property
    def ops(self) -> dict[str, str]:
        return dict(self.op_pairs)

    @property
    def is_empty(self) -> bool:
        return not self.sort_pairs and not self.op_pairs


EMPTY_RENAMING = Renaming()


@dataclass(frozen=True)
class InclusionRecord:
    document: str
    context: str
    mode: str  # use | extend | derive-fp
    renaming: Renaming

    @property
    def ref(self) -> str:
        return f"{self.document}/{self.context}"


@dataclass(frozen=True, eq=True)
class Context:
    name: str
    graph: SortGraph
    signature: Signature
    variables: dict[str, str]
    rules: tuple[RewriteRule, ...]
    assets: dict[str, Asset]
    provenance: tuple[InclusionRecord, ...]
    # own declarations (what this context adds over its inclusions);
    # this is exactly what the machine view serializes
    own_sorts: frozenset[str]
    own_edges: frozenset[tuple[str, str]]
    own_ops: frozenset[OperatorDecl]
    own_vars: frozenset[VariableDecl]
    own_rules: tuple[RewriteRule, ...]
    own_asset_labels: frozenset[str]

    __hash__ = None  # dict-valued fields; contexts are compared, never hashed

    def lookup_asset(self, label: str) -> Asset:
        try:
            return self.assets[label]
        except KeyError:
            raise UnknownLabel(f"context {self.name} has no asset labeled {label!r}") from None

    @property
    def is_derived(self) -> bool:
        return any(r.mode == DERIVED for r in self.provenance)


def lookup_asset(ctx: Context, label: str) -> Asset:
    return ctx.lookup_asset(label)


# ---------------------------------------------------------------------------
# declarations as elaboration input


@dataclass(frozen=True)
class Decl:
    kind: str  # use extend sort op var rule term equation
    body: str
    line: int = 0
    col: int = 0


CONTEXT_DECL_KINDS = ("use", "extend", "sort", "op", "var", "rule", "term", "equation")


class ContextBuilder:
    """Mutable accumulation during elaboration; freeze() yields a Context."""

    def __init__(self, name: str, document: str = ""):
        self.name = name
        self.document = document
        self.graph = EMPTY_GRAPH
        self.signature = EMPTY_SIGNATURE
        self.variables: dict[str, str] = {}
        self.rules: list[RewriteRule] = []
        self.assets: dict[str, Asset] = {}
        self.provenance: list[InclusionRecord] = []
        self.own_sorts: set[str] = set()
        self.own_edges: set[tuple[str, str]] = set()
        self.own_ops: set[OperatorDecl] = set()
        self.own_vars: set[VariableDecl] = set()
        self.own_rules: list[RewriteRule] = []
        self.own_asset_labels: set[str] = set()
        # names this context will declare itself; declarations are
        # order-free, so rename targets must avoid them even though
        # inclusions are processed first
        self.pending_names: set[str] = set()

    # -- inclusion ---------------------------------------------------------

    def include(self, source: Context, mode: str, renaming: Renaming, document: str, context: str) -> None:
        for record in self.provenance:
            if (record.document, record.context) == (document, context):
                if record.renaming != renaming:
                    raise RenameCollision(
                        f"{document}/{context} is included twice with different renamings"
                    )
                if record.mode != mode:
                    raise ConflictError(
                        f"{document}/{context} is included both with use and with extend"
                    )
                return  # diamond: same source, same renaming — merge silently
        _validate_renaming(source, renaming)
        for target in [t for _, t in renaming.sort_pairs]:
            if self.graph.has(target) or target in self.pending_names:
                raise RenameCollision(f"rename target sort {target!r} collides with an existing name")
        for target in [t for _, t in renaming.op_pairs]:
            if self.signature.has_name(target) or target in self.pending_names:
                raise RenameCollision(f"rename target operator {target!r} collides with an existing name")

        graph, signature, variables, rules, assets = _rename_parts(source, renaming)
        self.graph = self.graph.merged(graph)
        self.signature = _merge_signatures(self.signature, signature, self.graph)
        for rule in rules:
            if rule not in self.rules:  # two paths to one rule merge silently
                self.rules.append(rule)
        if mode == EXTEND:
            for name, sort in variables.items():
                self._add_variable(name, sort)
            for label, value in assets.items():
                if label in self.assets:
                    if self.assets[label] == value:
                        continue
                    raise DuplicateLabel(f"asset label {label!r} already bound to a different value")
                self.assets[label] = value
        self.provenance.append(InclusionRecord(document, context, mode, renaming))

    # -- own declarations ----------------------------------------------------

    def resolve_sort(self, name: str) -> str:
        """Existing name wins; then an ASCII alias of an existing builtin name."""
        if self.graph.has(name):
            return name
        alias = lattice.ASCII_SORT_ALIASES.get(name)
        if alias is not None and self.graph.has(alias):
            return alias
        return name

    def add_sort(self, name: str) -> None:
        name = self.resolve_sort(name)
        if not self.graph.has(name):
            self.graph = self.graph.merged(SortGraph(frozenset({name}), frozenset()))
        self.own_sorts.add(name)

    def add_edge(self, lesser: str, greater: str) -> None:
        lesser, greater = self.resolve_sort(lesser), self.resolve_sort(greater)
        edge_graph = SortGraph(frozenset({lesser, greater}), frozenset({(lesser, greater)}))
        self.graph = self.graph.merged(edge_graph)
        self.own_edges.add((lesser, greater))

    def add_op(self, decl: OperatorDecl) -> None:
        decl = OperatorDecl(
            decl.name,
            decl.fixity,
            tuple(self.resolve_sort(s) for s in decl.arg_sorts),
            self.resolve_sort(decl.result_sort),
        )
        self.signature = _merge_signatures(self.signature, Signature(frozenset({decl})), self.graph)
        self.own_ops.add(decl)

    def _add_variable(self, name: str, sort: str) -> None:
        existing = self.variables.get(name)
        if existing is not None and existing != sort:
            raise ConflictError(f"variable {name} declared with sorts {existing} and {sort}")
        self.variables[name] = sort

    def add_var(self, name: str, sort: str) -> None:
        sort = self.resolve_sort(sort)
        self.graph.require(sort)
        self._add_variable(name, sort)
        self.own_vars.add(VariableDecl(name, sort))

    def add_rule(self, rule: RewriteRule) -> None:
        validate_rule(rule, self.view)
        self.rules.append(rule)
        self.own_rules.append(rule)

    def add_asset(self, label: str, value: Asset) -> None:
        if label in self.assets:
            raise DuplicateLabel(f"asset label {label!r} is already taken")
        if isinstance(value, Equation):
            lk = self.graph.kind_of(value.left.sort)
            rk = self.graph.kind_of(value.right.sort)
            if lk != rk:
                raise ConflictError(f"equation sides live in different kinds ({lk} vs {rk})")
        self.assets[label] = value
        self.own_asset_labels.add(label)

    def check_variables(self) -> None:
        for name in self.variables:
            if self.signature.nullary(name) is not None:
                raise ConflictError(f"{name} is both a variable and a nullary operator")

    @property
    def view(self) -> ContextView:
        return ContextView(self.graph, self.signature, self.variables)

    def freeze(self) -> Context:
        self.signature.check_preregular(self.graph)
        self.check_variables()
        return Context(
            name=self.name,
            graph=self.graph,
            signature=self.signature,
            variables=dict(self.variables),
            rules=tuple(self.rules),
            assets=dict(self.assets),
            provenance=tuple(self.provenance),
            own_sorts=frozenset(self.own_sorts),
            own_edges=frozenset(self.own_edges),
            own_ops=frozenset(self.own_ops),
            own_vars=frozenset(self.own_vars),
            own_rules=tuple(self.own_rules),
            own_asset_labels=frozenset(self.own_asset_labels),
        )


Resolver = Callable[[str], Context]


def elaborate_context(
    name: str,
    decls: list[Decl],
    resolver: Resolver,
    document: str = "",
) -> Context:
    """Three-phase elaboration; see module docstring.

    Any error is re-raised with the source position of the declaration
    that caused it.
    """
    builder = ContextBuilder(name, document)
    builder.pending_names = _declared_names(decls)

    # phase 1: inclusions (in textual order), then sorts (order-free)
    for d in decls:
        if d.kind in (USE, EXTEND):
            with _positioned(d):
                ref, pair_texts = _parse_inclusion_body(d.body)
                source = _resolve(resolver, ref)
                renaming = _resolve_renaming(source, pair_texts)
                doc_name, ctx_name = _split_ref(ref, document)
                builder.include(source, d.kind, renaming, doc_name, ctx_name)
    for d in decls:
        if d.kind == "sort":
            with _positioned(d):
                parsed = exprs.parse_sort_decl(d.body)
                if isinstance(parsed, SortDecl):
                    builder.add_sort(parsed.name)
                else:
                    builder.add_edge(parsed.lesser, parsed.greater)

    # phase 2: operators, then variables (order-free)
    for d in decls:
        if d.kind == "op":
            with _positioned(d):
                syntax = exprs.parse_op_decl(d.body)
                builder.add_op(
                    OperatorDecl(syntax.name, syntax.fixity, syntax.arg_sorts, syntax.result_sort)
                )
    builder.signature.check_preregular(builder.graph)
    for d in decls:
        if d.kind == "var":
            with _positioned(d):
                var_name, sort = exprs.parse_var_decl(d.body)
                builder.add_var(var_name, sort)
    builder.check_variables()

    # phase 3: rules and assets in textual order
    for d in decls:
        if d.kind == "rule":
            with _positioned(d):
                pattern, replacement = exprs.parse_rule_text(d.body, builder.view)
                builder.add_rule(RewriteRule(pattern, replacement))
        elif d.kind == "term":
            with _positioned(d):
                label, term = exprs.parse_term_asset(d.body, builder.view)
                builder.add_asset(label, term)
        elif d.kind == "equation":
            with _positioned(d):
                label, left, right = exprs.parse_equation_asset(d.body, builder.view)
                builder.add_asset(label, Equation(left, right))

    return builder.freeze()


def _declared_names(decls: list[Decl]) -> set[str]:
    names: set[str] = set()
    for d in decls:
        try:
            if d.kind == "sort":
                parsed = exprs.parse_sort_decl(d.body)
                if isinstance(parsed, SortDecl):
                    names.add(parsed.name)
                else:
                    names.update({parsed.lesser, parsed.greater})
            elif d.kind == "op":
                names.add(exprs.parse_op_decl(d.body).name)
            elif d.kind == "var":
                names.add(exprs.parse_var_decl(d.body)[0])
        except LeibnizError:
            pass  # the phase that owns the declaration reports the error
    return names


class _positioned:
    """Re-base body-relative error positions onto the document."""

    def __init__(self, decl: Decl):
        self.decl = decl

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if isinstance(exc, LeibnizError):
            d = self.decl
            if exc.line is None:
                exc.line, exc.col = d.line, d.col
            else:
                exc.col = exc.col + d.col - 1 if exc.line == 1 else exc.col
                exc.line = d.line + exc.line - 1
        return False


def _resolve(resolver: Resolver, ref: str) -> Context:
    try:
        return resolver(ref)
    except KeyError:
        raise UnknownReference(f"unknown context reference {ref!r}") from None


def _split_ref(ref: str, own_document: str) -> tuple[str, str]:
    if "/" in ref:
        doc, ctx = ref.split("/", 1)
        return doc, ctx
    return own_document, ref


def _parse_inclusion_body(body: str) -> tuple[str, list[str]]:
    parts = body.split("|", 1)
    ref = parts[0].strip()
    if not ref:
        raise UnknownReference("empty context reference")
    if len(parts) == 1:
        return ref, []
    tail = parts[1].strip()
    if not tail.startswith("rename:"):
        raise ConflictError(f"expected 'rename:' after '|', found {tail!r}")
    pair_texts = [p.strip() for p in tail[len("rename:") :].split(",") if p.strip()]
    return ref, pair_texts


def _resolve_renaming(source: Context, pair_texts: list[str]) -> Renaming:
    """Pair syntax `from→to`; names may themselves contain `→`, so the
    split point is chosen as the longest prefix naming something in the
    source context."""
    sorts: dict[str, str] = {}
    ops: dict[str, str] = {}
    for text in pair_texts:
        text = text.replace("->", "→")
        positions = [i for i, c in enumerate(text) if c == "→"]
        if not positions:
            raise RenameCollision(f"malformed rename pair {text!r}")
        chosen = None
        for i in reversed(positions):  # longest from-name first
            candidate = text[:i].strip()
            if _named_in(source, candidate) or _named_in(source, lattice.ASCII_SORT_ALIASES.get(candidate, candidate)):
                chosen = (candidate, text[i + 1 :].strip())
                break
        if chosen is None:
            raise RenameCollision(f"rename source {text!r} names nothing in context {source.name}")
        frm, to = chosen
        frm = frm if _named_in(source, frm) else lattice.ASCII_SORT_ALIASES.get(frm, frm)
        if not to:
            raise RenameCollision(f"malformed rename pair {text!r}")
        if source.graph.has(frm):
            sorts[frm] = to
        if source.signature.has_name(frm):
            ops[frm] = to
    return Renaming.of(sorts, ops)


def _named_in(source: Context, name: str) -> bool:
    return source.graph.has(name) or source.signature.has_name(name)


def _validate_renaming(source: Context, renaming: Renaming) -> None:
    for frm, _ in renaming.sort_pairs:
        if not source.graph.has(frm):
            raise UnknownSort(f"rename source sort {frm!r} not in context {source.name}")
        if frm in RESERVED_SORTS:
            raise RenameCollision(f"builtin sort {frm!r} cannot be renamed")
    for frm, _ in renaming.op_pairs:
        if not source.signature.has_name(frm):
            raise RenameCollision(f"rename source operator {frm!r} not in context {source.name}")
        if frm in RESERVED_OP_NAMES:
            raise RenameCollision(f"builtin operator {frm!r} cannot be renamed")
    for label, pairs in (("sort", renaming.sort_pairs), ("operator", renaming.op_pairs)):
        targets = [t for _, t in pairs]
        if len(set(targets)) != len(targets):
            raise RenameCollision(f"two {label}s renamed to the same name")
        domain = {f for f, _ in pairs}
        names = source.graph.sorts if label == "sort" else frozenset(d.name for d in source.signature.decls)
        for t in targets:
            if t in names and t not in domain:
                raise RenameCollision(
                    f"rename target {label} {t!r} collides with an unrenamed name of {source.name}"
                )


def _merge_signatures(a: Signature, b: Signature, graph: SortGraph) -> Signature:
    """Set union with conflict detection; preregularity is checked once
    after elaboration so that declaration order cannot matter."""
    decls = set(a.decls)
    for d in sorted(b.decls, key=lambda d: (d.name, d.fixity.value, d.arg_sorts, d.result_sort)):
        for s in (*d.arg_sorts, d.result_sort):
            graph.require(s)
        for other in decls:
            if other.group_key == d.group_key and other.arg_sorts == d.arg_sorts and other.result_sort != d.result_sort:
                raise ConflictError(
                    f"operator {d.name} declared with results {other.result_sort} and {d.result_sort} "
                    f"for the same arguments"
                )
        decls.add(d)
    return Signature(frozenset(decls))


def _rename_parts(source: Context, renaming: Renaming):
    if renaming.is_empty:
        return source.graph, source.signature, dict(source.variables), list(source.rules), dict(source.assets)
    sort_map, op_map = renaming.sorts, renaming.ops
    graph = source.graph.renamed(sort_map)
    signature = source.signature.renamed(op_map, sort_map)
    view = ContextView(graph, signature, {})
    variables = {name: sort_map.get(s, s) for name, s in source.variables.items()}

    def rename_term(t: Term) -> Term:
        if isinstance(t, VarRef):
            return VarRef(t.name, sort_map.get(t.sort, t.sort))
        if isinstance(t, App):
            return make_term(view, op_map.get(t.op, t.op), t.fixity, tuple(rename_term(a) for a in t.args))
        return t

    rules = [RewriteRule(rename_term(r.pattern), rename_term(r.replacement)) for r in source.rules]
    assets: dict[str, Asset] = {}
    for label, value in source.assets.items():
        if isinstance(value, Equation):
            assets[label] = Equation(rename_term(value.left), rename_term(value.right))
        else:
            assets[label] = rename_term(value)
    return graph, signature, variables, rules, assets


def include_context(
    builder: ContextBuilder,
    source: Context,
    mode: str,
    renaming: Renaming = EMPTY_RENAMING,
    document: str = "",
    context: str | None = None,
) -> ContextBuilder:
    builder.include(source, mode, renaming, document or source.name, context or source.name)
    return builder
