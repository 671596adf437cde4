"""Mechanical lowering of a rational/real context to IEEE 754 binary64.

Every numeric-lattice sort maps to FP64, every rational literal is
rounded to the nearest binary64 value (ties to even), and every term
tree keeps its exact shape, so the order of arithmetic operations is
preserved.  Operators that *produce* numeric values must either be the
builtin arithmetic symbols or be defined by at least one rewrite rule;
an undefined numeric operator is a symbolic quantity with no binary64
meaning, and the derivation refuses it rather than silently skipping
anything.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import lattice
from .arith import BUILTIN_OPS, fp64_is_exact, round_to_fp64
from .context import Context, ContextBuilder, DERIVED, Equation, InclusionRecord, Renaming
from .errors import UnmappedOperator
from .rewrite import RewriteRule
from .terms import App, FP64Term, OperatorDecl, RationalTerm, Term, VarRef, make_term

DERIVED_SUFFIX = "-fp64"


@dataclass(frozen=True)
class LiteralConversion:
    where: str  # "rule 3", "asset pp1", ...
    value: Fraction
    bits: int
    exact: bool


@dataclass(frozen=True)
class DerivationReport:
    conversions: tuple[LiteralConversion, ...]

    @property
    def inexact(self) -> tuple[LiteralConversion, ...]:
        return tuple(c for c in self.conversions if not c.exact)


def derive_fp(ctx: Context) -> tuple[Context, DerivationReport]:
    """Derived context named `<name>-fp64`; see module docstring.

    The derived context is self-contained (its inclusions are flattened
    into own declarations) and carries a derivation record in its
    provenance.
    """
    numeric = ctx.graph.sorts & lattice.NUMERIC_SORTS
    sort_map = {s: lattice.FP64 for s in numeric}
    _check_total(ctx, numeric)

    builder = ContextBuilder(ctx.name + DERIVED_SUFFIX)
    for s in sorted(sort_map.get(s, s) for s in ctx.graph.sorts):
        builder.add_sort(s)
    for lo, hi in sorted(ctx.graph.edges):
        lo, hi = sort_map.get(lo, lo), sort_map.get(hi, hi)
        if lo != hi:
            builder.add_edge(lo, hi)
    for d in sorted(ctx.signature.decls, key=lambda d: (d.name, d.fixity.value, d.arg_sorts, d.result_sort)):
        builder.add_op(
            OperatorDecl(
                d.name,
                d.fixity,
                tuple(sort_map.get(s, s) for s in d.arg_sorts),
                sort_map.get(d.result_sort, d.result_sort),
            )
        )
    for name, sort in sorted(ctx.variables.items()):
        builder.add_var(name, sort_map.get(sort, sort))

    conversions: list[LiteralConversion] = []

    def map_term(t: Term, where: str) -> Term:
        if isinstance(t, RationalTerm):
            bits = round_to_fp64(t.value)
            conversions.append(LiteralConversion(where, t.value, bits, fp64_is_exact(t.value, bits)))
            return FP64Term(bits)
        if isinstance(t, VarRef):
            return VarRef(t.name, sort_map.get(t.sort, t.sort))
        if isinstance(t, App):
            return make_term(builder.view, t.op, t.fixity, tuple(map_term(a, where) for a in t.args))
        return t

    for i, rule in enumerate(ctx.rules):
        where = f"rule {i}"
        builder.add_rule(RewriteRule(map_term(rule.pattern, where), map_term(rule.replacement, where)))
    for label in sorted(ctx.assets):
        value = ctx.assets[label]
        where = f"asset {label}"
        if isinstance(value, Equation):
            builder.add_asset(label, Equation(map_term(value.left, where), map_term(value.right, where)))
        else:
            builder.add_asset(label, map_term(value, where))

    builder.provenance.append(InclusionRecord("", ctx.name, DERIVED, Renaming()))
    return builder.freeze(), DerivationReport(tuple(conversions))


def _check_total(ctx: Context, numeric: frozenset[str]) -> None:
    """Every operator with a numeric result must be computable in FP64."""
    defined = {(r.pattern.op, r.pattern.fixity) for r in ctx.rules if isinstance(r.pattern, App)}
    for d in sorted(ctx.signature.decls, key=lambda d: (d.name, d.fixity.value, d.arg_sorts)):
        if d.result_sort not in numeric:
            continue
        if d.name in BUILTIN_OPS:
            continue
        if (d.name, d.fixity) in defined:
            continue
        raise UnmappedOperator(
            f"operator {d.name!r} produces numeric values but has no binary64 "
            f"counterpart: it is neither builtin arithmetic nor defined by any rewrite rule",
            d.name,
        )
