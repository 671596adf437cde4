"""The builtin contexts: booleans, the number hierarchy, and binary64.

`builtins/boolean` carries the truth tables as ordinary rewrite rules;
`builtins/numbers` declares exact arithmetic over a twelve-sort lattice
whose evaluation is supplied by the engine (after user rules, see the
rewrite module); `builtins/fp64` does the same for IEEE 754-2008
binary64.  The three contexts are value-identical on every call.
"""

from __future__ import annotations

from functools import lru_cache

from . import lattice
from .context import Context, ContextBuilder, Renaming, USE
from .errors import UnknownReference
from .rewrite import RewriteRule
from .terms import App, Fixity, OperatorDecl, VarRef

BUILTINS_DOCUMENT = "builtins"

_B = lattice.BOOLEAN
_FP = lattice.FP64

#: sorts carrying diagonal `+`/`×` declarations (closed under the operation)
_ADDITIVE = (lattice.NAT_NZ, lattice.NAT, lattice.INT, lattice.RAT_P, lattice.RAT_NN,
             lattice.RAT, lattice.REAL_P, lattice.REAL_NN, lattice.REAL)


def _true() -> App:
    return App("true", Fixity.PREFIX, (), _B)


def _false() -> App:
    return App("false", Fixity.PREFIX, (), _B)


@lru_cache(maxsize=None)
def boolean_context() -> Context:
    b = ContextBuilder("boolean", BUILTINS_DOCUMENT)
    b.add_sort(_B)
    for decl in (
        OperatorDecl("true", Fixity.PREFIX, (), _B),
        OperatorDecl("false", Fixity.PREFIX, (), _B),
        OperatorDecl("∧", Fixity.INFIX, (_B, _B), _B),
        OperatorDecl("∨", Fixity.INFIX, (_B, _B), _B),
        OperatorDecl("¬", Fixity.PREFIX, (_B,), _B),
    ):
        b.add_op(decl)
    other = VarRef("B", _B)
    conj = lambda lhs: App("∧", Fixity.INFIX, (lhs, other), _B)
    disj = lambda lhs: App("∨", Fixity.INFIX, (lhs, other), _B)
    neg = lambda arg: App("¬", Fixity.PREFIX, (arg,), _B)
    for rule in (
        RewriteRule(conj(_true()), other),
        RewriteRule(conj(_false()), _false()),
        RewriteRule(disj(_true()), _true()),
        RewriteRule(disj(_false()), other),
        RewriteRule(neg(_true()), _false()),
        RewriteRule(neg(_false()), _true()),
    ):
        b.add_rule(rule)
    return b.freeze()


@lru_cache(maxsize=None)
def numbers_context() -> Context:
    b = ContextBuilder("numbers", BUILTINS_DOCUMENT)
    b.include(boolean_context(), USE, Renaming(), BUILTINS_DOCUMENT, "boolean")
    for s in sorted(lattice.NUMERIC_SORTS):
        b.add_sort(s)
    for lo, hi in sorted(lattice.NUMERIC_EDGES):
        b.add_edge(lo, hi)
    for s in _ADDITIVE:
        b.add_op(OperatorDecl("+", Fixity.INFIX, (s, s), s))
        b.add_op(OperatorDecl("×", Fixity.INFIX, (s, s), s))
    for s in (lattice.INT, lattice.RAT, lattice.REAL):
        b.add_op(OperatorDecl("−", Fixity.INFIX, (s, s), s))
    for args, result in (
        ((lattice.RAT, lattice.RAT_NZ), lattice.RAT),
        ((lattice.RAT_P, lattice.RAT_P), lattice.RAT_P),
        ((lattice.REAL, lattice.REAL_NZ), lattice.REAL),
        ((lattice.REAL_P, lattice.REAL_P), lattice.REAL_P),
    ):
        b.add_op(OperatorDecl("÷", Fixity.INFIX, args, result))
    for op in ("<", ">", "≤", "≥", "="):
        b.add_op(OperatorDecl(op, Fixity.INFIX, (lattice.RAT, lattice.RAT), _B))
        b.add_op(OperatorDecl(op, Fixity.INFIX, (lattice.REAL, lattice.REAL), _B))
    return b.freeze()


@lru_cache(maxsize=None)
def fp64_context() -> Context:
    b = ContextBuilder("fp64", BUILTINS_DOCUMENT)
    b.include(boolean_context(), USE, Renaming(), BUILTINS_DOCUMENT, "boolean")
    b.add_sort(_FP)
    for op in ("+", "−", "×", "÷"):
        b.add_op(OperatorDecl(op, Fixity.INFIX, (_FP, _FP), _FP))
    for op in ("<", ">", "≤", "≥", "="):
        b.add_op(OperatorDecl(op, Fixity.INFIX, (_FP, _FP), _B))
    return b.freeze()


def builtin_contexts() -> list[Context]:
    """All builtin contexts; deterministic and identical on every call."""
    return [boolean_context(), numbers_context(), fp64_context()]


def builtin_context(name: str) -> Context:
    for ctx in builtin_contexts():
        if ctx.name == name:
            return ctx
    raise UnknownReference(f"no builtin context named {name!r}")


def builtin_resolver(ref: str) -> Context:
    """Resolver for programs that import nothing beyond the builtins."""
    if ref.startswith(BUILTINS_DOCUMENT + "/"):
        return builtin_context(ref.split("/", 1)[1])
    raise UnknownReference(f"unknown context reference {ref!r}")
