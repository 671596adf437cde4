"""First-order matching, substitution, and deterministic normalization.

The strategy is leftmost-innermost: the first redex in post-order is
rewritten, user rules are tried in their textual order before builtin
arithmetic, and the whole run is recorded in a trace.  Identical inputs
always produce the identical trace.
"""

from __future__ import annotations

from dataclasses import dataclass

from .arith import builtin_step
from .errors import InvalidRule, StepLimitExceeded
from .exprs import render_term
from .sorts import SortGraph
from .terms import App, ContextView, FP64Term, RationalTerm, Term, VarRef, make_term

DEFAULT_STEP_LIMIT = 100_000

BUILTIN_RULE = "builtin"


@dataclass(frozen=True)
class RewriteRule:
    pattern: Term
    replacement: Term


def validate_rule(rule: RewriteRule, view: ContextView) -> None:
    if not isinstance(rule.pattern, App):
        raise InvalidRule("rule pattern must be an operator application, not a bare variable or literal")
    pattern_vars = free_variables(rule.pattern)
    extra = free_variables(rule.replacement) - pattern_vars
    if extra:
        raise InvalidRule(f"replacement uses variables absent from the pattern: {', '.join(sorted(extra))}")
    lk = view.graph.kind_of(rule.pattern.sort)
    rk = view.graph.kind_of(rule.replacement.sort)
    if lk != rk:
        raise InvalidRule(f"pattern sort kind {lk} differs from replacement sort kind {rk}")


def free_variables(t: Term) -> set[str]:
    if isinstance(t, VarRef):
        return {t.name}
    if isinstance(t, App):
        names: set[str] = set()
        for a in t.args:
            names |= free_variables(a)
        return names
    return set()


def is_ground(t: Term) -> bool:
    if isinstance(t, VarRef):
        return False
    if isinstance(t, App):
        return all(is_ground(a) for a in t.args)
    return True


def match(pattern: Term, subject: Term, graph: SortGraph) -> dict[str, Term] | None:
    """Syntactic first-order matching against a ground subject.

    A variable binds any subterm whose inferred sort is a proper sort
    below (or equal to) the variable's sort; a repeated variable must
    bind structurally equal terms.  No axioms are applied.
    """
    bindings: dict[str, Term] = {}

    def go(p: Term, t: Term) -> bool:
        if isinstance(p, VarRef):
            if not isinstance(t.sort, str) or not graph.is_subsort(t.sort, p.sort):
                return False
            if p.name in bindings:
                return bindings[p.name] == t
            bindings[p.name] = t
            return True
        if isinstance(p, RationalTerm):
            return isinstance(t, RationalTerm) and p.value == t.value
        if isinstance(p, FP64Term):
            return isinstance(t, FP64Term) and p.bits == t.bits
        assert isinstance(p, App)
        return (
            isinstance(t, App)
            and p.op == t.op
            and p.fixity == t.fixity
            and len(p.args) == len(t.args)
            and all(go(pa, ta) for pa, ta in zip(p.args, t.args))
        )

    return bindings if go(pattern, subject) else None


def substitute(t: Term, bindings: dict[str, Term], view: ContextView) -> Term:
    """Replace variables and re-infer sorts bottom-up.

    Re-inference is what removes (or adds) error flags: a kind-level
    term whose offending argument is replaced by a conforming one comes
    out with a proper sort again.
    """
    if isinstance(t, VarRef):
        return bindings[t.name]
    if isinstance(t, App):
        return make_term(view, t.op, t.fixity, (substitute(a, bindings, view) for a in t.args))
    return t


@dataclass(frozen=True)
class TraceStep:
    path: tuple[int, ...]
    rule: int | str  # rule index in context order, or "builtin"
    before: Term
    after: Term


@dataclass(frozen=True)
class Trace:
    steps: tuple[TraceStep, ...]

    def render(self) -> str:
        lines = []
        for s in self.steps:
            where = ".".join(str(i) for i in s.path) if s.path else "root"
            lines.append(f"{where}\t{s.rule}\t{render_term(s.before)}\t{render_term(s.after)}")
        return "\n".join(lines)

    def __len__(self) -> int:
        return len(self.steps)


def normalize(t: Term, ctx, step_limit: int = DEFAULT_STEP_LIMIT) -> tuple[Term, Trace]:
    """Rewrite t to normal form in ctx.

    ctx must provide .rules (ordered RewriteRule list), .graph,
    .signature and .variables.  Raises StepLimitExceeded (carrying the
    partial trace) once more than step_limit steps would be needed.
    """
    steps: list[TraceStep] = []
    current = t
    while True:
        found = _find_redex(current, ctx, ())
        if found is None:
            return current, Trace(tuple(steps))
        if len(steps) >= step_limit:
            raise StepLimitExceeded(
                f"no normal form within {step_limit} steps", current, Trace(tuple(steps))
            )
        path, rule_id, before, after = found
        current = _replace_at(current, path, after, ctx)
        steps.append(TraceStep(path, rule_id, before, after))


def _find_redex(t: Term, ctx, path: tuple[int, ...]):
    if not isinstance(t, App):
        return None
    for i, child in enumerate(t.args):
        found = _find_redex(child, ctx, path + (i,))
        if found is not None:
            return found
    for index, rule in enumerate(ctx.rules):
        bindings = match(rule.pattern, t, ctx.graph)
        if bindings is not None:
            return path, index, t, substitute(rule.replacement, bindings, ctx)
    after = builtin_step(t, ctx)
    if after is not None:
        return path, BUILTIN_RULE, t, after
    return None


def _replace_at(t: Term, path: tuple[int, ...], replacement: Term, view: ContextView) -> Term:
    if not path:
        return replacement
    assert isinstance(t, App)
    i = path[0]
    new_args = tuple(
        _replace_at(a, path[1:], replacement, view) if j == i else a for j, a in enumerate(t.args)
    )
    # rebuild so the spine's sorts (and error flags) are re-inferred
    return make_term(view, t.op, t.fixity, new_args)
