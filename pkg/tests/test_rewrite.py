from fractions import Fraction

import pytest

from leibniz_rw import lattice
from leibniz_rw.builtins import builtin_resolver
from leibniz_rw.context import Decl, elaborate_context
from leibniz_rw.errors import InvalidRule, StepLimitExceeded
from leibniz_rw.exprs import parse_rule_text, parse_term, render_term
from leibniz_rw.rewrite import (
    RewriteRule,
    Trace,
    TraceStep,
    match,
    normalize,
    substitute,
    validate_rule,
)
from leibniz_rw.sorts import Kind
from leibniz_rw.terms import App, ContextView, Fixity, RationalTerm, VarRef


@pytest.fixture(scope="module")
def vars_ctx(numbers):
    return ContextView(numbers.graph, numbers.signature, {"X": lattice.RAT, "Y": lattice.RAT, "Z": lattice.RAT_NZ})


def test_match_binds_and_projects(numbers, vars_ctx):
    pattern = parse_term("X + Y", vars_ctx)
    subject = parse_term("1/2 + 1/3", numbers)
    bindings = match(pattern, subject, numbers.graph)
    assert bindings == {"X": subject.args[0], "Y": subject.args[1]}


def test_match_nonlinear_variable(numbers, vars_ctx):
    pattern = parse_term("X + X", vars_ctx)
    assert match(pattern, parse_term("1 + 2", numbers), numbers.graph) is None
    assert match(pattern, parse_term("2 + 2", numbers), numbers.graph) is not None


def test_match_respects_variable_sort(numbers, vars_ctx):
    pattern = parse_term("Z + Y", vars_ctx)  # Z : ℚnz
    zero_left = parse_term("0 + 1", numbers)
    assert match(pattern, zero_left, numbers.graph) is None  # ℕ is not ≤ ℚnz
    one_left = parse_term("1 + 0", numbers)
    assert match(pattern, one_left, numbers.graph) is not None


def test_match_soundness_random(numbers, vars_ctx):
    import random

    rng = random.Random(13)
    pattern = parse_term("(X + Y) × X", vars_ctx)
    for _ in range(200):
        x = RationalTerm(Fraction(rng.randint(-9, 9), rng.randint(1, 9)), "ℚ")
        x = parse_term(str(x.value), numbers)
        y = parse_term(str(Fraction(rng.randint(-9, 9), rng.randint(1, 9))), numbers)
        subject = substitute(pattern, {"X": x, "Y": y}, numbers)
        bindings = match(pattern, subject, numbers.graph)
        assert bindings is not None
        assert substitute(pattern, bindings, numbers) == subject


def test_substitution_reinfers_sorts(numbers, vars_ctx):
    t = parse_term("X + Y", vars_ctx)
    assert t.sort == lattice.RAT
    one, two = parse_term("1", numbers), parse_term("2", numbers)
    result = substitute(t, {"X": one, "Y": two}, numbers)
    assert result.sort == lattice.NAT_NZ


def test_substitution_identity_shape(numbers, vars_ctx):
    t = parse_term("X", vars_ctx)
    q = parse_term("5/3", numbers)
    assert substitute(t, {"X": q}, numbers) == q


def test_substitution_removes_error_flag(numbers, vars_ctx):
    flagged = parse_term("1 ÷ Z", ContextView(numbers.graph, numbers.signature, {"Z": lattice.RAT}))
    assert isinstance(flagged.sort, Kind)
    two = parse_term("2", numbers)
    healed = substitute(flagged, {"Z": two}, numbers)
    assert healed.sort == lattice.RAT_P


def test_normalize_boolean_trace(booleans):
    t = parse_term("true ∧ (false ∨ true)", booleans)
    nf, trace = normalize(t, booleans)
    assert render_term(nf) == "true"
    # innermost first: the disjunction at child 1, then the root conjunction
    assert [s.path for s in trace.steps] == [(1,), ()]
    assert len(trace) == 2


def test_normalize_literal_is_normal_form(numbers):
    t = parse_term("5", numbers)
    nf, trace = normalize(t, numbers)
    assert nf == t and len(trace) == 0


def test_normalize_heron_step(heron_doc):
    ctx = heron_doc.context("heron")
    nf, _ = normalize(parse_term("heron-step(1, 2)", ctx), ctx)
    assert nf == parse_term("3/2", ctx)


def test_normalize_deterministic_trace(heron_doc):
    ctx = heron_doc.context("heron")
    t = parse_term("heron-iter(2, 1, 3)", ctx)
    runs = [normalize(t, ctx) for _ in range(2)]
    assert runs[0][0] == runs[1][0]
    assert runs[0][1].render() == runs[1][1].render()


def test_normal_form_admits_no_redex(heron_doc):
    ctx = heron_doc.context("heron")
    nf, _ = normalize(parse_term("heron-iter(2, 1, 4)", ctx), ctx)

    def no_redex(t):
        if not isinstance(t, App):
            return True
        from leibniz_rw.arith import builtin_step

        for rule in ctx.rules:
            assert match(rule.pattern, t, ctx.graph) is None
        assert builtin_step(t, ctx) is None
        return all(no_redex(a) for a in t.args)

    assert no_redex(nf)


def test_sort_preserved_per_step_up_to_kind(heron_doc):
    ctx = heron_doc.context("heron")
    _, trace = normalize(parse_term("heron-iter(2, 1, 2)", ctx), ctx)
    for step in trace.steps:
        assert ctx.graph.kind_of(step.before.sort) == ctx.graph.kind_of(step.after.sort)


def _priority_ctx(first: str, second: str):
    decls = [
        Decl("use", "builtins/boolean"),
        Decl("sort", "T"),
        Decl("op", "c : T"),
        Decl("op", "a : T"),
        Decl("op", "b : T"),
        Decl("op", "f(T) : T"),
        Decl("var", "X : T"),
        Decl("rule", first),
        Decl("rule", second),
    ]
    return elaborate_context("prio", decls, builtin_resolver, document="test")


def test_rule_priority_textually_first_wins():
    ctx = _priority_ctx("f(X) ⇒ a", "f(X) ⇒ b")
    nf, trace = normalize(parse_term("f(c)", ctx), ctx)
    assert render_term(nf) == "a"
    assert trace.steps[0].rule == len(ctx.rules) - 2  # first of the two f-rules

    swapped = _priority_ctx("f(X) ⇒ b", "f(X) ⇒ a")
    nf2, _ = normalize(parse_term("f(c)", swapped), swapped)
    assert render_term(nf2) == "b"


def test_step_limit_carries_partial_trace():
    decls = [
        Decl("sort", "T"),
        Decl("op", "c : T"),
        Decl("op", "f(T) : T"),
        Decl("var", "X : T"),
        Decl("rule", "f(X) ⇒ f(f(X))"),
    ]
    ctx = elaborate_context("loop", decls, builtin_resolver, document="test")
    with pytest.raises(StepLimitExceeded) as exc:
        normalize(parse_term("f(c)", ctx), ctx, step_limit=17)
    assert len(exc.value.trace.steps) == 17


def test_rule_validation(numbers, vars_ctx):
    x = VarRef("X", lattice.RAT)
    with pytest.raises(InvalidRule):
        validate_rule(RewriteRule(x, x), vars_ctx)  # bare variable pattern
    plus = parse_term("X + Y", vars_ctx)
    with pytest.raises(InvalidRule):
        validate_rule(RewriteRule(plus, VarRef("W", lattice.RAT)), vars_ctx)  # unbound W


def test_trace_render_format(booleans):
    t = parse_term("¬(true)", booleans)
    _, trace = normalize(t, booleans)
    line = trace.render()
    assert line == "root\t4\t¬(true)\tfalse"
