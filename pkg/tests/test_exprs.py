import random
from fractions import Fraction

import pytest

from leibniz_rw import lattice
from leibniz_rw.context import Decl, elaborate_context
from leibniz_rw.builtins import builtin_resolver
from leibniz_rw.errors import AmbiguityError, ParseError, UnknownIdentifier
from leibniz_rw.exprs import (
    OpDeclSyntax,
    parse_equation_asset,
    parse_op_decl,
    parse_rule_text,
    parse_sort_decl,
    parse_term,
    parse_var_decl,
    render_term,
)
from leibniz_rw.sorts import SortDecl, SubsortDecl
from leibniz_rw.terms import App, Fixity, FP64Term, RationalTerm, VarRef


@pytest.fixture(scope="module")
def rich():
    """A context exercising every syntactic form."""
    decls = [
        Decl("use", "builtins/numbers"),
        Decl("use", "builtins/fp64"),
        Decl("op", "a : ℚ"),
        Decl("op", "b : ℚ"),
        Decl("op", "c : ℚ"),
        Decl("op", "f(ℚ) : ℚ"),
        Decl("op", "g(ℚ, ℚ) : ℚ"),
        Decl("op", "ℚ[ℕ] : ℚ"),
        Decl("op", "ℚ_ℕ : ℚ"),
        Decl("op", "ℚ^ℕ : ℚ"),
        Decl("op", "ℚ ⊕ ℚ : ℚ"),
        Decl("op", "predator-prey : ℚp"),
        Decl("var", "U : ℚ"),
        Decl("var", "W : ℕ"),
    ]
    return elaborate_context("rich", decls, builtin_resolver, document="test")


def test_same_op_chain_associates_left(rich):
    assert parse_term("a + b + c", rich) == parse_term("(a + b) + c", rich)


def test_mixed_operators_rejected(rich):
    with pytest.raises(AmbiguityError):
        parse_term("a + b × c", rich)


def test_mixed_operators_fine_with_parens(rich):
    t = parse_term("a + (b × c)", rich)
    assert isinstance(t, App) and t.op == "+"


def test_special_operators_construct_expected_apps(rich):
    br = parse_term("a[1]", rich)
    assert (br.op, br.fixity) == ("[]", Fixity.BRACKET)
    sub = parse_term("a_1", rich)
    assert (sub.op, sub.fixity) == ("_", Fixity.SUBSCRIPT)
    sup = parse_term("a^1", rich)
    assert (sup.op, sup.fixity) == ("^", Fixity.SUPERSCRIPT)


def test_prefix_application(rich):
    t = parse_term("g(a, f(b))", rich)
    assert t.op == "g" and t.args[1].op == "f"


def test_rational_literals(rich):
    assert parse_term("3/2", rich) == RationalTerm(Fraction(3, 2), lattice.RAT_P)
    assert parse_term("2/4", rich).value == Fraction(1, 2)
    assert parse_term("-1/2", rich).value == Fraction(-1, 2)
    assert parse_term("7", rich).sort == lattice.NAT_NZ
    assert parse_term("0", rich).sort == lattice.NAT
    assert parse_term("-3", rich).sort == lattice.INT_NZ


def test_fp_literals(rich):
    half = parse_term("0.5", rich)
    assert isinstance(half, FP64Term) and half.bits == 0x3FE0000000000000
    assert parse_term("1e3", rich).bits == parse_term("1000.0", rich).bits
    inf = parse_term("∞", rich)
    neg_inf = parse_term("-∞", rich)
    assert neg_inf.bits == inf.bits | (1 << 63)
    nan = parse_term("NaN", rich)
    assert nan.bits == 0x7FF8000000000000
    assert parse_term("-0.0", rich).bits == 1 << 63


def test_minus_needs_space_as_operator(rich):
    assert parse_term("a − b", rich).op == "−"
    assert parse_term("a - b", rich).op == "−"
    with pytest.raises(ParseError):
        parse_term("a -3", rich)


def test_dash_inside_identifier(rich):
    t = parse_term("predator-prey", rich)
    assert t.op == "predator-prey"


def test_unknown_identifier_has_position(rich):
    with pytest.raises(UnknownIdentifier) as exc:
        parse_term("a + nope", rich)
    assert exc.value.line == 1 and exc.value.col == 5


def test_syntax_error_position(rich):
    with pytest.raises(ParseError) as exc:
        parse_term("g(a,", rich)
    assert exc.value.line == 1


def test_juxtaposition_is_an_error(rich):
    with pytest.raises(ParseError):
        parse_term("a b", rich)


def test_equality_operator_parses_as_infix(rich):
    t = parse_term("a = b", rich)
    assert t.op == "=" and t.sort == lattice.BOOLEAN


# -- rendering ---------------------------------------------------------------


def test_render_chain_omits_parens(rich):
    t = parse_term("(a + b) + c", rich)
    assert render_term(t) == "a + b + c"


def test_render_right_nesting_keeps_parens(rich):
    t = parse_term("a + (b + c)", rich)
    assert render_term(t) == "a + (b + c)"


def test_render_rational():
    assert render_term(RationalTerm(Fraction(3, 2), lattice.RAT_P)) == "3/2"
    assert render_term(RationalTerm(Fraction(-7), lattice.INT_NZ)) == "-7"


def test_render_specials(rich):
    for text in ("a[b + c]", "a_1", "f(a)^2", "a_(b + c)", "(a + b)[c]", "a_b_c"):
        t = parse_term(text, rich)
        assert parse_term(render_term(t), rich) == t


def _random_term(rng, rich, depth):
    """Random well-formed term in the rational kind."""
    choices = ["lit", "var", "nullary"]
    if depth > 0:
        choices += ["f", "g", "infix", "oplus", "bracket", "sub", "sup"] * 2
    kind = rng.choice(choices)
    if kind == "lit":
        return parse_term(str(Fraction(rng.randint(-30, 30), rng.randint(1, 12))), rich)
    if kind == "var":
        return VarRef("U", lattice.RAT)
    if kind == "nullary":
        return parse_term(rng.choice("abc"), rich)
    sub = lambda: _random_term(rng, rich, depth - 1)
    from leibniz_rw.terms import make_term

    if kind == "f":
        return make_term(rich, "f", Fixity.PREFIX, (sub(),))
    if kind == "g":
        return make_term(rich, "g", Fixity.PREFIX, (sub(), sub()))
    if kind == "infix":
        return make_term(rich, rng.choice(["+", "−", "×"]), Fixity.INFIX, (sub(), sub()))
    if kind == "oplus":
        return make_term(rich, "⊕", Fixity.INFIX, (sub(), sub()))
    nat = parse_term(str(rng.randint(0, 9)), rich)
    if kind == "bracket":
        return make_term(rich, "[]", Fixity.BRACKET, (sub(), nat))
    if kind == "sub":
        return make_term(rich, "_", Fixity.SUBSCRIPT, (sub(), nat))
    return make_term(rich, "^", Fixity.SUPERSCRIPT, (sub(), nat))


def test_parse_render_round_trip_random(rich):
    rng = random.Random(2024)
    for _ in range(300):
        t = _random_term(rng, rich, rng.randint(0, 4))
        assert parse_term(render_term(t), rich) == t


def test_fp_bit_patterns_round_trip(rich):
    from leibniz_rw.terms import fp64_term

    rng = random.Random(55)
    for _ in range(300):
        t = fp64_term(rng.getrandbits(64), rich.graph)
        assert parse_term(render_term(t), rich) == t


# -- declaration bodies -------------------------------------------------------


def test_parse_sort_decl_forms():
    assert parse_sort_decl("S") == SortDecl("S")
    assert parse_sort_decl("A ⊆ B") == SubsortDecl("A", "B")
    assert parse_sort_decl("A <: B") == SubsortDecl("A", "B")
    with pytest.raises(ParseError):
        parse_sort_decl("A ⊆")


def test_parse_op_decl_forms():
    assert parse_op_decl("c : S") == OpDeclSyntax("c", Fixity.PREFIX, (), "S")
    assert parse_op_decl("f(A, B) : S") == OpDeclSyntax("f", Fixity.PREFIX, ("A", "B"), "S")
    assert parse_op_decl("A + B : S") == OpDeclSyntax("+", Fixity.INFIX, ("A", "B"), "S")
    assert parse_op_decl("A max B : S") == OpDeclSyntax("max", Fixity.INFIX, ("A", "B"), "S")
    assert parse_op_decl("A − B : S") == OpDeclSyntax("−", Fixity.INFIX, ("A", "B"), "S")
    assert parse_op_decl("A[B] : S") == OpDeclSyntax("[]", Fixity.BRACKET, ("A", "B"), "S")
    assert parse_op_decl("A_B : S") == OpDeclSyntax("_", Fixity.SUBSCRIPT, ("A", "B"), "S")
    assert parse_op_decl("A^B : S") == OpDeclSyntax("^", Fixity.SUPERSCRIPT, ("A", "B"), "S")
    assert parse_op_decl("D(R->R) : R->R") == OpDeclSyntax("D", Fixity.PREFIX, ("R→R",), "R→R")


def test_reserved_operator_names_rejected():
    with pytest.raises(ParseError):
        parse_op_decl("A ⇒ B : S")


def test_parse_var_decl():
    assert parse_var_decl("x : ℝ") == ("x", "ℝ")


def test_parse_rule_text_ascii_arrow(rich):
    p1, r1 = parse_rule_text("f(U) ⇒ U", rich)
    p2, r2 = parse_rule_text("f(U) => U", rich)
    assert (p1, r1) == (p2, r2)


def test_parse_equation_asset(rich):
    label, left, right = parse_equation_asset("eq1 : f(a) = a + b", rich)
    assert label == "eq1" and left.op == "f" and right.op == "+"


def test_equation_needs_single_top_level_equals(rich):
    with pytest.raises(ParseError):
        parse_equation_asset("eq1 : a = b = c", rich)
    label, left, right = parse_equation_asset("eq2 : a = (b = c)", rich)
    assert right.sort == lattice.BOOLEAN
