import random
from fractions import Fraction

import pytest

from leibniz_rw import lattice
from leibniz_rw.errors import ConflictError, KindMismatch, NoSuchOperator, PreregularityError
from leibniz_rw.exprs import parse_term
from leibniz_rw.sorts import Kind, SortDecl, SubsortDecl, build_sort_graph
from leibniz_rw.terms import (
    App,
    ContextView,
    Fixity,
    OperatorDecl,
    Signature,
    VarRef,
    declare_operator,
    infer_sort,
    make_term,
    rational_term,
)


def test_declare_operator_inserts():
    g = build_sort_graph([SortDecl(lattice.RAT)])
    sig = declare_operator(Signature(), g, OperatorDecl("+", Fixity.INFIX, (lattice.RAT, lattice.RAT), lattice.RAT))
    assert len(sig.decls) == 1


def test_declare_operator_idempotent():
    g = build_sort_graph([SortDecl("S")])
    d = OperatorDecl("f", Fixity.PREFIX, ("S",), "S")
    sig = declare_operator(Signature(), g, d)
    assert declare_operator(sig, g, d) == sig


def test_declare_operator_conflicting_result():
    g = build_sort_graph([SortDecl("A"), SortDecl("X"), SortDecl("Y")])
    sig = declare_operator(Signature(), g, OperatorDecl("f", Fixity.PREFIX, ("A",), "X"))
    with pytest.raises(ConflictError):
        declare_operator(sig, g, OperatorDecl("f", Fixity.PREFIX, ("A",), "Y"))


def test_preregularity_rejects_ambiguous_least_result():
    g = build_sort_graph([SubsortDecl("C", "A"), SubsortDecl("C", "B"), SubsortDecl("X", "TOP"), SubsortDecl("Y", "TOP")])
    sig = declare_operator(Signature(), g, OperatorDecl("f", Fixity.PREFIX, ("A",), "X"))
    # argument C fits both decls, but results X and Y have no least element
    with pytest.raises(PreregularityError):
        declare_operator(sig, g, OperatorDecl("f", Fixity.PREFIX, ("B",), "Y"))


def test_kind_level_result_consistency_required():
    g = build_sort_graph([SubsortDecl("A", "B"), SortDecl("X"), SortDecl("Y")])
    sig = declare_operator(Signature(), g, OperatorDecl("f", Fixity.PREFIX, ("A",), "X"))
    # same argument kind would leave the error-flag kind ambiguous
    with pytest.raises(PreregularityError):
        declare_operator(sig, g, OperatorDecl("f", Fixity.PREFIX, ("B",), "Y"))


def _brute_force_least(sig, graph, name, fixity, args):
    """Independent oracle: scan all decls, filter applicable, find the
    unique minimal result by pairwise subsort comparison."""
    applicable = [
        d
        for d in sig.decls
        if d.name == name
        and d.fixity == fixity
        and len(d.arg_sorts) == len(args)
        and all(graph.is_subsort(a, s) for a, s in zip(args, d.arg_sorts))
    ]
    results = {d.result_sort for d in applicable}
    least = [r for r in results if all(graph.is_subsort(r, other) for other in results)]
    assert len(least) == 1
    return least[0]


def test_infer_least_result_matches_exhaustive_scan(numbers):
    expected = _brute_force_least(numbers.signature, numbers.graph, "+", Fixity.INFIX, [lattice.NAT_NZ, lattice.RAT_P])
    got = infer_sort(numbers.signature, numbers.graph, "+", Fixity.INFIX, [lattice.NAT_NZ, lattice.RAT_P])
    assert got == expected == lattice.RAT_P


def test_infer_every_numeric_pair_matches_scan(numbers):
    sorts = sorted(lattice.NUMERIC_SORTS)
    for op in ("+", "×", "−"):
        for a in sorts:
            for b in sorts:
                got = infer_sort(numbers.signature, numbers.graph, op, Fixity.INFIX, [a, b])
                if isinstance(got, str):
                    assert got == _brute_force_least(numbers.signature, numbers.graph, op, Fixity.INFIX, [a, b])


def test_infer_within_kind_mismatch_flags(numbers):
    got = infer_sort(numbers.signature, numbers.graph, "÷", Fixity.INFIX, [lattice.RAT, lattice.RAT])
    assert got == numbers.graph.kind_of(lattice.RAT)
    assert isinstance(got, Kind)


def test_infer_cross_kind_rejects(numbers):
    with pytest.raises(KindMismatch):
        infer_sort(numbers.signature, numbers.graph, "+", Fixity.INFIX, [lattice.RAT, lattice.BOOLEAN])


def test_infer_unknown_operator(numbers):
    with pytest.raises(NoSuchOperator):
        infer_sort(numbers.signature, numbers.graph, "nope", Fixity.PREFIX, [lattice.RAT])


def test_make_term_scalar_times_function(functions_doc):
    ctx = functions_doc.context("derivatives-ℝ→ℝ")
    alpha = OperatorDecl("α", Fixity.PREFIX, (), lattice.REAL_P)
    view = ContextView(ctx.graph, ctx.signature.with_decl(alpha, ctx.graph).with_decl(
        OperatorDecl("x", Fixity.PREFIX, (), "ℝ→ℝ"), ctx.graph), {})
    a = make_term(view, "α", Fixity.PREFIX, ())
    x = make_term(view, "x", Fixity.PREFIX, ())
    assert a.sort == lattice.REAL_P
    product = make_term(view, "×", Fixity.INFIX, (a, x))
    assert product.sort == "ℝ→ℝ"


def test_variable_leaf_keeps_declared_sort(numbers):
    view = ContextView(numbers.graph, numbers.signature, {"x": lattice.REAL})
    leaf = parse_term("x", view)
    assert leaf == VarRef("x", lattice.REAL)


def test_builtin_signature_is_preregular(numbers, fp64, booleans):
    for ctx in (numbers, fp64, booleans):
        ctx.signature.check_preregular(ctx.graph)  # must not raise


def test_monotonicity_on_random_preregular_signatures():
    rng = random.Random(23)
    tried = 0
    for _ in range(300):
        if tried >= 40:
            break
        names = [f"S{i}" for i in range(6)]
        decls = [SortDecl(n) for n in names]
        for i in range(6):
            for j in range(i + 1, 6):
                if rng.random() < 0.3:
                    decls.append(SubsortDecl(names[i], names[j]))
        g = build_sort_graph(decls)
        sig = Signature()
        try:
            for _ in range(4):
                a = rng.choice(names)
                b = rng.choice(names)
                r = rng.choice(names)
                if g.kind_of(a) != g.kind_of(b) or g.kind_of(r) != g.kind_of(a):
                    continue
                sig = declare_operator(sig, g, OperatorDecl("f", Fixity.PREFIX, (a, b), r))
        except (ConflictError, PreregularityError):
            continue
        if not sig.decls:
            continue
        tried += 1
        for a in names:
            for b in names:
                for lower in names:
                    if not g.is_subsort(lower, a):
                        continue
                    try:
                        original = infer_sort(sig, g, "f", Fixity.PREFIX, [a, b])
                        lowered = infer_sort(sig, g, "f", Fixity.PREFIX, [lower, b])
                    except (KindMismatch, NoSuchOperator):
                        continue
                    if isinstance(original, str) and isinstance(lowered, str):
                        assert g.is_subsort(lowered, original)
    assert tried >= 10


def test_rational_literal_reduced():
    t = rational_term(Fraction(2, 4))
    assert (t.value.numerator, t.value.denominator) == (1, 2)


def test_error_flag_coherence(numbers):
    flagged = parse_term("1 ÷ 0", numbers)
    assert isinstance(flagged.sort, Kind)
    fine = parse_term("1 ÷ 2", numbers)
    assert isinstance(fine.sort, str)


def test_application_matches_exactly_one_decl_group(numbers):
    t = parse_term("1 + 2", numbers)
    assert isinstance(t, App)
    assert numbers.signature.group(t.op, t.fixity, len(t.args))
