import random

import pytest

from leibniz_rw.errors import CycleError, UnknownSort
from leibniz_rw.sorts import Kind, SortDecl, SortGraph, SubsortDecl, build_sort_graph


def graph(*decls):
    return build_sort_graph(list(decls))


def test_empty_graph():
    g = graph()
    assert g.sorts == frozenset()
    assert len(g.kinds) == 0


def test_chain_closure():
    g = graph(SubsortDecl("A", "B"), SubsortDecl("B", "C"))
    assert len(g.sorts) == 3
    assert len(g.kinds) == 1
    assert g.is_subsort("A", "C")


def test_two_cycle_rejected():
    with pytest.raises(CycleError) as exc:
        graph(SubsortDecl("A", "B"), SubsortDecl("B", "A"))
    assert "A" in str(exc.value) and "B" in str(exc.value)


def test_longer_cycle_rejected():
    with pytest.raises(CycleError):
        graph(SubsortDecl("A", "B"), SubsortDecl("B", "C"), SubsortDecl("C", "A"))


def test_duplicate_decls_idempotent():
    g1 = graph(SortDecl("A"), SubsortDecl("A", "B"), SubsortDecl("A", "B"), SortDecl("A"))
    g2 = graph(SubsortDecl("A", "B"))
    assert g1 == g2


def test_subsort_reflexive():
    g = graph(SubsortDecl("A", "B"))
    assert g.is_subsort("A", "A")


def test_subsort_transitive():
    g = graph(SubsortDecl("A", "B"), SubsortDecl("B", "C"))
    assert g.is_subsort("A", "C")
    assert not g.is_subsort("C", "A")


def test_subsort_distinct_kinds_false():
    g = graph(SubsortDecl("A", "B"), SubsortDecl("D", "E"))
    assert not g.is_subsort("A", "E")
    assert g.kind_of("A") != g.kind_of("D")


def test_subsort_unknown_sort():
    g = graph(SortDecl("A"))
    with pytest.raises(UnknownSort):
        g.is_subsort("A", "Z")


def test_kind_canonical_id_is_least_name():
    g = graph(SubsortDecl("A", "B"))
    assert g.kind_of("B") == Kind("A")


def test_kind_of_separate_component():
    g = graph(SubsortDecl("A", "B"), SubsortDecl("D", "E"))
    assert g.kind_of("D") == Kind("D")


def test_singleton_sort_forms_own_kind():
    g = graph(SortDecl("X"))
    assert g.kind_of("X") == Kind("X")
    assert len(g.kinds) == 1


def test_build_is_order_insensitive():
    decls = [SubsortDecl("A", "B"), SortDecl("Q"), SubsortDecl("B", "C"), SubsortDecl("D", "C")]
    rng = random.Random(7)
    reference = build_sort_graph(decls)
    for _ in range(10):
        shuffled = decls[:]
        rng.shuffle(shuffled)
        assert build_sort_graph(shuffled) == reference


def test_subsort_implies_same_kind():
    rng = random.Random(11)
    for _ in range(25):
        g = _random_dag(rng)
        names = sorted(g.sorts)
        for a in names:
            for b in names:
                if g.is_subsort(a, b):
                    assert g.kind_of(a) == g.kind_of(b)


def test_subsort_is_partial_order_on_random_dags():
    rng = random.Random(13)
    for _ in range(25):
        g = _random_dag(rng)
        names = sorted(g.sorts)
        for a in names:
            assert g.is_subsort(a, a)
            for b in names:
                if g.is_subsort(a, b) and g.is_subsort(b, a):
                    assert a == b  # antisymmetry, from acyclicity
                for c in names:
                    if g.is_subsort(a, b) and g.is_subsort(b, c):
                        assert g.is_subsort(a, c)


def test_merge_never_removes_anything():
    rng = random.Random(17)
    for _ in range(20):
        g1, g2 = _random_dag(rng, prefix="L"), _random_dag(rng, prefix="M")
        merged = g1.merged(g2)
        assert g1.sorts | g2.sorts == merged.sorts
        assert g1.edges | g2.edges <= merged.edges


def _random_dag(rng: random.Random, size: int = 8, prefix: str = "S") -> SortGraph:
    names = [f"{prefix}{i}" for i in range(size)]
    decls = [SortDecl(n) for n in names]
    for i in range(size):
        for j in range(i + 1, size):
            if rng.random() < 0.25:
                decls.append(SubsortDecl(names[i], names[j]))  # i -> j keeps it acyclic
    return build_sort_graph(decls)
