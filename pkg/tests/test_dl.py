import random

import pytest
from hypothesis import given, settings, strategies as st

from nosqint.dl import (
    TOP, ABox, And, Atomic, DisjointWith, EquivalentTo, Exists, Lit, MinCard, Ontology, Role, SubClassOf, classify,
    conj, dumps_ontology, equivalent, expr_from_json, expr_to_json, gcs, lcs, loads_ontology, min_card, msc, render,
    subsumes,
)
from nosqint.errors import CyclicDefinitions, EmptyInput, UnknownIndividual, UnknownName

from generators import random_expr, random_tbox
from oracles import el_subsumes, told_closure

A, B, C, D = (Atomic(n) for n in "ABCD")


def onto(*axioms, names="ABCDEF"):
    return Ontology("t", set(names), {r: Role(r, "Object", "A", "A") for r in "rs"}, list(axioms))


def test_conj_is_canonical():
    assert conj(B, A, conj(A, Exists("r", TOP))) == conj(Exists("r", TOP), A, B)
    assert conj() is TOP
    assert conj(A) == A
    assert conj(A, TOP) == A
    assert isinstance(conj(A, B), And)


def test_min_card_one_is_exists():
    assert min_card(1, "r", A) == Exists("r", A)
    assert isinstance(min_card(2, "r", A), MinCard)
    with pytest.raises(ValueError):
        min_card(0, "r")


def test_render():
    assert render(conj(A, Exists("r", conj(B, C)))) == "A ⊓ ∃r.(B ⊓ C)"
    assert render(MinCard(2, "s", TOP)) == "≥2 s.⊤"


@given(st.integers(0, 10_000))
def test_expression_json_round_trip(seed):
    e = random_expr(random.Random(seed), 2)
    assert expr_from_json(expr_to_json(e)) == e
    assert expr_from_json(expr_to_json(e, "ns#"), "ns#") == e


def test_role_validation():
    with pytest.raises(ValueError):
        Role("x", "Other", "A", "A")


def test_ontology_json_round_trip():
    o = onto(SubClassOf(A, conj(B, Exists("r", C))), EquivalentTo(C, D), DisjointWith("A", "E"))
    o.annotations["A"] = ["an a"]
    text = dumps_ontology(o)
    assert dumps_ontology(loads_ontology(text)) == text


def test_classify_with_equivalence_cycle():
    o = onto(SubClassOf(A, B), EquivalentTo(B, C), SubClassOf(C, B))
    h = classify(o)
    assert h["A"] == {"A", "B", "C"}
    assert h["B"] == h["C"] == {"B", "C"}


@settings(max_examples=60)
@given(st.integers(0, 10_000))
def test_classify_matches_closure_oracle(seed):
    o = random_tbox(random.Random(seed), cycles=True)
    got = {(a, b) for a, sups in classify(o).items() for b in sups}
    assert got == told_closure(o.axioms, o.concepts)


def test_subsumption_uses_told_definitions():
    o = onto(SubClassOf(A, Exists("r", B)), SubClassOf(B, C))
    assert subsumes(o, Exists("r", C), A)
    assert not subsumes(o, Exists("s", C), A)
    assert subsumes(o, MinCard(2, "r", TOP), MinCard(3, "r", B))
    assert not subsumes(o, MinCard(3, "r", TOP), MinCard(2, "r", B))
    assert equivalent(o, conj(A, Exists("r", B)), A)


def test_unknown_names_raise():
    with pytest.raises(UnknownName):
        subsumes(onto(), Atomic("Z"), A)
    with pytest.raises(UnknownName):
        subsumes(onto(), Exists("q", TOP), A)


@settings(max_examples=100)
@given(st.integers(0, 10_000))
def test_subsumes_agrees_with_structural_oracle(seed):
    rng = random.Random(seed)
    o = random_tbox(rng)
    closure = told_closure(o.axioms, o.concepts)
    x, y = random_expr(rng, 2), random_expr(rng, 2)
    assert subsumes(o, x, y) == el_subsumes(x, y, closure)


def test_lcs_product():
    o = onto(SubClassOf(A, C), SubClassOf(B, C))
    assert lcs(o, [A, B]) == C
    got = lcs(o, [conj(A, Exists("r", conj(A, D))), conj(B, Exists("r", D), Exists("r", A))])
    assert got == conj(C, Exists("r", A), Exists("r", D))
    assert lcs(o, [MinCard(3, "r", A), MinCard(2, "r", conj(A, B))]) == MinCard(2, "r", A)
    assert lcs(o, [conj(A, C)]) == A


def test_lcs_errors():
    with pytest.raises(EmptyInput):
        lcs(onto(), [])
    cyclic = onto(SubClassOf(A, Exists("r", B)), SubClassOf(B, Exists("r", A)))
    with pytest.raises(CyclicDefinitions):
        lcs(cyclic, [A, B])
    # gcs still answers over the same ontology
    assert gcs(cyclic, [A, B]) is TOP


def test_gcs_is_names_only_by_default():
    o = onto(SubClassOf(A, C), SubClassOf(B, C), SubClassOf(C, D))
    inputs = [conj(A, Exists("r", B)), conj(B, Exists("r", B))]
    assert gcs(o, inputs) == C
    assert gcs(o, inputs, role_depth=1) == conj(C, Exists("r", B))


def test_msc_depths():
    o = onto()
    abox = ABox({"a": {"A"}, "b": {"B"}, "c": {"C"}},
                {"a": [("r", "b"), ("s", Lit(3))], "b": [("r", "c")]})
    assert msc(o, abox, "a", 0) == A
    assert msc(o, abox, "a", 1) == conj(A, Exists("r", B), Exists("s", TOP))
    assert msc(o, abox, "a", 2) == conj(A, Exists("r", conj(B, Exists("r", C))), Exists("s", TOP))
    with pytest.raises(UnknownIndividual):
        msc(o, abox, "zz")
    with pytest.raises(ValueError):
        msc(o, abox, "a", -1)
