import random

import pytest
from hypothesis import given, settings, strategies as st

from nosqint.dl import Atomic, EquivalentTo, SubClassOf
from nosqint.errors import IndexOutOfRange
from nosqint.fca import FormalContext, build_lattice, close, introduced_attributes, lattice_to_axioms, node_names

from generators import random_context
from oracles import attribute_extents, closed_intents, told_closure


def table_ctx():
    return FormalContext.from_table({
        "ann": ["User"],
        "bob": ["User", "Author"],
        "cy": ["User", "Reviewer"],
        "dee": ["User", "Author", "Reviewer"],
    })


def test_from_table_and_derivations():
    ctx = table_ctx()
    assert ctx.attributes == ("Author", "Reviewer", "User")
    assert ctx.extent([0]) == {1, 3}
    assert ctx.intent([1, 3]) == {0, 2}
    assert close(ctx, [0]) == {0, 2}
    assert ctx.intent([]) == {0, 1, 2}


def test_index_errors():
    with pytest.raises(IndexOutOfRange):
        FormalContext(["g"], ["m"], [(0, 1)])
    ctx = table_ctx()
    with pytest.raises(IndexOutOfRange):
        ctx.extent([7])
    with pytest.raises(IndexOutOfRange):
        ctx.intent([9])


def test_lattice_of_type_table():
    ctx = table_ctx()
    lat = build_lattice(ctx)
    assert len(lat.nodes) == 4
    assert lat.nodes[lat.top()].extent == {0, 1, 2, 3}
    assert lat.nodes[lat.bottom()].intent == {0, 1, 2}
    assert sorted(node_names(lat, ctx).values()) == ["Author", "Reviewer", "User"]
    assert lattice_to_axioms(lat, ctx) == [SubClassOf(Atomic("Author"), Atomic("User")),
                                           SubClassOf(Atomic("Reviewer"), Atomic("User"))]


def test_co_introduced_attributes_become_equivalent():
    ctx = FormalContext.from_table({"a": ["X", "Y"], "b": ["Z"]})
    lat = build_lattice(ctx)
    assert sorted(introduced_attributes(lat, ctx).values()) == [["X", "Y"], ["Z"]]
    assert lattice_to_axioms(lat, ctx) == [EquivalentTo(Atomic("X"), Atomic("Y"))]


def test_unnamed_meet_is_pruned_and_order_kept():
    # A and B meet in an unnamed node above C
    ctx = FormalContext.from_table({"1": ["A"], "2": ["B"], "3": ["A", "B", "C"]})
    axioms = lattice_to_axioms(build_lattice(ctx), ctx)
    assert set(axioms) == {SubClassOf(Atomic("C"), Atomic("A")), SubClassOf(Atomic("C"), Atomic("B"))}


def test_empty_context():
    ctx = FormalContext([], ["m"], [])
    lat = build_lattice(ctx)
    assert [n.intent for n in lat.nodes] == [frozenset({0})]
    assert lattice_to_axioms(lat, ctx) == []


@settings(max_examples=150)
@given(st.integers(0, 100_000))
def test_lattice_matches_brute_force(seed):
    ctx = random_context(random.Random(seed), 8, 7)
    lat = build_lattice(ctx)
    inc = set(ctx.incidence)
    assert {n.intent for n in lat.nodes} == closed_intents(len(ctx.objects), len(ctx.attributes), inc)
    for n in lat.nodes:
        assert n.extent == ctx.extent(n.intent)
    # cover edges: lower strictly below upper with nothing in between
    for lo, up in lat.cover_edges:
        a, b = lat.nodes[lo].extent, lat.nodes[up].extent
        assert a < b
        assert not any(a < x.extent < b for x in lat.nodes)
    ext = attribute_extents(len(ctx.objects), len(ctx.attributes), inc)
    order = {(ctx.attributes[i], ctx.attributes[j]) for i in range(len(ext)) for j in range(len(ext))
             if ext[i] <= ext[j]}
    assert told_closure(lattice_to_axioms(lat, ctx), ctx.attributes) == order
    assert set(lat.attribute_subsumptions()) == {(x, y) for x, y in order if x != y}
