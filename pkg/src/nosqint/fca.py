"""Formal Concept Analysis: closure operator, Next-Closure lattice, and
translation of the lattice into subsumption axioms."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from . import kernels
from .dl import Atomic, Axiom, EquivalentTo, SubClassOf, axiom_key
from .errors import IndexOutOfRange


def _bits(indexes: Iterable[int]) -> int:
    out = 0
    for i in indexes:
        out |= 1 << i
    return out


def _indexes(mask: int) -> frozenset[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


@dataclass(frozen=True)
class FormalContext:
    objects: tuple[str, ...]
    attributes: tuple[str, ...]
    incidence: frozenset[tuple[int, int]]

    def __init__(self, objects: Sequence[str], attributes: Sequence[str], incidence: Iterable[tuple[int, int]]):
        object.__setattr__(self, "objects", tuple(objects))
        object.__setattr__(self, "attributes", tuple(attributes))
        inc = frozenset((int(g), int(m)) for g, m in incidence)
        for g, m in inc:
            if not (0 <= g < len(self.objects) and 0 <= m < len(self.attributes)):
                raise IndexOutOfRange(f"incidence ({g}, {m}) outside {len(self.objects)}x{len(self.attributes)}")
        object.__setattr__(self, "incidence", inc)
        rows = [0] * len(self.objects)
        for g, m in inc:
            rows[g] |= 1 << m
        object.__setattr__(self, "_rows", tuple(rows))

    @classmethod
    def from_table(cls, table: Mapping[str, Iterable[str]], attributes: Sequence[str] | None = None) -> "FormalContext":
        """Build from ``object -> attribute names``; attribute order defaults to sorted."""
        objects = list(table)
        if attributes is None:
            attributes = sorted({a for attrs in table.values() for a in attrs})
        index = {a: i for i, a in enumerate(attributes)}
        incidence = [(g, index[a]) for g, o in enumerate(objects) for a in table[o]]
        return cls(objects, attributes, incidence)

    @property
    def rows(self) -> tuple[int, ...]:
        """Attribute bitmask per object."""
        return self._rows

    def _check(self, attrs: Iterable[int]) -> list[int]:
        attrs = list(attrs)
        for m in attrs:
            if not 0 <= m < len(self.attributes):
                raise IndexOutOfRange(f"attribute index {m} out of range")
        return attrs

    def extent(self, attrs: Iterable[int]) -> frozenset[int]:
        return _indexes(kernels.extent(self.rows, _bits(self._check(attrs))))

    def intent(self, objs: Iterable[int]) -> frozenset[int]:
        out = (1 << len(self.attributes)) - 1
        for g in objs:
            if not 0 <= g < len(self.objects):
                raise IndexOutOfRange(f"object index {g} out of range")
            out &= self.rows[g]
        return _indexes(out)


def close(ctx: FormalContext, attrs: Iterable[int]) -> frozenset[int]:
    """Double-prime closure ``attrs''``."""
    mask = _bits(ctx._check(attrs))
    return _indexes(kernels.closure(ctx.rows, len(ctx.attributes), mask))


@dataclass(frozen=True)
class FormalConcept:
    extent: frozenset[int]
    intent: frozenset[int]


@dataclass
class ConceptLattice:
    nodes: list[FormalConcept]
    cover_edges: set[tuple[int, int]] = field(default_factory=set)
    context: FormalContext | None = None

    def top(self) -> int:
        return max(range(len(self.nodes)), key=lambda i: len(self.nodes[i].extent))

    def bottom(self) -> int:
        return max(range(len(self.nodes)), key=lambda i: len(self.nodes[i].intent))

    def attribute_subsumptions(self) -> list[tuple[str, str]]:
        """Name pairs ``(a, b)`` with extent(a) ⊆ extent(b), a ≠ b."""
        ctx = self.context
        if ctx is None:
            return []
        ext = [ctx.extent([m]) for m in range(len(ctx.attributes))]
        return [
            (ctx.attributes[a], ctx.attributes[b])
            for a in range(len(ext)) for b in range(len(ext))
            if a != b and ext[a] <= ext[b]
        ]


def build_lattice(ctx: FormalContext) -> ConceptLattice:
    n_attrs = len(ctx.attributes)
    intents = kernels.next_closure_intents(ctx.rows, n_attrs)
    nodes = [
        FormalConcept(_indexes(kernels.extent(ctx.rows, m)), _indexes(m))
        for m in intents
    ]
    edges = set(kernels.cover_pairs(intents, n_attrs))
    return ConceptLattice(nodes, edges, ctx)


def introduced_attributes(lat: ConceptLattice, ctx: FormalContext) -> dict[int, list[str]]:
    """Node index -> names of attributes whose attribute concept is that node."""
    by_intent = {node.intent: i for i, node in enumerate(lat.nodes)}
    out: dict[int, list[str]] = {}
    for m, name in enumerate(ctx.attributes):
        node = by_intent[close(ctx, [m])]
        out.setdefault(node, []).append(name)
    return {i: sorted(names) for i, names in out.items()}


def node_names(lat: ConceptLattice, ctx: FormalContext) -> dict[int, str]:
    return {i: "_".join(names) for i, names in introduced_attributes(lat, ctx).items()}


def lattice_to_axioms(lat: ConceptLattice, ctx: FormalContext) -> list[Axiom]:
    """Subsumptions between attribute concepts.

    Nodes that introduce no attribute are pruned, and the order is reduced
    again over the surviving nodes.  Attributes introduced by the same node
    have equal extents and are emitted as equivalences.
    """
    intro = introduced_attributes(lat, ctx)
    named = sorted(intro)
    axioms: list[Axiom] = []
    for i in named:
        rep, *rest = intro[i]
        axioms.extend(EquivalentTo(Atomic(rep), Atomic(other)) for other in rest)
    ext = {i: lat.nodes[i].extent for i in named}
    for lo in named:
        above = [up for up in named if up != lo and ext[lo] < ext[up]]
        for up in above:
            if any(ext[lo] < ext[k] < ext[up] for k in above if k != up):
                continue
            axioms.append(SubClassOf(Atomic(intro[lo][0]), Atomic(intro[up][0])))
    return sorted(axioms, key=axiom_key)
