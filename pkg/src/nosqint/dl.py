"""EL concept expressions with minimum cardinality, told-axiom reasoning,
and the non-standard inferences MSC, LCS and GCS.

Expressions are immutable and always built through :func:`conj`,
:func:`exists` and :func:`min_card`, which keep them in canonical form:
conjunctions are flattened, deduplicated and sorted, and ``≥1 r.C`` is
stored as ``∃r.C``.  Canonical form makes equality syntactic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Iterator, Mapping, Sequence, Union

from .errors import CyclicDefinitions, EmptyInput, UnknownIndividual, UnknownName

DATATYPES = ("Text", "Number", "Bool")


# -- expressions ---------------------------------------------------------------

@dataclass(frozen=True)
class _Top:
    def __repr__(self) -> str:
        return "Top"


TOP = _Top()


@dataclass(frozen=True)
class Atomic:
    name: str


@dataclass(frozen=True)
class And:
    items: tuple["ConceptExpr", ...]


@dataclass(frozen=True)
class Exists:
    role: str
    filler: "ConceptExpr"

    @property
    def n(self) -> int:
        return 1


@dataclass(frozen=True)
class MinCard:
    n: int
    role: str
    filler: "ConceptExpr"


ConceptExpr = Union[_Top, Atomic, And, Exists, MinCard]
Restriction = (Exists, MinCard)


def render(expr: ConceptExpr) -> str:
    if expr is TOP or isinstance(expr, _Top):
        return "⊤"
    if isinstance(expr, Atomic):
        return expr.name
    if isinstance(expr, And):
        return " ⊓ ".join(render(i) for i in expr.items)
    filler = render(expr.filler)
    if isinstance(expr.filler, And):
        filler = f"({filler})"
    if isinstance(expr, Exists):
        return f"∃{expr.role}.{filler}"
    return f"≥{expr.n} {expr.role}.{filler}"


def _order(expr: ConceptExpr) -> tuple:
    rank = {Atomic: 0, Exists: 1, MinCard: 1, And: 2}.get(type(expr), 3)
    return (rank, render(expr))


def conjuncts(expr: ConceptExpr) -> tuple[ConceptExpr, ...]:
    if isinstance(expr, And):
        return expr.items
    if isinstance(expr, _Top):
        return ()
    return (expr,)


def conj(*parts: ConceptExpr | Iterable[ConceptExpr]) -> ConceptExpr:
    flat: set[ConceptExpr] = set()
    for part in parts:
        if isinstance(part, (_Top, Atomic, And, Exists, MinCard)):
            flat.update(conjuncts(part))
        else:
            for p in part:
                flat.update(conjuncts(p))
    if not flat:
        return TOP
    if len(flat) == 1:
        return next(iter(flat))
    return And(tuple(sorted(flat, key=_order)))


def exists(role: str, filler: ConceptExpr = TOP) -> Exists:
    return Exists(role, filler)


def min_card(n: int, role: str, filler: ConceptExpr = TOP) -> ConceptExpr:
    if n < 1:
        raise ValueError("min cardinality must be >= 1")
    if n == 1:
        return Exists(role, filler)
    return MinCard(n, role, filler)


def card(expr: ConceptExpr) -> int:
    return expr.n


def names_in(expr: ConceptExpr) -> set[str]:
    if isinstance(expr, Atomic):
        return {expr.name}
    if isinstance(expr, And):
        return set().union(*(names_in(i) for i in expr.items))
    if isinstance(expr, Restriction):
        return names_in(expr.filler)
    return set()


def roles_in(expr: ConceptExpr) -> set[str]:
    if isinstance(expr, And):
        return set().union(*(roles_in(i) for i in expr.items))
    if isinstance(expr, Restriction):
        return {expr.role} | roles_in(expr.filler)
    return set()


def role_depth(expr: ConceptExpr) -> int:
    if isinstance(expr, And):
        return max(role_depth(i) for i in expr.items)
    if isinstance(expr, Restriction):
        return 1 + role_depth(expr.filler)
    return 0


# -- JSON form of expressions ----------------------------------------------------

def expr_to_json(expr: ConceptExpr, prefix: str = "") -> Any:
    if isinstance(expr, _Top):
        return "top"
    if isinstance(expr, Atomic):
        return {"atomic": prefix + expr.name}
    if isinstance(expr, And):
        return {"and": [expr_to_json(i, prefix) for i in expr.items]}
    if isinstance(expr, Exists):
        return {"exists": {"role": prefix + expr.role, "filler": expr_to_json(expr.filler, prefix)}}
    return {"minCard": {"n": expr.n, "role": prefix + expr.role, "filler": expr_to_json(expr.filler, prefix)}}


def _strip(name: str, prefix: str) -> str:
    if prefix:
        if not name.startswith(prefix):
            raise ValueError(f"{name!r} lacks namespace {prefix!r}")
        return name[len(prefix):]
    return name


def expr_from_json(data: Any, prefix: str = "") -> ConceptExpr:
    if data == "top":
        return TOP
    if not isinstance(data, dict) or len(data) != 1:
        raise ValueError(f"bad expression: {data!r}")
    (tag, body), = data.items()
    if tag == "atomic":
        return Atomic(_strip(body, prefix))
    if tag == "and":
        return conj(*(expr_from_json(b, prefix) for b in body))
    if tag == "exists":
        return exists(_strip(body["role"], prefix), expr_from_json(body["filler"], prefix))
    if tag == "minCard":
        return min_card(int(body["n"]), _strip(body["role"], prefix), expr_from_json(body["filler"], prefix))
    raise ValueError(f"unknown expression tag {tag!r}")


# -- ontology ------------------------------------------------------------------------

@dataclass(frozen=True)
class Role:
    name: str
    kind: str  # "Object" | "Datatype"
    domain: str
    range: str

    def __post_init__(self):
        if self.kind not in ("Object", "Datatype"):
            raise ValueError(f"role kind must be Object or Datatype, not {self.kind!r}")
        if self.kind == "Datatype" and self.range not in DATATYPES:
            raise ValueError(f"datatype role {self.name} needs a datatype range, got {self.range!r}")


@dataclass(frozen=True)
class SubClassOf:
    sub: ConceptExpr
    sup: ConceptExpr


@dataclass(frozen=True)
class EquivalentTo:
    left: ConceptExpr
    right: ConceptExpr

    def as_subclass_axioms(self) -> tuple[SubClassOf, SubClassOf]:
        return SubClassOf(self.left, self.right), SubClassOf(self.right, self.left)


@dataclass(frozen=True)
class DisjointWith:
    left: str
    right: str


Axiom = Union[SubClassOf, EquivalentTo, DisjointWith]


def axiom_key(ax: Axiom) -> tuple:
    if isinstance(ax, SubClassOf):
        return (0, render(ax.sub), render(ax.sup))
    if isinstance(ax, EquivalentTo):
        return (1, render(ax.left), render(ax.right))
    return (2, ax.left, ax.right)


@dataclass
class Ontology:
    id: str
    concepts: set[str] = field(default_factory=set)
    roles: dict[str, Role] = field(default_factory=dict)
    axioms: list[Axiom] = field(default_factory=list)
    annotations: dict[str, list[str]] = field(default_factory=dict)

    def __post_init__(self):
        self.concepts = set(self.concepts)
        if not isinstance(self.roles, dict):
            self.roles = {r.name: r for r in self.roles}

    # cached views; an Ontology is not mutated after construction

    @cached_property
    def hierarchy(self) -> dict[str, frozenset[str]]:
        return classify(self)

    @cached_property
    def told_definitions(self) -> dict[str, tuple[ConceptExpr, ...]]:
        """Non-atomic told superclass conjuncts per concept name."""
        defs: dict[str, list[ConceptExpr]] = {}
        for ax in self.axioms:
            pairs = []
            if isinstance(ax, SubClassOf):
                pairs = [(ax.sub, ax.sup)]
            elif isinstance(ax, EquivalentTo):
                pairs = list(zip((ax.left, ax.right), (ax.right, ax.left)))
            for sub, sup in pairs:
                if isinstance(sub, Atomic):
                    for c in conjuncts(sup):
                        if isinstance(c, Restriction):
                            defs.setdefault(sub.name, []).append(c)
        return {k: tuple(v) for k, v in defs.items()}

    def supers(self, name: str) -> frozenset[str]:
        return self.hierarchy.get(name, frozenset((name,)))

    def check_names(self, expr: ConceptExpr) -> None:
        missing = sorted(names_in(expr) - self.concepts)
        if missing:
            raise UnknownName(f"unknown concept(s) {missing} in ontology {self.id}")
        missing = sorted(roles_in(expr) - set(self.roles))
        if missing:
            raise UnknownName(f"unknown role(s) {missing} in ontology {self.id}")

    def with_axioms(self, extra: Iterable[Axiom]) -> "Ontology":
        return Ontology(self.id, set(self.concepts), dict(self.roles),
                        [*self.axioms, *extra], {k: list(v) for k, v in self.annotations.items()})

    def to_json(self) -> dict:
        data = {
            "id": self.id,
            "concepts": sorted(self.concepts),
            "roles": [
                {"name": r.name, "kind": r.kind, "domain": r.domain, "range": r.range}
                for r in sorted(self.roles.values(), key=lambda r: r.name)
            ],
            "axioms": [axiom_to_json(a) for a in self.axioms],
        }
        if self.annotations:
            data["annotations"] = {k: list(v) for k, v in sorted(self.annotations.items())}
        return data

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Ontology":
        roles = {r["name"]: Role(r["name"], r["kind"], r["domain"], r["range"]) for r in data.get("roles", [])}
        return cls(
            data["id"],
            set(data.get("concepts", [])),
            roles,
            [axiom_from_json(a) for a in data.get("axioms", [])],
            {k: list(v) for k, v in data.get("annotations", {}).items()},
        )


def axiom_to_json(ax: Axiom) -> dict:
    if isinstance(ax, SubClassOf):
        return {"type": "subClassOf", "sub": expr_to_json(ax.sub), "sup": expr_to_json(ax.sup)}
    if isinstance(ax, EquivalentTo):
        return {"type": "equivalentTo", "left": expr_to_json(ax.left), "right": expr_to_json(ax.right)}
    return {"type": "disjointWith", "left": ax.left, "right": ax.right}


def axiom_from_json(data: Mapping[str, Any]) -> Axiom:
    kind = data["type"]
    if kind == "subClassOf":
        return SubClassOf(expr_from_json(data["sub"]), expr_from_json(data["sup"]))
    if kind == "equivalentTo":
        return EquivalentTo(expr_from_json(data["left"]), expr_from_json(data["right"]))
    if kind == "disjointWith":
        return DisjointWith(data["left"], data["right"])
    raise ValueError(f"unknown axiom type {kind!r}")


def dumps_ontology(onto: Ontology) -> str:
    return json.dumps(onto.to_json(), indent=2, ensure_ascii=False) + "\n"


def loads_ontology(text: str) -> Ontology:
    return Ontology.from_json(json.loads(text))


# -- classification ------------------------------------------------------------------

def told_edges(onto: Ontology) -> dict[str, set[str]]:
    """Name-level told subsumption edges ``A -> B`` for ``A ⊑ B``."""
    edges: dict[str, set[str]] = {c: set() for c in onto.concepts}

    def add(sub: ConceptExpr, sup: ConceptExpr) -> None:
        if not isinstance(sub, Atomic):
            return
        for c in conjuncts(sup):
            if isinstance(c, Atomic):
                edges.setdefault(sub.name, set()).add(c.name)

    for ax in onto.axioms:
        if isinstance(ax, SubClassOf):
            add(ax.sub, ax.sup)
        elif isinstance(ax, EquivalentTo):
            add(ax.left, ax.right)
            add(ax.right, ax.left)
    return edges


def classify(onto: Ontology) -> dict[str, frozenset[str]]:
    """Reflexive-transitive closure of the told name hierarchy."""
    return _close_edges(told_edges(onto))


# -- subsumption -------------------------------------------------------------------------

class _Reasoner:
    def __init__(self, onto: Ontology, extra_edges: Iterable[tuple[str, str]] = ()):
        self.onto = onto
        self.hier = onto.hierarchy
        extra = list(extra_edges)
        if extra:
            base = told_edges(onto)
            for a, b in extra:
                base.setdefault(a, set()).add(b)
                base.setdefault(b, set())
            self.hier = _close_edges(base)
        self.defs = onto.told_definitions
        self._expanded: dict[ConceptExpr, tuple] = {}

    def supers(self, name: str) -> frozenset[str]:
        return self.hier.get(name, frozenset((name,)))

    def expand(self, expr: ConceptExpr) -> tuple[frozenset[str], tuple[ConceptExpr, ...]]:
        """Atomic-name closure and restriction conjuncts, including told definitions."""
        hit = self._expanded.get(expr)
        if hit is not None:
            return hit
        names: set[str] = set()
        restrictions: list[ConceptExpr] = []
        for c in conjuncts(expr):
            if isinstance(c, Atomic):
                names |= self.supers(c.name)
            elif isinstance(c, Restriction):
                restrictions.append(c)
        for n in sorted(names):
            restrictions.extend(self.defs.get(n, ()))
        hit = (frozenset(names), tuple(dict.fromkeys(restrictions)))
        self._expanded[expr] = hit
        return hit

    def subsumes(self, sup: ConceptExpr, sub: ConceptExpr) -> bool:
        if isinstance(sup, _Top):
            return True
        if isinstance(sup, And):
            return all(self.subsumes(c, sub) for c in sup.items)
        names, restrictions = self.expand(sub)
        if isinstance(sup, Atomic):
            return sup.name in names
        need = sup.n
        for r in restrictions:
            if r.role == sup.role and r.n >= need and self.subsumes(sup.filler, r.filler):
                return True
        return False

    def minimal_names(self, names: Iterable[str]) -> list[str]:
        names = set(names)
        keep = []
        for n in names:
            strictly_below = any(
                m != n and n in self.supers(m) and m not in self.supers(n) for m in names
            )
            if not strictly_below:
                keep.append(n)
        return sorted(keep)

    def minimize(self, parts: Sequence[ConceptExpr]) -> ConceptExpr:
        """Drop restriction conjuncts implied by another conjunct."""
        expr = conj(parts)
        items = list(conjuncts(expr))
        restr = [p for p in items if isinstance(p, Restriction)]
        kept = [p for p in items if not isinstance(p, Restriction)]
        for i, r in enumerate(restr):
            redundant = False
            for j, other in enumerate(restr):
                if i == j:
                    continue
                if self.subsumes(r, other):
                    # equivalent pairs: keep the first in canonical order
                    if not self.subsumes(other, r) or j < i:
                        redundant = True
                        break
            if not redundant:
                kept.append(r)
        return conj(kept)


def _close_edges(edges: Mapping[str, set[str]]) -> dict[str, frozenset[str]]:
    result = {}
    for start in edges:
        seen = {start}
        stack = [start]
        while stack:
            for nxt in edges.get(stack.pop(), ()):
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append(nxt)
        result[start] = frozenset(seen)
    return result


def subsumes(onto: Ontology, sup: ConceptExpr, sub: ConceptExpr) -> bool:
    """True when ``sub ⊑ sup`` follows structurally from the told axioms."""
    onto.check_names(sup)
    onto.check_names(sub)
    return _Reasoner(onto).subsumes(sup, sub)


def equivalent(onto: Ontology, a: ConceptExpr, b: ConceptExpr) -> bool:
    r = _Reasoner(onto)
    onto.check_names(a)
    onto.check_names(b)
    return r.subsumes(a, b) and r.subsumes(b, a)


# -- MSC ----------------------------------------------------------------------------------------

@dataclass(frozen=True)
class Lit:
    """A literal role-assertion target."""

    value: Any


@dataclass
class ABox:
    type_assertions: dict[str, set[str]] = field(default_factory=dict)
    role_assertions: dict[str, list[tuple[str, Union[str, Lit]]]] = field(default_factory=dict)

    def individuals(self) -> set[str]:
        out = set(self.type_assertions) | set(self.role_assertions)
        for pairs in self.role_assertions.values():
            out.update(t for _, t in pairs if not isinstance(t, Lit))
        return out

    def check(self, onto: Ontology) -> None:
        for ind, names in self.type_assertions.items():
            missing = set(names) - onto.concepts
            if missing:
                raise UnknownName(f"{ind}: unknown concepts {sorted(missing)}")
        for ind, pairs in self.role_assertions.items():
            for role, _ in pairs:
                if role not in onto.roles:
                    raise UnknownName(f"{ind}: unknown role {role!r}")


def msc(onto: Ontology, abox: ABox, individual: str, k: int = 2) -> ConceptExpr:
    """Role-depth-bounded most specific concept of ``individual``."""
    if k < 0:
        raise ValueError("depth must be >= 0")
    if individual not in abox.individuals():
        raise UnknownIndividual(individual)

    def build(ind: str, depth: int) -> ConceptExpr:
        parts: list[ConceptExpr] = [Atomic(n) for n in abox.type_assertions.get(ind, ())]
        if depth > 0:
            for role, target in abox.role_assertions.get(ind, ()):
                if isinstance(target, Lit):
                    parts.append(exists(role, TOP))
                else:
                    parts.append(exists(role, build(target, depth - 1)))
        return conj(parts)

    return build(individual, k)


# -- LCS / GCS ----------------------------------------------------------------------------------

def _definition_cycle(onto: Ontology) -> bool:
    deps = {n: set() for n in onto.concepts}
    for name, defs in onto.told_definitions.items():
        for d in defs:
            for m in names_in(d):
                deps.setdefault(name, set()).update(onto.supers(m))
    state: dict[str, int] = {}

    def visit(n: str) -> bool:
        state[n] = 1
        for m in deps.get(n, ()):
            s = state.get(m, 0)
            if s == 1 or (s == 0 and visit(m)):
                return True
        state[n] = 2
        return False

    return any(state.get(n, 0) == 0 and visit(n) for n in sorted(deps))


def lcs(onto: Ontology, exprs: Sequence[ConceptExpr]) -> ConceptExpr:
    """Least common subsumer by the product construction on description trees."""
    if not exprs:
        raise EmptyInput("lcs needs at least one expression")
    for e in exprs:
        onto.check_names(e)
    if _definition_cycle(onto):
        raise CyclicDefinitions(f"ontology {onto.id} has cyclic told definitions; use gcs")
    r = _Reasoner(onto)

    def product(c: ConceptExpr, d: ConceptExpr) -> ConceptExpr:
        nc, rc = r.expand(c)
        nd, rd = r.expand(d)
        parts: list[ConceptExpr] = [Atomic(n) for n in r.minimal_names(nc & nd)]
        for x in rc:
            for y in rd:
                if x.role == y.role:
                    parts.append(min_card(min(x.n, y.n), x.role, product(x.filler, y.filler)))
        return r.minimize(parts)

    result = _normalize(r, exprs[0])
    for e in exprs[1:]:
        result = product(result, e)
    return result


def _normalize(r: _Reasoner, expr: ConceptExpr) -> ConceptExpr:
    """Single-input lcs: the expression itself with names reduced to their minimal elements."""
    parts: list[ConceptExpr] = []
    names = [c.name for c in conjuncts(expr) if isinstance(c, Atomic)]
    parts.extend(Atomic(n) for n in r.minimal_names(names))
    for c in conjuncts(expr):
        if isinstance(c, Restriction):
            parts.append(min_card(c.n, c.role, _normalize(r, c.filler)))
    return r.minimize(parts)


def gcs(onto: Ontology, exprs: Sequence[ConceptExpr], lattice: Any = None, role_depth: int = 0) -> ConceptExpr:
    """Good common subsumer: the least conjunction of concept names above every input.

    Top-level names of each input are closed under the told hierarchy (plus
    the name implications of ``lattice`` when given), intersected, and
    reduced to their minimal elements.  With ``role_depth > 0`` the same
    approximation is applied below shared role restrictions.
    """
    if not exprs:
        raise EmptyInput("gcs needs at least one expression")
    for e in exprs:
        onto.check_names(e)
    extra = lattice.attribute_subsumptions() if lattice is not None else ()
    r = _Reasoner(onto, extra)

    def names_of(e: ConceptExpr) -> frozenset[str]:
        out: set[str] = set()
        for c in conjuncts(e):
            if isinstance(c, Atomic):
                out |= r.supers(c.name)
        return frozenset(out)

    def approx(es: Sequence[ConceptExpr], depth: int) -> ConceptExpr:
        common = frozenset.intersection(*(names_of(e) for e in es))
        parts: list[ConceptExpr] = [Atomic(n) for n in r.minimal_names(common)]
        if depth > 0:
            acc = es[0]
            for e in es[1:]:
                acc = pair(acc, e, depth)
            if len(es) == 1:
                acc = pair(es[0], es[0], depth)
            parts.extend(c for c in conjuncts(acc) if isinstance(c, Restriction))
        return r.minimize(parts)

    def pair(c: ConceptExpr, d: ConceptExpr, depth: int) -> ConceptExpr:
        parts: list[ConceptExpr] = [Atomic(n) for n in r.minimal_names(names_of(c) & names_of(d))]
        for x in conjuncts(c):
            if not isinstance(x, Restriction):
                continue
            for y in conjuncts(d):
                if isinstance(y, Restriction) and x.role == y.role:
                    parts.append(min_card(min(x.n, y.n), x.role, approx([x.filler, y.filler], depth - 1)))
        return r.minimize(parts)

    return approx(list(exprs), role_depth)


def iter_subexpressions(expr: ConceptExpr) -> Iterator[ConceptExpr]:
    yield expr
    if isinstance(expr, And):
        for i in expr.items:
            yield from iter_subexpressions(i)
    elif isinstance(expr, Restriction):
        yield from iter_subexpressions(expr.filler)
