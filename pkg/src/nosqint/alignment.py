"""Ontology alignment.

Simple correspondences come from three matchers (lexical, structural,
annotation) whose scores are combined by configured weights.  Complex
correspondences come from subgraph subsumption between concept
neighbourhoods and from matching concept names against role names.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from . import dl, kernels
from .dl import Atomic, ConceptExpr, DisjointWith, Ontology, SubClassOf, axiom_key, conj, min_card
from .errors import AlignmentError, SameOntology, UnknownName


class Relation(str, Enum):
    EQUIV = "="
    SUBSUMED_BY = "<"
    SUBSUMES = ">"
    DISJOINT = "%"


PROVENANCES = ("Lexical", "Structural", "Annotation", "Prop1", "Prop2")


@dataclass(frozen=True, order=True)
class RoleRef:
    name: str


Entity = ConceptExpr | RoleRef


@dataclass(frozen=True)
class Correspondence:
    left: Entity
    right: Entity
    relation: Relation
    confidence: float
    provenance: str

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise AlignmentError(f"confidence {self.confidence} outside [0, 1]")
        if self.provenance not in PROVENANCES:
            raise AlignmentError(f"unknown provenance {self.provenance!r}")
        object.__setattr__(self, "relation", Relation(self.relation))

    def swapped(self) -> "Correspondence":
        flip = {Relation.SUBSUMED_BY: Relation.SUBSUMES, Relation.SUBSUMES: Relation.SUBSUMED_BY}
        return Correspondence(self.right, self.left, flip.get(self.relation, self.relation),
                              self.confidence, self.provenance)


def _entity_text(e: Entity) -> str:
    return f"role:{e.name}" if isinstance(e, RoleRef) else dl.render(e)


def cell_key(c: Correspondence) -> tuple:
    return (_entity_text(c.left), _entity_text(c.right), c.relation.value)


@dataclass
class Alignment:
    onto1: str
    onto2: str
    cells: list[Correspondence] = field(default_factory=list)

    def __post_init__(self):
        seen: dict[tuple, Correspondence] = {}
        for c in self.cells:
            seen.setdefault(cell_key(c), c)
        self.cells = sorted(seen.values(), key=cell_key)

    def equivalences(self) -> list[Correspondence]:
        return [c for c in self.cells if c.relation is Relation.EQUIV]


def merge_alignments(*alignments: Alignment) -> Alignment:
    ids = {(a.onto1, a.onto2) for a in alignments}
    if len(ids) != 1:
        raise AlignmentError(f"cannot merge alignments over different ontology pairs {sorted(ids)}")
    (o1, o2), = ids
    return Alignment(o1, o2, [c for a in alignments for c in a.cells])


# -- configuration and name similarity -------------------------------------------------

@dataclass(frozen=True)
class MatcherConfig:
    synonyms: Mapping[str, frozenset[str]] = field(default_factory=dict)
    sim_threshold: float = 0.85
    lexical_weight: float = 0.5
    structural_weight: float = 0.25
    annotation_weight: float = 0.25
    max_iterations: int = 10

    def __post_init__(self):
        weights = (self.lexical_weight, self.structural_weight, self.annotation_weight)
        if not 0.0 <= self.sim_threshold <= 1.0 or any(not 0.0 <= w <= 1.0 for w in weights):
            raise AlignmentError("threshold and weights must lie in [0, 1]")
        if abs(sum(weights) - 1.0) > 1e-9:
            raise AlignmentError(f"matcher weights must sum to 1, got {sum(weights)}")


_CAMEL = re.compile(r"[A-Z]+(?=[A-Z][a-z])|[A-Z]?[a-z]+|[A-Z]+|\d+")


def tokens(text: str) -> list[str]:
    return [t.lower() for t in _CAMEL.findall(text)]


def normalize(text: str) -> str:
    return " ".join(tokens(text))


def load_synonyms(path: str | Path) -> dict[str, frozenset[str]]:
    """TSV ``term<TAB>synonym``; the relation is made symmetric."""
    table: dict[str, set[str]] = {}
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not all(p.strip() for p in parts):
            raise AlignmentError(f"{path}:{n}: expected term<TAB>synonym")
        a, b = normalize(parts[0]), normalize(parts[1])
        table.setdefault(a, set()).add(b)
        table.setdefault(b, set()).add(a)
    return {k: frozenset(v) for k, v in sorted(table.items())}


def _levenshtein_similarity(a: str, b: str) -> float:
    if not a and not b:
        return 1.0
    return 1.0 - kernels.levenshtein(a, b) / max(len(a), len(b))


def name_similarity(a: str, b: str, cfg: MatcherConfig | None = None) -> float:
    cfg = cfg or MatcherConfig()
    na, nb = normalize(a), normalize(b)
    if na == nb or nb in cfg.synonyms.get(na, ()):
        return 1.0
    return _levenshtein_similarity(na.replace(" ", ""), nb.replace(" ", ""))


def _stem(token: str) -> str:
    for suffix in ("ing", "ed", "er", "s"):
        if token.endswith(suffix) and len(token) - len(suffix) >= 3:
            token = token[: -len(suffix)]
            if len(token) >= 2 and token[-1] == token[-2] and token[-1] not in "aeiou":
                token = token[:-1]
            break
    return token


def label_role_similarity(concept: str, role: str, cfg: MatcherConfig | None = None) -> float:
    """Syntactic similarity between a concept label and a role label.

    The leading tokens of the concept, as many as the role has, are compared
    after light stemming, so ``SubmittedPaper`` meets ``submit``.
    """
    cfg = cfg or MatcherConfig()
    ct, rt = tokens(concept), tokens(role)
    if not ct or not rt:
        return 0.0
    head = "".join(_stem(t) for t in ct[: len(rt)])
    return max(name_similarity(concept, role, cfg),
               _levenshtein_similarity(head, "".join(_stem(t) for t in rt)))


# -- saturation ---------------------------------------------------------------------------

def saturate(onto: Ontology) -> Ontology:
    """Add implicit name-level subsumptions, including ones implied by role domains."""
    current = onto
    while True:
        told = {(ax.sub.name, ax.sup.name) for ax in current.axioms
                if isinstance(ax, SubClassOf) and isinstance(ax.sub, Atomic) and isinstance(ax.sup, Atomic)}
        new = set()
        for c, sups in current.hierarchy.items():
            for s in sups:
                if s != c and (c, s) not in told and c in current.concepts and s in current.concepts:
                    new.add(SubClassOf(Atomic(c), Atomic(s)))
        for c, defs in current.told_definitions.items():
            for d in defs:
                role = current.roles.get(getattr(d, "role", None))
                if role is not None and role.domain != c and role.domain in current.concepts \
                        and role.domain not in current.supers(c):
                    new.add(SubClassOf(Atomic(c), Atomic(role.domain)))
        new -= set(current.axioms)
        if not new:
            return current
        current = Ontology(current.id, set(current.concepts), dict(current.roles),
                           sorted({*current.axioms, *new}, key=axiom_key),
                           {k: list(v) for k, v in current.annotations.items()})


def _strict_supers(onto: Ontology, c: str) -> set[str]:
    return {s for s in onto.supers(c) if s != c and c not in onto.supers(s)}


def direct_supers(onto: Ontology, c: str) -> frozenset[str]:
    strict = _strict_supers(onto, c)
    return frozenset(s for s in strict if not any(s in _strict_supers(onto, e) for e in strict if e != s))


def direct_subs(onto: Ontology, c: str) -> frozenset[str]:
    return frozenset(d for d in onto.concepts if c in direct_supers(onto, d))


# -- simple matchers -----------------------------------------------------------------------

def _annotation_similarity(a: Sequence[str], b: Sequence[str], cfg: MatcherConfig) -> float | None:
    if not a or not b:
        return None
    return max(name_similarity(x, y, cfg) for x in a for y in b)


def _neighbours(onto: Ontology, name: str, is_role: bool) -> dict[str, set]:
    if is_role:
        role = onto.roles[name]
        return {"domain": {role.domain}, "range": {role.range} if role.kind == "Object" else set()}
    return {
        "supers": set(direct_supers(onto, name)),
        "subs": set(direct_subs(onto, name)),
        "out": {RoleRef(r.name) for r in onto.roles.values() if r.domain == name},
        "in": {RoleRef(r.name) for r in onto.roles.values() if r.range == name},
    }


def _entity_name(e: str | RoleRef) -> str:
    return e.name if isinstance(e, RoleRef) else e


def _structural(n1: dict[str, set], n2: dict[str, set], matched: set[tuple]) -> float | None:
    size1 = sum(len(v) for v in n1.values())
    size2 = sum(len(v) for v in n2.values())
    if size1 == 0 and size2 == 0:
        return None
    m = 0
    for cat in n1:
        m += sum(1 for a in n1[cat] for b in n2[cat] if (a, b) in matched)
    return m / (size1 + size2 - m)


def _combine(scores: dict[str, float | None], cfg: MatcherConfig) -> float:
    weights = {"Lexical": cfg.lexical_weight, "Structural": cfg.structural_weight,
               "Annotation": cfg.annotation_weight}
    present = {k: w for k, w in weights.items() if scores[k] is not None}
    total = sum(present.values())
    if total == 0:
        return 0.0
    return sum(w * scores[k] for k, w in present.items()) / total


def _mutual_best(scores: dict[tuple, float], threshold: float) -> set[tuple]:
    best1: dict[Any, tuple] = {}
    best2: dict[Any, tuple] = {}
    for (a, b), s in scores.items():
        if s < threshold:
            continue
        if a not in best1 or (-s, _entity_name(b)) < (-best1[a][1], _entity_name(best1[a][0])):
            best1[a] = (b, s)
        if b not in best2 or (-s, _entity_name(a)) < (-best2[b][1], _entity_name(best2[b][0])):
            best2[b] = (a, s)
    return {(a, b) for a, (b, _) in best1.items() if best2[b][0] == a}


def align_simple(o1: Ontology, o2: Ontology, cfg: MatcherConfig | None = None) -> Alignment:
    cfg = cfg or MatcherConfig()
    if o1.id == o2.id:
        raise SameOntology(f"both ontologies have id {o1.id!r}")
    pairs: list[tuple] = []
    for kind_roles in (False, True):
        left = sorted(o1.roles) if kind_roles else sorted(o1.concepts)
        right = sorted(o2.roles) if kind_roles else sorted(o2.concepts)
        wrap = RoleRef if kind_roles else str
        pairs.extend((wrap(a), wrap(b)) for a in left for b in right)

    lexical = {p: name_similarity(_entity_name(p[0]), _entity_name(p[1]), cfg) for p in pairs}
    annotation = {p: _annotation_similarity(o1.annotations.get(_entity_name(p[0]), ()),
                                            o2.annotations.get(_entity_name(p[1]), ()), cfg) for p in pairs}
    nb1 = {a: _neighbours(o1, _entity_name(a), isinstance(a, RoleRef)) for a, _ in pairs}
    nb2 = {b: _neighbours(o2, _entity_name(b), isinstance(b, RoleRef)) for _, b in pairs}

    # lexical seeds stay structural evidence, otherwise mutually dependent
    # neighbours (a role and its domain) would knock each other out
    seeds = _mutual_best(lexical, cfg.sim_threshold)
    matched = seeds
    detail: dict[tuple, dict[str, float | None]] = {}
    combined: dict[tuple, float] = {}
    for _ in range(cfg.max_iterations):
        evidence = seeds | matched
        for p in pairs:
            detail[p] = {"Lexical": lexical[p], "Structural": _structural(nb1[p[0]], nb2[p[1]], evidence),
                         "Annotation": annotation[p]}
            combined[p] = _combine(detail[p], cfg)
        nxt = _mutual_best(combined, cfg.sim_threshold)
        if nxt == matched:
            break
        matched = nxt

    cells = []
    for a, b in sorted(matched, key=lambda p: (isinstance(p[0], RoleRef), _entity_name(p[0]), _entity_name(p[1]))):
        present = [(s, k) for k, s in detail[(a, b)].items() if s is not None]
        provenance = max(present, key=lambda sk: sk[0])[1]
        left = a if isinstance(a, RoleRef) else Atomic(a)
        right = b if isinstance(b, RoleRef) else Atomic(b)
        cells.append(Correspondence(left, right, Relation.EQUIV, round(combined[(a, b)], 6), provenance))
    return Alignment(o1.id, o2.id, cells)


# -- subgraphs and complex correspondences -----------------------------------------------------

@dataclass(frozen=True)
class Property:
    role: str
    lower_bound: int
    domain: str
    range: str


@dataclass(frozen=True)
class SubGraph:
    ontology: Ontology = field(repr=False, compare=False)
    center: str
    direct_subs: frozenset[str]
    disjoints: frozenset[str]
    direct_supers: frozenset[str]
    properties: tuple[Property, ...]

    def formula(self) -> ConceptExpr:
        """Center conjoined with the property restrictions that have a positive lower bound."""
        return conj(Atomic(self.center), *(min_card(p.lower_bound, p.role, Atomic(p.range))
                                           for p in self.properties if p.lower_bound >= 1 and p.domain == self.center))


def extract_subgraph(onto: Ontology, c: str) -> SubGraph:
    if c not in onto.concepts:
        raise UnknownName(f"unknown concept {c!r} in ontology {onto.id}")
    disjoints = set()
    for ax in onto.axioms:
        if isinstance(ax, DisjointWith):
            if ax.left == c and ax.right != c:
                disjoints.add(ax.right)
            elif ax.right == c and ax.left != c:
                disjoints.add(ax.left)
    bounds: dict[str, int] = {}
    for d in onto.told_definitions.get(c, ()):
        if isinstance(d, (dl.Exists, dl.MinCard)):
            bounds[d.role] = max(bounds.get(d.role, 0), d.n)
    props = tuple(
        Property(r.name, bounds.get(r.name, 0) if r.domain == c else 0, r.domain, r.range)
        for r in sorted(onto.roles.values(), key=lambda r: r.name)
        if r.domain == c or r.range == c
    )
    return SubGraph(onto, c, direct_subs(onto, c) - {c}, frozenset(disjoints - {c}),
                    direct_supers(onto, c) - {c}, props)


class _Similarity:
    def __init__(self, simple: Alignment, o1: Ontology, o2: Ontology, cfg: MatcherConfig):
        self.cfg = cfg
        self.ids = (o1.id, o2.id)
        self.pairs: set[tuple[str, str]] = set()
        for cell in simple.equivalences():
            self.pairs.add((_side_name(cell.left), _side_name(cell.right)))

    def similar(self, x: str, ox: str, y: str, oy: str) -> bool:
        if ox == oy:
            return x == y
        pair = (x, y) if ox == self.ids[0] else (y, x)
        return pair in self.pairs or name_similarity(x, y, self.cfg) >= self.cfg.sim_threshold


def _side_name(e: Entity) -> str | None:
    if isinstance(e, RoleRef):
        return "role:" + e.name
    return e.name if isinstance(e, Atomic) else None


def subgraph_subsumes(sg1: SubGraph, sg2: SubGraph, simple: Alignment, cfg: MatcherConfig | None = None) -> bool:
    """True when ``sg1`` subsumes ``sg2``; empty conditions hold vacuously."""
    cfg = cfg or MatcherConfig()
    o1, o2 = sg1.ontology, sg2.ontology
    sim = _Similarity(simple, o1, o2, cfg)
    id1, id2 = o1.id, o2.id

    def cs(x: str, y: str) -> bool:
        return sim.similar(x, id1, y, id2)

    def rs(x: str, y: str) -> bool:
        if id1 != id2 and ("role:" + x, "role:" + y) in sim.pairs:
            return True
        return sim.similar(x, id1, y, id2)

    def gen(onto: Ontology, c: str) -> frozenset[str]:
        return onto.supers(c) if c in onto.concepts else frozenset((c,))

    def cs_gen(x: str, y: str) -> bool:
        return any(cs(a, b) for a in gen(o1, x) for b in gen(o2, y))

    if not all(any(cs(a, b) for b in sg2.direct_subs) for a in sg1.direct_subs):
        return False
    if not all(any(cs(a, b) for b in sg2.disjoints) for a in sg1.disjoints):
        return False
    if not all(any(cs_gen(a, b) for b in sg2.direct_supers) for a in sg1.direct_supers):
        return False
    for p1 in sg1.properties:
        ok = False
        for p2 in sg2.properties:
            if rs(p1.role, p2.role) and p1.lower_bound >= p2.lower_bound \
                    and cs_gen(p1.domain, p2.domain) and cs_gen(p1.range, p2.range):
                ok = True
                break
        if not ok:
            return False
    return True


def align_complex(o1: Ontology, o2: Ontology, simple: Alignment, cfg: MatcherConfig | None = None) -> Alignment:
    """Formula correspondences from subgraph subsumption and concept/role label matches."""
    cfg = cfg or MatcherConfig()
    if o1.id == o2.id:
        raise SameOntology(f"both ontologies have id {o1.id!r}")
    sim = _Similarity(simple, o1, o2, cfg)
    cells: list[Correspondence] = []
    sgs1 = {c: extract_subgraph(o1, c) for c in sorted(o1.concepts)}
    sgs2 = {c: extract_subgraph(o2, c) for c in sorted(o2.concepts)}
    for c1, sg1 in sgs1.items():
        for c2, sg2 in sgs2.items():
            f1, f2 = sg1.formula(), sg2.formula()
            if isinstance(f1, Atomic) and isinstance(f2, Atomic):
                continue
            if not (sim.similar(c1, o1.id, c2, o2.id) or (sg1.properties and sg2.properties)):
                continue
            down = subgraph_subsumes(sg1, sg2, simple, cfg)
            up = subgraph_subsumes(sg2, sg1, _swap(simple), cfg)
            if down and up:
                rel = Relation.EQUIV
            elif down:
                rel = Relation.SUBSUMES
            elif up:
                rel = Relation.SUBSUMED_BY
            else:
                continue
            cells.append(Correspondence(f1, f2, rel, 1.0, "Prop1"))
    cells.extend(_prop2(o1, o2, sim, cfg, flipped=False))
    cells.extend(c.swapped() for c in _prop2(o2, o1, _Similarity(_swap(simple), o2, o1, cfg), cfg, flipped=True))
    return Alignment(o1.id, o2.id, cells)


def _swap(a: Alignment) -> Alignment:
    return Alignment(a.onto2, a.onto1, [c.swapped() for c in a.cells])


def _prop2(oc: Ontology, orole: Ontology, sim: _Similarity, cfg: MatcherConfig, flipped: bool) -> list[Correspondence]:
    """Concept ``c`` of ``oc`` below a concept aligned to a role's domain or range gives ``c ⊑ ∃r.range``."""
    out = []
    for r in sorted(orole.roles.values(), key=lambda r: r.name):
        if r.kind != "Object":
            continue
        anchors = set(orole.supers(r.domain)) | set(orole.supers(r.range))
        for c in sorted(oc.concepts):
            score = label_role_similarity(c, r.name, cfg)
            if score < cfg.sim_threshold:
                continue
            strict = _strict_supers(oc, c)
            if any(sim.similar(s, oc.id, a, orole.id) for s in strict for a in anchors):
                out.append(Correspondence(Atomic(c), dl.exists(r.name, Atomic(r.range)),
                                          Relation.SUBSUMED_BY, round(score, 6), "Prop2"))
    return out


# -- serialization ------------------------------------------------------------------------------

def _entity_to_json(e: Entity, onto_id: str) -> Any:
    if isinstance(e, RoleRef):
        return {"role": f"{onto_id}#{e.name}"}
    return dl.expr_to_json(e, f"{onto_id}#")


def _entity_from_json(data: Any, onto_id: str) -> Entity:
    if isinstance(data, dict) and set(data) == {"role"}:
        prefix = f"{onto_id}#"
        if not data["role"].startswith(prefix):
            raise AlignmentError(f"role {data['role']!r} lacks namespace {prefix!r}")
        return RoleRef(data["role"][len(prefix):])
    return dl.expr_from_json(data, f"{onto_id}#")


def alignment_to_json(a: Alignment) -> dict:
    return {
        "onto1": a.onto1,
        "onto2": a.onto2,
        "cells": [
            {
                "entity1": _entity_to_json(c.left, a.onto1),
                "entity2": _entity_to_json(c.right, a.onto2),
                "relation": c.relation.value,
                "measure": round(c.confidence, 6),
                "provenance": c.provenance,
            }
            for c in a.cells
        ],
    }


def alignment_from_json(data: Mapping[str, Any]) -> Alignment:
    o1, o2 = data["onto1"], data["onto2"]
    cells = [
        Correspondence(_entity_from_json(c["entity1"], o1), _entity_from_json(c["entity2"], o2),
                       Relation(c["relation"]), float(c["measure"]), c.get("provenance", "Lexical"))
        for c in data.get("cells", [])
    ]
    return Alignment(o1, o2, cells)


def serialize_alignment(a: Alignment) -> str:
    return json.dumps(alignment_to_json(a), indent=2, ensure_ascii=False) + "\n"


def parse_alignment(text: str) -> Alignment:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise AlignmentError(f"alignment is not valid JSON: {exc}") from exc
    return alignment_from_json(data)


def iter_atomic_equivalences(a: Alignment) -> Iterable[tuple[str, str, str]]:
    """``(kind, left, right)`` for Equiv cells between names; kind is concept or role."""
    for c in a.equivalences():
        if isinstance(c.left, RoleRef) and isinstance(c.right, RoleRef):
            yield "role", c.left.name, c.right.name
        elif isinstance(c.left, Atomic) and isinstance(c.right, Atomic):
            yield "concept", c.left.name, c.right.name
