"""Networked global ontology: local ontologies plus the alignments between them.

Equivalence cells between names merge entities into global classes.
Subsumption cells between names become cross-ontology edges.  Formula cells
are kept for reference only.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .alignment import Alignment, Relation, iter_atomic_equivalences, parse_alignment
from .dl import Atomic, Ontology, equivalent, loads_ontology
from .errors import ConflictError, UnknownEntity, UnknownOntologyId
from .induction import Mapping as SourceMapping
from .induction import MappingSet, loads_mappings

CONCEPT, ROLE = "concept", "role"

Member = tuple[str, str, str]  # (kind, ontology id, local name)


@dataclass(frozen=True)
class GlobalClass:
    name: str
    kind: str
    members: tuple[tuple[str, str], ...]  # (ontology id, local name), sorted


@dataclass(frozen=True)
class EntityBinding:
    global_name: str
    bindings: tuple[tuple[str, str, SourceMapping | None], ...]


@dataclass
class GlobalOntology:
    ontologies: list[Ontology]
    alignments: list[Alignment]
    mappings: dict[str, MappingSet]
    classes: list[GlobalClass] = field(default_factory=list)
    cross_edges: list[tuple[str, str]] = field(default_factory=list)  # (sub class, sup class)
    _by_member: dict[Member, GlobalClass] = field(default_factory=dict, repr=False)
    _by_name: dict[str, list[GlobalClass]] = field(default_factory=dict, repr=False)

    def ontology(self, oid: str) -> Ontology:
        for o in self.ontologies:
            if o.id == oid:
                return o
        raise UnknownOntologyId(f"no ontology {oid!r} in the global ontology")

    def class_of(self, kind: str, oid: str, name: str) -> GlobalClass:
        try:
            return self._by_member[(kind, oid, name)]
        except KeyError:
            raise UnknownEntity(f"no {kind} {oid}#{name}") from None


class _UnionFind:
    def __init__(self, items: Iterable[Member]):
        self.parent = {i: i for i in items}

    def find(self, x: Member) -> Member:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: Member, b: Member) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            lo, hi = sorted((ra, rb))
            self.parent[hi] = lo


def _locally_equivalent(onto: Ontology, kind: str, a: str, b: str) -> bool:
    if kind == ROLE:
        return a == b
    return equivalent(onto, Atomic(a), Atomic(b))


def build_global(ontologies: Sequence[Ontology], alignments: Sequence[Alignment],
                 mappings: Mapping[str, MappingSet] | None = None) -> GlobalOntology:
    mappings = dict(mappings or {})
    by_id: dict[str, Ontology] = {}
    for o in ontologies:
        if o.id in by_id:
            raise ConflictError(f"ontology id {o.id!r} listed twice")
        by_id[o.id] = o
    for a in alignments:
        for oid in (a.onto1, a.onto2):
            if oid not in by_id:
                raise UnknownOntologyId(f"alignment refers to unknown ontology {oid!r}")
    for oid in mappings:
        if oid not in by_id:
            raise UnknownOntologyId(f"mappings given for unknown ontology {oid!r}")
    onts = [by_id[k] for k in sorted(by_id)]
    aligns = sorted(alignments, key=lambda a: (a.onto1, a.onto2))

    members: list[Member] = []
    for o in onts:
        members.extend((CONCEPT, o.id, c) for c in sorted(o.concepts))
        members.extend((ROLE, o.id, r) for r in sorted(o.roles))
    uf = _UnionFind(members)
    for a in aligns:
        for kind, left, right in iter_atomic_equivalences(a):
            l, r = (kind, a.onto1, left), (kind, a.onto2, right)
            if l not in uf.parent or r not in uf.parent:
                raise UnknownEntity(f"alignment cell names unknown {kind} {a.onto1}#{left} or {a.onto2}#{right}")
            uf.union(l, r)

    groups: dict[Member, list[Member]] = {}
    for m in members:
        groups.setdefault(uf.find(m), []).append(m)
    for group in groups.values():
        per_onto: dict[str, list[str]] = {}
        for kind, oid, name in group:
            per_onto.setdefault(oid, []).append(name)
        for oid, names in per_onto.items():
            kind = group[0][0]
            first = names[0]
            for other in names[1:]:
                if not _locally_equivalent(by_id[oid], kind, first, other):
                    raise ConflictError(f"alignments merge {oid}#{first} and {oid}#{other}, "
                                        f"which are not equivalent in {oid}")

    base_names = {root: min(name for _, _, name in group) for root, group in groups.items()}
    usage: dict[tuple[str, str], int] = {}
    for root, name in base_names.items():
        usage[(root[0], name)] = usage.get((root[0], name), 0) + 1
    classes = []
    go = GlobalOntology(onts, aligns, mappings)
    for root, group in sorted(groups.items()):
        kind = root[0]
        name = base_names[root]
        if usage[(kind, name)] > 1:
            # same local name in several unmerged classes: qualify by the least member
            name = "{}#{}".format(*min((oid, n) for _, oid, n in group))
        gc = GlobalClass(name, kind, tuple(sorted((oid, n) for _, oid, n in group)))
        classes.append(gc)
        for m in group:
            go._by_member[m] = gc
        go._by_name.setdefault(name, []).append(gc)
    go.classes = sorted(classes, key=lambda c: (c.kind, c.name))

    edges = set()
    for a in aligns:
        for cell in a.cells:
            if cell.relation not in (Relation.SUBSUMED_BY, Relation.SUBSUMES):
                continue
            if not (isinstance(cell.left, Atomic) and isinstance(cell.right, Atomic)):
                continue
            l = go.class_of(CONCEPT, a.onto1, cell.left.name).name
            r = go.class_of(CONCEPT, a.onto2, cell.right.name).name
            edges.add((l, r) if cell.relation is Relation.SUBSUMED_BY else (r, l))
    go.cross_edges = sorted(edges)
    _check_acyclic(go)
    return go


def _check_acyclic(go: GlobalOntology) -> None:
    """Reject cycles that pass through a cross-ontology edge."""
    graph: dict[str, set[str]] = {}
    for o in go.ontologies:
        for c, sups in o.hierarchy.items():
            if c not in o.concepts:
                continue
            gc = go.class_of(CONCEPT, o.id, c).name
            for s in sups:
                if s in o.concepts:
                    gs = go.class_of(CONCEPT, o.id, s).name
                    if gs != gc:
                        graph.setdefault(gc, set()).add(gs)
    for sub, sup in go.cross_edges:
        graph.setdefault(sub, set()).add(sup)

    def reaches(start: str, goal: str) -> bool:
        seen, stack = set(), [start]
        while stack:
            n = stack.pop()
            if n == goal:
                return True
            if n not in seen:
                seen.add(n)
                stack.extend(graph.get(n, ()))
        return False

    for sub, sup in go.cross_edges:
        if sub == sup or reaches(sup, sub):
            raise ConflictError(f"cross-ontology subsumption {sub} ⊑ {sup} closes a cycle")


def _lookup(go: GlobalOntology, name: str, kind: str | None) -> GlobalClass:
    kinds = (kind,) if kind else (CONCEPT, ROLE)
    if "#" in name and name not in go._by_name:
        oid, local = name.split("#", 1)
        for k in kinds:
            if (k, oid, local) in go._by_member:
                return go._by_member[(k, oid, local)]
        raise UnknownEntity(f"no entity {name!r}")
    for k in kinds:
        for gc in go._by_name.get(name, ()):
            if gc.kind == k:
                return gc
    raise UnknownEntity(f"no global entity named {name!r}")


def resolve_entity(go: GlobalOntology, name: str, include_specializations: bool = False,
                   kind: str | None = None) -> EntityBinding:
    """Members of the class named by ``name`` (global or ``onto#local``) with their source mappings."""
    gc = _lookup(go, name, kind)
    classes = [gc]
    if include_specializations and gc.kind == CONCEPT:
        below = {gc.name}
        changed = True
        while changed:
            changed = False
            for sub, sup in go.cross_edges:
                if sup in below and sub not in below:
                    below.add(sub)
                    changed = True
        classes = [c for c in go.classes if c.kind == CONCEPT and c.name in below]
    bindings = []
    for c in classes:
        for oid, local in c.members:
            ms = go.mappings.get(oid)
            bindings.append((oid, local, ms.for_entity(local) if ms else None))
    return EntityBinding(gc.name, tuple(sorted(bindings, key=lambda b: (b[0], b[1]))))


# -- files ------------------------------------------------------------------------------------------

def _rel(path: Path, base: Path) -> str:
    return Path(os.path.relpath(path.resolve(), base.resolve())).as_posix()


def global_to_json(go: GlobalOntology, ontology_paths: Mapping[str, str | Path],
                   alignment_paths: Sequence[str | Path], mapping_paths: Mapping[str, str | Path],
                   out_path: str | Path) -> dict:
    base = Path(out_path).parent
    return {
        "ontologies": [
            {
                "id": o.id,
                "path": _rel(Path(ontology_paths[o.id]), base),
                **({"mappings": _rel(Path(mapping_paths[o.id]), base)} if o.id in mapping_paths else {}),
            }
            for o in go.ontologies
        ],
        "alignments": [_rel(Path(p), base) for p in alignment_paths],
        "classes": [
            {"name": c.name, "kind": c.kind, "members": [f"{oid}#{n}" for oid, n in c.members]}
            for c in go.classes
        ],
        "crossEdges": [{"sub": s, "sup": t} for s, t in go.cross_edges],
    }


def dumps_global(data: dict) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def load_global(path: str | Path) -> GlobalOntology:
    """Rebuild from the referenced files; the stored class table must agree."""
    path = Path(path)
    data = json.loads(path.read_text(encoding="utf-8"))
    base = path.parent
    ontologies, mappings = [], {}
    for entry in data["ontologies"]:
        onto = loads_ontology((base / entry["path"]).read_text(encoding="utf-8"))
        if onto.id != entry["id"]:
            raise UnknownOntologyId(f"{entry['path']} holds ontology {onto.id!r}, expected {entry['id']!r}")
        ontologies.append(onto)
        if "mappings" in entry:
            mappings[onto.id] = loads_mappings((base / entry["mappings"]).read_text(encoding="utf-8"))
    alignments = [parse_alignment((base / p).read_text(encoding="utf-8")) for p in data.get("alignments", [])]
    go = build_global(ontologies, alignments, mappings)
    stored = [(c["kind"], c["name"], tuple(c["members"])) for c in data.get("classes", [])]
    built = [(c.kind, c.name, tuple(f"{oid}#{n}" for oid, n in c.members)) for c in go.classes]
    if stored and sorted(stored) != sorted(built):
        raise ConflictError(f"class table in {path} does not match its ontologies and alignments")
    return go
