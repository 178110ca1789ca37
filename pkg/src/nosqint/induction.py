"""Local ontology induction from one document or column-family database.

Containers become concepts and key labels become roles.  Keys whose values
are identifiers of another container become object roles.  Keys with a small,
repetitive set of text values are type-definition keys: each value becomes a
concept, and the values are ordered by a concept lattice.  Nested maps are
reified into concepts of their own.  Finally each type concept is enriched
with the good common subsumer of its sampled instances' most specific
concepts.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from . import dl
from .dl import ABox, Atomic, Lit, Ontology, Role, SubClassOf, axiom_key, conj, conjuncts
from .errors import InductionError, LogParseError, UnknownContainer
from .fca import FormalContext, build_lattice, lattice_to_axioms
from .store import ContainerRef, SourceCatalog

CONCEPT_TO_CONTAINER = "ConceptToContainer"
CONCEPT_TO_TYPE_VALUE = "ConceptToTypeValue"
DATATYPE_ROLE_TO_KEY = "DatatypeRoleToKey"
OBJECT_ROLE_TO_KEY = "ObjectRoleToKey"
CONCEPT_TO_NESTED_PATH = "ConceptToNestedPath"
MAPPING_KINDS = (CONCEPT_TO_CONTAINER, CONCEPT_TO_TYPE_VALUE, DATATYPE_ROLE_TO_KEY,
                 OBJECT_ROLE_TO_KEY, CONCEPT_TO_NESTED_PATH)

SCALAR, LIST, NESTED = "Scalar", "List", "NestedMap"


# -- sampling strategies ---------------------------------------------------------

@dataclass(frozen=True)
class Full:
    def __str__(self) -> str:
        return "full"


@dataclass(frozen=True)
class FrequencyLog:
    """Restrict to the ``top_n`` most frequently accessed keys of an access log."""

    path: str
    top_n: int

    def __post_init__(self):
        if self.top_n < 1:
            raise ValueError("top_n must be >= 1")

    def __str__(self) -> str:
        return f"freq:{self.path}:{self.top_n}"


@dataclass(frozen=True)
class IncrementalHook:
    def __str__(self) -> str:
        return "incremental"


SamplingStrategy = Full | FrequencyLog | IncrementalHook


def parse_strategy(text: str) -> SamplingStrategy:
    """``full`` | ``incremental`` | ``freq:LOG:TOPN``."""
    if text == "full":
        return Full()
    if text == "incremental":
        return IncrementalHook()
    if text.startswith("freq:"):
        path, sep, top = text[len("freq:"):].rpartition(":")
        if not sep or not path:
            raise ValueError(f"bad strategy {text!r}; expected freq:LOG:TOPN")
        return FrequencyLog(path, int(top))
    raise ValueError(f"unknown strategy {text!r}")


def read_frequency_log(path: str | Path) -> Counter:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except (OSError, UnicodeDecodeError) as exc:
        raise LogParseError(f"cannot read access log {path}: {exc}") from exc
    counts: Counter = Counter()
    for n, line in enumerate(lines, 1):
        key = line.strip()
        if not key:
            continue
        if any(ch.isspace() for ch in key):
            raise LogParseError(f"{path}:{n}: expected one entry key per line")
        counts[key] += 1
    return counts


def sample_entries(catalog: SourceCatalog, ref: ContainerRef, strategy: SamplingStrategy) -> dict[str, dict]:
    entries = catalog.entries(ref)
    if isinstance(strategy, FrequencyLog):
        counts = read_frequency_log(strategy.path)
        present = sorted((k for k in counts if k in entries), key=lambda k: (-counts[k], k))
        chosen = set(present[: strategy.top_n])
        return {k: v for k, v in entries.items() if k in chosen}
    return dict(entries)


# -- configuration and profiles -----------------------------------------------------

@dataclass(frozen=True)
class InductionConfig:
    fk_threshold: float = 0.8
    type_abs: int = 12
    type_ratio: float = 0.05
    # average occurrences per distinct value; keeps unique free text out of type keys
    type_min_repeat: float = 2.0
    msc_depth: int = 2
    enrich: bool = True
    max_context_objects: int = 10_000
    value_sample_limit: int = 1_000


@dataclass
class KeyProfile:
    key: str
    source: ContainerRef
    path: tuple[str, ...] = ()
    observed_kinds: set[str] = field(default_factory=set)
    distinct_values: int = 0
    total_occurrences: int = 0
    value_sample: list[Any] = field(default_factory=list)
    ref_target: ContainerRef | None = None
    scalar_kinds: Counter = field(default_factory=Counter)
    entry_count: int = 0

    @property
    def key_path(self) -> tuple[str, ...]:
        return (*self.path, self.key)


def _hashable(value: Any) -> Any:
    if isinstance(value, (dict, list)):
        return json.dumps(value, sort_keys=True)
    return (type(value).__name__ if isinstance(value, bool) else "v", value)


def _profile_entries(entries: Mapping[str, Mapping[str, Any]], source: ContainerRef,
                     path: tuple[str, ...], config: InductionConfig) -> list[KeyProfile]:
    profiles: dict[str, KeyProfile] = {}
    distinct: dict[str, set] = {}
    for _, entry in sorted(entries.items()):
        for key, value in entry.items():
            prof = profiles.get(key)
            if prof is None:
                prof = profiles[key] = KeyProfile(key, source, path)
                distinct[key] = set()
            prof.entry_count += 1
            if value is None:
                continue
            if isinstance(value, dict):
                prof.observed_kinds.add(NESTED)
                continue
            if isinstance(value, list):
                prof.observed_kinds.add(LIST)
                if any(isinstance(v, dict) for v in value):
                    prof.observed_kinds.add(NESTED)
                items = [v for v in value if v is not None and not isinstance(v, (dict, list))]
            else:
                prof.observed_kinds.add(SCALAR)
                items = [value]
            for v in items:
                prof.total_occurrences += 1
                prof.scalar_kinds[dl_datatype(v)] += 1
                distinct[key].add(_hashable(v))
                if len(prof.value_sample) < config.value_sample_limit:
                    prof.value_sample.append(v)
    for key, prof in profiles.items():
        prof.distinct_values = len(distinct[key])
    return [profiles[k] for k in sorted(profiles)]


def dl_datatype(value: Any) -> str:
    if isinstance(value, bool):
        return "Bool"
    if isinstance(value, (int, float)):
        return "Number"
    return "Text"


def profile_container(catalog: SourceCatalog, ref: ContainerRef, strategy: SamplingStrategy = Full(),
                      config: InductionConfig | None = None) -> list[KeyProfile]:
    """One profile per top-level key label observed in the sampled entries."""
    config = config or InductionConfig()
    return _profile_entries(sample_entries(catalog, ref, strategy), ref, (), config)


def detect_foreign_keys(profiles: Sequence[KeyProfile], catalog: SourceCatalog,
                        threshold: float = 0.8) -> list[KeyProfile]:
    """Mark keys whose text values are mostly entry keys of exactly one container."""
    for prof in profiles:
        prof.ref_target = None
        values = [v for v in prof.value_sample if isinstance(v, str)]
        if not values or len(values) < len(prof.value_sample):
            continue
        db = catalog.database(prof.source.database)
        hits = []
        for cname in sorted(db.containers):
            keys = db.containers[cname]
            matched = sum(1 for v in values if v in keys)
            if matched / len(values) >= threshold:
                hits.append(ContainerRef(db.name, cname, db.kind))
        if len(hits) == 1:
            prof.ref_target = hits[0]
    return list(profiles)


def detect_type_keys(profiles: Sequence[KeyProfile], config: InductionConfig | None = None) -> list[str]:
    config = config or InductionConfig()
    out = []
    for prof in profiles:
        if prof.ref_target is not None or prof.total_occurrences == 0:
            continue
        if NESTED in prof.observed_kinds or set(prof.scalar_kinds) != {"Text"}:
            continue
        limit = max(config.type_abs, config.type_ratio * prof.total_occurrences)
        if prof.distinct_values > limit:
            continue
        if prof.total_occurrences < config.type_min_repeat * prof.distinct_values:
            continue
        out.append(prof.key)
    return out


# -- mappings --------------------------------------------------------------------------

@dataclass(frozen=True)
class Mapping:
    entity: str
    kind: str
    source: ContainerRef
    key_path: tuple[str, ...] = ()
    target: ContainerRef | None = None
    value: str | None = None

    def __post_init__(self):
        if self.kind not in MAPPING_KINDS:
            raise ValueError(f"unknown mapping kind {self.kind!r}")
        if self.kind == OBJECT_ROLE_TO_KEY and self.target is None:
            raise ValueError(f"object role mapping {self.entity} needs a target")

    def to_json(self) -> dict:
        data: dict[str, Any] = {
            "entity": self.entity,
            "kind": self.kind,
            "database": self.source.database,
            "container": self.source.container,
            "containerKind": self.source.kind.value,
            "keyPath": list(self.key_path),
        }
        if self.value is not None:
            data["value"] = self.value
        if self.target is not None:
            data["target"] = self.target.to_json()
        return data

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "Mapping":
        source = ContainerRef.from_json({"database": data["database"], "container": data["container"],
                                         "kind": data.get("containerKind", "Collection")})
        target = ContainerRef.from_json(data["target"]) if data.get("target") else None
        return cls(data["entity"], data["kind"], source, tuple(data.get("keyPath", ())), target, data.get("value"))


@dataclass
class MappingSet:
    entries: list[Mapping] = field(default_factory=list)

    def for_entity(self, entity: str) -> Mapping | None:
        for m in self.entries:
            if m.entity == entity:
                return m
        return None

    def to_json(self) -> list:
        return [m.to_json() for m in self.entries]

    @classmethod
    def from_json(cls, data: Iterable[Mapping[str, Any]]) -> "MappingSet":
        return cls([Mapping.from_json(d) for d in data])


def dumps_mappings(ms: MappingSet) -> str:
    return json.dumps(ms.to_json(), indent=2, ensure_ascii=False) + "\n"


def loads_mappings(text: str) -> MappingSet:
    return MappingSet.from_json(json.loads(text))


# -- induction ---------------------------------------------------------------------------

_IDENT = re.compile(r"[^0-9A-Za-z_]")


def sanitize(name: str) -> str:
    out = _IDENT.sub("_", name.strip()) or "_"
    return "_" + out if out[0].isdigit() else out


def role_label(key: str) -> str:
    return "has" + key[:1].upper() + key[1:]


@dataclass
class _EntitySet:
    concept: str
    source: ContainerRef
    path: tuple[str, ...]
    entries: dict[str, dict]
    individual_prefix: str


@dataclass
class InductionResult:
    ontology: Ontology
    mappings: MappingSet
    profiles: dict[str, list[KeyProfile]]
    abox: ABox


class _Inducer:
    def __init__(self, catalog: SourceCatalog, database: str, strategy: SamplingStrategy, config: InductionConfig):
        self.catalog = catalog
        self.db = catalog.database(database)
        self.strategy = strategy
        self.config = config
        self.concepts: set[str] = set()
        self.roles: dict[str, Role] = {}
        self.axioms: list = []
        self.annotations: dict[str, list[str]] = {}
        self.mappings: list[Mapping] = []
        self.abox = ABox()
        self.container_concept: dict[str, str] = {}

    def _fresh(self, base: str) -> str:
        name, i = base, 2
        while name in self.concepts or name in self.roles:
            name, i = f"{base}{i}", i + 1
        return name

    def _add_concept(self, base: str, mapping_kind: str, source: ContainerRef, path: tuple[str, ...],
                     value: str | None = None) -> str:
        name = self._fresh(sanitize(base))
        self.concepts.add(name)
        self.mappings.append(Mapping(name, mapping_kind, source, path, None, value))
        return name

    def run(self) -> InductionResult:
        sets: list[_EntitySet] = []
        for cname in sorted(self.db.containers):
            ref = ContainerRef(self.db.name, cname, self.db.kind)
            concept = self._add_concept(cname, CONCEPT_TO_CONTAINER, ref, ())
            self.container_concept[cname] = concept
            entries = sample_entries(self.catalog, ref, self.strategy)
            sets.append(_EntitySet(concept, ref, (), entries, cname))

        profiles: dict[str, list[KeyProfile]] = {}
        queue = list(sets)
        all_sets = []
        while queue:
            es = queue.pop(0)
            all_sets.append(es)
            profs = _profile_entries(es.entries, es.source, es.path, self.config)
            detect_foreign_keys([p for p in profs if NESTED not in p.observed_kinds], self.catalog,
                                self.config.fk_threshold)
            profiles[es.concept] = profs
            for prof in profs:
                if NESTED in prof.observed_kinds:
                    queue.append(self._nested_set(es, prof.key))

        label_count = Counter(p.key for profs in profiles.values() for p in profs)
        by_concept = {es.concept: es for es in all_sets}
        nested_children = {(es.source, es.path): es.concept for es in all_sets if es.path}

        for es in all_sets:
            self._add_roles(es, profiles[es.concept], label_count, nested_children)
        for es in all_sets:
            self._type_pattern(es, profiles[es.concept])
        self._build_abox(all_sets, profiles, nested_children)
        onto = self._ontology()
        if self.config.enrich:
            onto = self._enrich(onto, by_concept)
        return InductionResult(onto, MappingSet(self.mappings), profiles, self.abox)

    def _nested_set(self, parent: _EntitySet, key: str) -> _EntitySet:
        entries: dict[str, dict] = {}
        for pkey, entry in sorted(parent.entries.items()):
            value = entry.get(key)
            if isinstance(value, dict):
                entries[f"{pkey}/{key}"] = value
            elif isinstance(value, list):
                for i, v in enumerate(value):
                    if isinstance(v, dict):
                        entries[f"{pkey}/{key}/{i}"] = v
        path = (*parent.path, key)
        concept = self._add_concept(f"{parent.concept}_{key}", CONCEPT_TO_NESTED_PATH, parent.source, path)
        return _EntitySet(concept, parent.source, path, entries, parent.individual_prefix)

    def _add_roles(self, es: _EntitySet, profs: list[KeyProfile], label_count: Counter,
                   nested_children: dict) -> None:
        for prof in profs:
            base = prof.key if label_count[prof.key] == 1 else f"{es.concept}_{prof.key}"
            name = sanitize(base)
            if name in self.roles or name in self.concepts:
                name = self._fresh(name)
            key_path = prof.key_path
            if NESTED in prof.observed_kinds:
                child = nested_children[(es.source, key_path)]
                role = Role(name, "Object", es.concept, child)
                mapping = Mapping(name, OBJECT_ROLE_TO_KEY, es.source, key_path, es.source)
            elif prof.ref_target is not None:
                target_concept = self.container_concept[prof.ref_target.container]
                role = Role(name, "Object", es.concept, target_concept)
                mapping = Mapping(name, OBJECT_ROLE_TO_KEY, es.source, key_path, prof.ref_target)
            else:
                role = Role(name, "Datatype", es.concept, _vote(prof.scalar_kinds))
                mapping = Mapping(name, DATATYPE_ROLE_TO_KEY, es.source, key_path)
            self.roles[name] = role
            self.mappings.append(mapping)
            self.annotations[name] = [role_label(prof.key)]
            prof.role = name  # type: ignore[attr-defined]

    def _type_pattern(self, es: _EntitySet, profs: list[KeyProfile]) -> None:
        es.type_concepts = {}  # type: ignore[attr-defined]
        for key in detect_type_keys(profs, self.config):
            values = sorted({v for entry in es.entries.values() for v in _text_values(entry.get(key))})
            concept_of = {}
            for v in values:
                concept_of[v] = self._add_concept(v, CONCEPT_TO_TYPE_VALUE, es.source, (*es.path, key), v)
                self.axioms.append(SubClassOf(Atomic(concept_of[v]), Atomic(es.concept)))
            table = {}
            for ekey in sorted(es.entries)[: self.config.max_context_objects]:
                vals = _text_values(es.entries[ekey].get(key))
                if vals:
                    table[ekey] = [concept_of[v] for v in vals]
            ctx = FormalContext.from_table(table, [concept_of[v] for v in values])
            self.axioms.extend(lattice_to_axioms(build_lattice(ctx), ctx))
            es.type_concepts[key] = concept_of  # type: ignore[attr-defined]

    def _build_abox(self, sets: list[_EntitySet], profiles: dict[str, list[KeyProfile]], nested_children: dict) -> None:
        types = self.abox.type_assertions
        roles = self.abox.role_assertions
        for es in sets:
            for ekey, entry in sorted(es.entries.items()):
                ind = f"{es.individual_prefix}:{ekey}"
                types.setdefault(ind, set()).add(es.concept)
                for key, concept_of in es.type_concepts.items():  # type: ignore[attr-defined]
                    types[ind].update(concept_of[v] for v in _text_values(entry.get(key)))
                for prof in profiles[es.concept]:
                    if prof.key not in entry or entry[prof.key] is None:
                        continue
                    value = entry[prof.key]
                    items = value if isinstance(value, list) else [value]
                    out = roles.setdefault(ind, [])
                    if NESTED in prof.observed_kinds:
                        suffix = [f"/{prof.key}"] if isinstance(value, dict) else \
                            [f"/{prof.key}/{i}" for i, v in enumerate(items) if isinstance(v, dict)]
                        out.extend((prof.role, f"{es.individual_prefix}:{ekey}{s}") for s in suffix)
                    elif prof.ref_target is not None:
                        out.extend((prof.role, f"{prof.ref_target.container}:{v}") for v in items if isinstance(v, str))
                    else:
                        out.extend((prof.role, Lit(v)) for v in items if v is not None)

    def _ontology(self) -> Ontology:
        return Ontology(self.db.name, set(self.concepts), dict(self.roles),
                        sorted(set(self.axioms), key=axiom_key), dict(self.annotations))

    def _enrich(self, onto: Ontology, sets: dict[str, _EntitySet]) -> Ontology:
        extra = []
        reasoner_onto = onto
        for es in sets.values():
            for concept_of in es.type_concepts.values():  # type: ignore[attr-defined]
                for concept in sorted(concept_of.values()):
                    instances = sorted(i for i, names in self.abox.type_assertions.items() if concept in names)
                    if not instances:
                        continue
                    mscs = [dl.msc(reasoner_onto, self.abox, i, self.config.msc_depth) for i in instances]
                    common = dl.gcs(reasoner_onto, mscs, role_depth=self.config.msc_depth)
                    new = [c for c in conjuncts(common)
                           if not dl.subsumes(reasoner_onto, c, Atomic(concept))]
                    if new:
                        extra.append(SubClassOf(Atomic(concept), conj(new)))
        if not extra:
            return onto
        return Ontology(onto.id, onto.concepts, onto.roles, sorted({*onto.axioms, *extra}, key=axiom_key),
                        onto.annotations)


def _text_values(value: Any) -> list[str]:
    if isinstance(value, str):
        return [value]
    if isinstance(value, list):
        return [v for v in value if isinstance(v, str)]
    return []


def _vote(kinds: Counter) -> str:
    total = sum(kinds.values())
    if not total:
        return "Text"
    kind, count = sorted(kinds.items(), key=lambda kv: (-kv[1], kv[0]))[0]
    return kind if count * 2 > total else "Text"


def induce(catalog: SourceCatalog, database: str, strategy: SamplingStrategy = Full(),
           config: InductionConfig | None = None) -> InductionResult:
    return _Inducer(catalog, database, strategy, config or InductionConfig()).run()


def induce_local(catalog: SourceCatalog, database: str, strategy: SamplingStrategy = Full(),
                 config: InductionConfig | None = None) -> tuple[Ontology, MappingSet]:
    result = induce(catalog, database, strategy, config)
    return result.ontology, result.mappings


# -- incremental hook -----------------------------------------------------------------------

@dataclass
class ChangeReport:
    added_concepts: list[str] = field(default_factory=list)
    removed_concepts: list[str] = field(default_factory=list)
    added_roles: list[str] = field(default_factory=list)
    removed_roles: list[str] = field(default_factory=list)
    added_axioms: list = field(default_factory=list)
    removed_axioms: list = field(default_factory=list)

    @property
    def empty(self) -> bool:
        """No label was introduced or deleted; axiom changes alone do not count."""
        return not (self.added_concepts or self.removed_concepts or self.added_roles or self.removed_roles)


@dataclass
class IncrementalState:
    catalog: SourceCatalog
    database: str
    ontology: Ontology
    mappings: MappingSet
    profiles: dict[str, list[KeyProfile]]
    config: InductionConfig = field(default_factory=InductionConfig)


def start_incremental(catalog: SourceCatalog, database: str, config: InductionConfig | None = None) -> IncrementalState:
    config = config or InductionConfig()
    result = induce(catalog, database, IncrementalHook(), config)
    return IncrementalState(catalog, database, result.ontology, result.mappings, result.profiles, config)


def incremental_update(state: IncrementalState, new_entry: tuple[ContainerRef, str, dict]) -> tuple[IncrementalState, ChangeReport]:
    """Apply one insert/update and report which schema labels appeared or vanished."""
    ref, key, entry = new_entry
    if ref.database != state.database:
        raise UnknownContainer(f"{ref} is not part of database {state.database}")
    if not isinstance(entry, dict):
        raise InductionError("inserted entry must be a map")
    catalog = state.catalog.with_entry(ref, key, entry)
    result = induce(catalog, state.database, IncrementalHook(), state.config)
    old, new = state.ontology, result.ontology
    old_ax, new_ax = set(old.axioms), set(new.axioms)
    report = ChangeReport(
        sorted(new.concepts - old.concepts),
        sorted(old.concepts - new.concepts),
        sorted(set(new.roles) - set(old.roles)),
        sorted(set(old.roles) - set(new.roles)),
        sorted(new_ax - old_ax, key=axiom_key),
        sorted(old_ax - new_ax, key=axiom_key),
    )
    return IncrementalState(catalog, state.database, new, result.mappings, result.profiles, state.config), report
