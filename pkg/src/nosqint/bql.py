"""Bridge Query Language: compile SPARQL basic graph patterns into per-source
programs of ``get`` and ``foreach .. in`` steps, execute them, and render
them as procedural plans.

Relation columns are named after query variables.  Each step carries
forward only the columns later steps or the answer still need.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from .errors import (BqlError, CrossSourceJoin, SchemaMismatch, UnknownEntity, UnmappedPredicate,
                     UnresolvableType, UnsupportedFeature)
from .globalont import CONCEPT, ROLE, GlobalOntology, resolve_entity
from .induction import (CONCEPT_TO_CONTAINER, CONCEPT_TO_TYPE_VALUE, DATATYPE_ROLE_TO_KEY, OBJECT_ROLE_TO_KEY,
                        MappingSet)
from .sparql import Iri, Literal, SparqlQuery, TriplePattern, Var
from .store import KEY, ContainerKind, ContainerRef, Filter, SourceCatalog, sort_key

ANSWER = "ans"


@dataclass(frozen=True)
class LoopVar:
    name: str


@dataclass(frozen=True)
class Get:
    container: ContainerRef
    filters: tuple[Filter, ...] = ()
    projections: tuple[str, ...] = ()


@dataclass(frozen=True)
class ForEachGet:
    loop_var: str
    input_relation: str
    input_attribute: str
    get: Get


@dataclass(frozen=True)
class Step:
    name: str
    schema: tuple[str, ...]
    body: Get | ForEachGet
    bindings: tuple[tuple[str, str], ...] = ()  # (column, store attribute)
    carry: tuple[str, ...] = ()  # input columns copied to the output

    def __post_init__(self):
        expected = (*self.carry, *(c for c, _ in self.bindings))
        if tuple(self.schema) != expected:
            raise SchemaMismatch(f"step {self.name}: schema {self.schema} does not match {expected}")


@dataclass(frozen=True)
class BqlProgram:
    source: str
    steps: tuple[Step, ...]
    answer_relation: str = ANSWER
    output: tuple[str, ...] = ()

    def __post_init__(self):
        defined: dict[str, tuple[str, ...]] = {}
        for step in self.steps:
            if step.name in defined:
                raise SchemaMismatch(f"relation {step.name} defined twice")
            if isinstance(step.body, ForEachGet):
                schema = defined.get(step.body.input_relation)
                if schema is None:
                    raise SchemaMismatch(f"step {step.name} reads undefined relation {step.body.input_relation}")
                missing = [c for c in (step.body.input_attribute, *step.carry) if c not in schema]
                if missing:
                    raise SchemaMismatch(f"step {step.name} reads unknown columns {missing}")
            defined[step.name] = step.schema
        if self.steps:
            last = defined.get(self.answer_relation)
            if last is None:
                raise SchemaMismatch(f"answer relation {self.answer_relation} is never defined")
            if any(c not in last for c in self.output):
                raise SchemaMismatch(f"answer relation lacks output columns {self.output}")


@dataclass(frozen=True)
class ResultTable:
    schema: tuple[str, ...]
    rows: tuple[tuple[Any, ...], ...]

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.schema):
                raise SchemaMismatch(f"row {row} does not fit schema {self.schema}")


# -- text form ------------------------------------------------------------------------------

def _value_text(v: Any) -> str:
    if isinstance(v, LoopVar):
        return v.name
    if isinstance(v, str):
        return "'" + v.replace("\\", "\\\\").replace("'", "\\'") + "'"
    return json.dumps(v)


def _get_text(g: Get) -> str:
    filters = ", ".join(f"{f.attribute}{f.comparator}{_value_text(f.operand)}" for f in g.filters)
    return f"{g.container}.get({{{filters}}},{{{', '.join(g.projections)}}})"


def _source_attribute(program: BqlProgram, relation: str, column: str) -> str:
    """Store attribute that first populated ``column`` on the way to ``relation``."""
    steps = {s.name: s for s in program.steps}
    step = steps[relation]
    while True:
        for col, attr in step.bindings:
            if col == column:
                return attr
        if not isinstance(step.body, ForEachGet):
            return column
        if step.body.input_attribute == column and column not in step.carry:
            return column
        step = steps[step.body.input_relation]


def render_program(p: BqlProgram) -> str:
    """Surface syntax; a ``foreach`` names the store attribute it iterates."""
    lines = []
    for s in p.steps:
        head = f"{s.name}({', '.join(s.schema)}) = "
        if isinstance(s.body, Get):
            lines.append(head + _get_text(s.body))
        else:
            b = s.body
            attr = _source_attribute(p, b.input_relation, b.input_attribute)
            lines.append(head + f"foreach {b.loop_var} in {b.input_relation}.{attr} : {_get_text(b.get)}")
    return "\n".join(lines)


def explain(programs: Sequence[BqlProgram]) -> str:
    return "\n\n".join(render_program(p) for p in programs) + "\n"


# -- translation --------------------------------------------------------------------------------

@dataclass
class _Node:
    var: str
    container: ContainerRef | None = None
    filters: list[Filter] = field(default_factory=list)
    typed: bool = False


class _Shape:
    """Validated BGP: node variables, value variables and the join tree."""

    def __init__(self, q: SparqlQuery):
        self.q = q
        self.nodes: list[str] = []
        for p in q.patterns:
            if not isinstance(p.subject, Var):
                raise UnsupportedFeature("constant subject")
            if p.subject.name not in self.nodes:
                self.nodes.append(p.subject.name)
            if p.is_type:
                if not isinstance(p.object, Iri):
                    raise UnsupportedFeature("non-IRI class in rdf:type")
            elif isinstance(p.object, Iri):
                raise UnsupportedFeature("IRI object")
        node_set = set(self.nodes)
        self.value_vars: list[str] = []
        counts: dict[str, int] = {}
        self.edges: list[tuple[int, str, str]] = []
        for i, p in enumerate(q.patterns):
            if p.is_type or not isinstance(p.object, Var):
                continue
            o = p.object.name
            if o in node_set:
                self.edges.append((i, p.subject.name, o))
            else:
                counts[o] = counts.get(o, 0) + 1
                if o not in self.value_vars:
                    self.value_vars.append(o)
        for v, n in counts.items():
            if n > 1:
                raise UnsupportedFeature(f"join on value variable ?{v}")
        if any(s == o for _, s, o in self.edges):
            raise UnsupportedFeature("cyclic pattern")
        if len(self.edges) != len(self.nodes) - 1:
            if len(self.edges) >= len(self.nodes):
                raise UnsupportedFeature("cyclic pattern")
            raise UnsupportedFeature("disconnected pattern")
        # connectivity; with n-1 edges a connected graph is a tree
        self.order: list[str] = [self.nodes[0]]
        self.parent_edge: dict[str, tuple[int, str, str]] = {}
        frontier = [self.nodes[0]]
        while frontier:
            x = frontier.pop(0)
            for e in self.edges:
                i, s, o = e
                for a, b in ((s, o), (o, s)):
                    if a == x and b not in self.order:
                        self.order.append(b)
                        self.parent_edge[b] = e
                        frontier.append(b)
        if len(self.order) != len(self.nodes):
            raise UnsupportedFeature("disconnected pattern")


class _SourceTranslator:
    def __init__(self, q: SparqlQuery, shape: _Shape, go: GlobalOntology, oid: str, mappings: MappingSet):
        self.q = q
        self.shape = shape
        self.go = go
        self.onto = go.ontology(oid)
        self.mappings = mappings
        self.nodes = {v: _Node(v) for v in shape.nodes}
        self.resolved_types: set[str] = set()
        databases = {m.source.database for m in mappings.entries}
        self.database = sorted(databases)[0] if databases else oid

    # name resolution ---------------------------------------------------------------------

    def _members(self, name: str, kind: str) -> list[str]:
        out = set()
        try:
            binding = resolve_entity(self.go, name, kind=kind)
            out.update(local for oid, local, _ in binding.bindings if oid == self.onto.id)
        except UnknownEntity:
            pass
        pool = self.onto.concepts if kind == CONCEPT else self.onto.roles
        if name in pool:
            out.add(name)
        if kind == ROLE:
            out.update(r for r, labels in self.onto.annotations.items() if r in self.onto.roles and name in labels)
        return sorted(out)

    def _type_options(self, iri: Iri) -> list[tuple[ContainerRef, tuple[Filter, ...]]]:
        options = []
        for concept in self._members(iri.local, CONCEPT):
            m = self.mappings.for_entity(concept)
            if m is None:
                continue
            if m.kind == CONCEPT_TO_CONTAINER:
                options.append((m.source, ()))
            elif m.kind == CONCEPT_TO_TYPE_VALUE and len(m.key_path) == 1 and m.value is not None:
                options.append((m.source, (Filter(m.key_path[0], "=", m.value),)))
        return options

    def _role_options(self, iri: Iri) -> list:
        out = []
        for role in self._members(iri.local, ROLE):
            m = self.mappings.for_entity(role)
            if m is not None and m.kind in (DATATYPE_ROLE_TO_KEY, OBJECT_ROLE_TO_KEY) and len(m.key_path) == 1:
                out.append(m)
        return out

    def attribute(self, p: TriplePattern, container: ContainerRef) -> str:
        attrs = sorted({m.key_path[0] for m in self._role_options(p.predicate) if m.source == container})
        if len(attrs) != 1:
            problem = "no" if not attrs else "an ambiguous"
            raise UnmappedPredicate(f"{p.predicate} has {problem} mapping on {container} in {self.onto.id}")
        return attrs[0]

    def resolve_containers(self) -> None:
        # try every type pattern first so the caller can tell a cross-source join apart
        failure: UnresolvableType | None = None
        for p in self.q.patterns:
            if not p.is_type:
                continue
            node = self.nodes[p.subject.name]
            options = self._type_options(p.object)
            containers = sorted({c for c, _ in options})
            if not containers:
                failure = failure or UnresolvableType(f"class {p.object} has no container in {self.onto.id}")
                continue
            if len(containers) > 1:
                failure = failure or UnresolvableType(f"class {p.object} maps to several containers in {self.onto.id}")
                continue
            if node.container is not None and node.container != containers[0]:
                failure = failure or UnresolvableType(f"?{node.var} is typed with classes of different containers")
                continue
            node.container = containers[0]
            node.typed = True
            # locally equivalent type values select the same entries; one filter suffices
            node.filters.extend(min((fs for _, fs in options),
                                    key=lambda fs: [(f.attribute, sort_key(f.operand)) for f in fs]))
            self.resolved_types.add(node.var)
        if failure is not None:
            raise failure
        changed = True
        while changed:
            changed = False
            for p in self.q.patterns:
                if p.is_type:
                    continue
                s = self.nodes[p.subject.name]
                if s.container is None:
                    sources = sorted({m.source for m in self._role_options(p.predicate)})
                    if len(sources) == 1:
                        s.container, changed = sources[0], True
                o = self.nodes.get(p.object.name) if isinstance(p.object, Var) else None
                if o is not None and o.container is None and s.container is not None:
                    targets = sorted({m.target for m in self._role_options(p.predicate)
                                      if m.source == s.container and m.kind == OBJECT_ROLE_TO_KEY})
                    if len(targets) == 1:
                        o.container, changed = targets[0], True
        for node in self.nodes.values():
            if node.container is None:
                raise UnresolvableType(f"cannot determine a container for ?{node.var} in {self.onto.id}")

    # program construction ---------------------------------------------------------------------

    def build(self) -> BqlProgram:
        self.resolve_containers()
        shape, q = self.shape, self.q
        select = list(q.select_vars)
        forward: dict[str, list[tuple[str, str]]] = {v: [] for v in shape.nodes}  # parent -> (child, attr)
        backward_parents: set[str] = set()
        loop_filter: dict[str, tuple[str, Filter]] = {}  # child -> (loop column, filter)
        for child in shape.order[1:]:
            i, s, o = shape.parent_edge[child]
            p = q.patterns[i]
            attr = self.attribute(p, self.nodes[s].container)
            if o == child:  # parent --attr--> child: iterate the parent's attribute values
                forward[s].append((child, attr))
                loop_filter[child] = (child, Filter(KEY, "=", LoopVar(child)))
            else:  # child --attr--> parent: look up entries referring to the parent key
                backward_parents.add(o)
                loop_filter[child] = (o, Filter(attr, "=", LoopVar(o)))

        per_node_filters: dict[str, list[Filter]] = {v: list(self.nodes[v].filters) for v in shape.nodes}
        values: dict[str, list[tuple[str, str]]] = {v: [] for v in shape.nodes}
        for p in q.patterns:
            if p.is_type:
                continue
            s = p.subject.name
            if isinstance(p.object, Literal):
                per_node_filters[s].append(Filter(self.attribute(p, self.nodes[s].container), "=", p.object.value))
            elif p.object.name in shape.value_vars:
                values[s].append((p.object.name, self.attribute(p, self.nodes[s].container)))

        plan = []
        for v in shape.order:
            bindings: list[tuple[str, str]] = []
            if (v in select or v in backward_parents) and (v == shape.order[0] or loop_filter[v][0] != v):
                bindings.append((v, KEY))
            bindings.extend(forward[v])
            bindings.extend(values[v])
            plan.append((v, bindings))

        # columns each step still needs from its input
        uses: list[set[str]] = []
        for v, _ in plan:
            uses.append({loop_filter[v][0]} if v in loop_filter else set())
        steps: list[Step] = []
        schema: tuple[str, ...] = ()
        names = [f"temp{i + 1}" if i else "temp" for i in range(len(plan) - 1)] + [ANSWER]
        for idx, (v, bindings) in enumerate(plan):
            later = set(select).union(*uses[idx + 1:]) if idx + 1 < len(uses) else set(select)
            node = self.nodes[v]
            projections = tuple(dict.fromkeys(attr for _, attr in bindings))
            filters = [*([loop_filter[v][1]] if v in loop_filter else []), *per_node_filters[v]]
            get = Get(node.container, tuple(filters), projections)
            if idx == 0:
                carry: tuple[str, ...] = ()
                body: Get | ForEachGet = get
            else:
                loop_col = loop_filter[v][0]
                carry = tuple(c for c in schema if c in later)
                body = ForEachGet(loop_col, steps[-1].name, loop_col, get)
            if idx == len(plan) - 1:
                order = {c: i for i, c in enumerate(select)}
                carry = tuple(sorted(carry, key=lambda c: order.get(c, len(order))))
            new_schema = (*carry, *(c for c, _ in bindings))
            steps.append(Step(names[idx], new_schema, body, tuple(bindings), carry))
            schema = new_schema
        return BqlProgram(self.database, tuple(steps), ANSWER, tuple(select))


def translate(q: SparqlQuery, go: GlobalOntology) -> list[BqlProgram]:
    """One program per source database able to answer the whole pattern."""
    shape = _Shape(q)
    programs, failures, resolved = [], [], {}
    for oid in sorted(go.mappings):
        tr = _SourceTranslator(q, shape, go, oid, go.mappings[oid])
        try:
            programs.append(tr.build())
        except BqlError as exc:
            failures.append(exc)
        resolved[oid] = tr.resolved_types
    if programs:
        return sorted(programs, key=lambda p: p.source)
    typed = {p.subject.name for p in q.patterns if p.is_type}
    if not go.mappings or not failures:
        raise UnresolvableType("no source database has mappings for this query")
    if typed and all(any(v in r for r in resolved.values()) for v in typed) \
            and not any(typed <= r for r in resolved.values()):
        raise CrossSourceJoin("typed variables resolve to different databases; cross-source joins are unsupported")
    if any(not any(v in r for r in resolved.values()) for v in typed):
        raise next((f for f in failures if isinstance(f, UnresolvableType)), failures[0])
    raise next((f for f in failures if isinstance(f, UnmappedPredicate)), failures[0])


# -- execution ----------------------------------------------------------------------------------

def _scalars(value: Any) -> list[Any]:
    items = value if isinstance(value, list) else [value]
    return [v for v in items if v is not None and not isinstance(v, (list, dict))]


def _expand(row: dict, bindings: Sequence[tuple[str, str]]) -> Iterable[dict]:
    choices = []
    for col, attr in bindings:
        if attr not in row:
            return []
        vals = _scalars(row[attr])
        if not vals:
            return []
        choices.append([(col, v) for v in vals])
    return [dict(combo) for combo in itertools.product(*choices)]


def _substitute(filters: Sequence[Filter], binding: dict[str, Any]) -> list[Filter]:
    return [Filter(f.attribute, f.comparator, binding[f.operand.name]) if isinstance(f.operand, LoopVar) else f
            for f in filters]


def _run_get(catalog: SourceCatalog, get: Get, filters: Sequence[Filter]) -> list[dict]:
    db = catalog.database(get.container.database)
    ref = catalog.ref(db.name, get.container.container)
    return catalog.get(ref, filters, get.projections or (KEY,))


def execute(p: BqlProgram, catalog: SourceCatalog) -> ResultTable:
    relations: dict[str, list[dict]] = {}
    for step in p.steps:
        out: list[dict] = []
        body = step.body
        if isinstance(body, Get):
            if any(isinstance(f.operand, LoopVar) for f in body.filters):
                raise SchemaMismatch(f"step {step.name}: loop variable outside foreach")
            for row in _run_get(catalog, body, body.filters):
                out.extend(_expand(row, step.bindings))
        else:
            if body.input_relation not in relations:
                raise SchemaMismatch(f"step {step.name} reads undefined relation {body.input_relation}")
            for in_row in relations[body.input_relation]:
                if body.input_attribute not in in_row:
                    raise SchemaMismatch(f"relation {body.input_relation} has no column {body.input_attribute}")
                for item in _scalars(in_row[body.input_attribute]):
                    filters = _substitute(body.get.filters, {body.loop_var: item})
                    base = {c: (item if c == body.input_attribute else in_row[c]) for c in step.carry}
                    for row in _run_get(catalog, body.get, filters):
                        for new in _expand(row, step.bindings):
                            out.append({**base, **new})
        relations[step.name] = out
    rows = relations.get(p.answer_relation, [])
    projected = {tuple(r[c] for c in p.output) for r in rows}
    return ResultTable(p.output, tuple(sorted(projected, key=lambda t: tuple(sort_key(v) for v in t))))


def execute_all(programs: Sequence[BqlProgram], catalog: SourceCatalog) -> ResultTable:
    """Union of every program's answers, deduplicated and sorted."""
    if not programs:
        raise BqlError("nothing to execute")
    schema = programs[0].output
    rows = set()
    for p in programs:
        if p.output != schema:
            raise SchemaMismatch(f"program for {p.source} answers {p.output}, expected {schema}")
        rows.update(execute(p, catalog).rows)
    return ResultTable(schema, tuple(sorted(rows, key=lambda t: tuple(sort_key(v) for v in t))))


def format_table(t: ResultTable) -> str:
    lines = ["\t".join(t.schema)]
    lines.extend("\t".join(v if isinstance(v, str) else json.dumps(v) for v in row) for row in t.rows)
    return "\n".join(lines) + "\n"


# -- procedural plans ----------------------------------------------------------------------------

DOC_API, COLUMN_API = "DocApi", "ColumnApi"
_MONGO_OPS = {"!=": "$ne", "<": "$lt", "<=": "$lte", ">": "$gt", ">=": "$gte"}


def _operand(v: Any) -> str:
    return v.name if isinstance(v, LoopVar) else json.dumps(v, ensure_ascii=False)


def _doc_filter(filters: Sequence[Filter]) -> str:
    parts = []
    for f in filters:
        key = json.dumps("_id" if f.attribute == KEY else f.attribute)
        value = _operand(f.operand)
        if f.comparator != "=":
            value = f'{{"{_MONGO_OPS[f.comparator]}": {value}}}'
        parts.append(f"{key}: {value}")
    return "{" + ", ".join(parts) + "}"


def _doc_call(g: Get) -> str:
    proj = "{" + ", ".join(f"{json.dumps(a)}: 1" for a in g.projections if a != KEY) + "}"
    return f"db.{g.container.database}.find({json.dumps(g.container.container)}, {_doc_filter(g.filters)}, {proj})"


def _col_call(g: Get) -> str:
    cols = "[" + ", ".join(json.dumps(a) for a in g.projections) + "]"
    where = " AND ".join(f"{f.attribute} {f.comparator} {_operand(f.operand)}" for f in g.filters) or "TRUE"
    return f"{g.container.database}.getSlice({json.dumps(g.container.container)}, \"*\", {cols}) WHERE {where}"


def emit_plan(p: BqlProgram, dialect: str = DOC_API) -> str:
    """Deterministic procedural pseudo-program, one numbered block per step."""
    if dialect not in (DOC_API, COLUMN_API):
        raise ValueError(f"unknown dialect {dialect!r}")
    call = _doc_call if dialect == DOC_API else _col_call
    lines = [f"# plan for {p.source} ({dialect})"]
    for n, s in enumerate(p.steps, 1):
        if isinstance(s.body, Get):
            lines.append(f"{n}: {s.name} = {call(s.body)}")
            continue
        b = s.body
        lines.append(f"{n}: {s.name} = []")
        lines.append(f"   for row in {b.input_relation}:")
        lines.append(f"       {b.loop_var} = row[{json.dumps(b.input_attribute)}]")
        lines.append(f"       {s.name} += {call(b.get)}")
    return "\n".join(lines) + "\n"


def dialect_for(kind: ContainerKind) -> str:
    return DOC_API if kind is ContainerKind.COLLECTION else COLUMN_API
