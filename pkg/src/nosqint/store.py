"""File-backed document and column-family stores.

Both store kinds are loaded from JSON snapshots and expose the same
``get(filters, projections)`` primitive.  Entries are plain Python values
(``None``, ``bool``, ``int``/``float``, ``str``, ``list``, ``dict``).
"""

from __future__ import annotations

import json
import operator
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .errors import DuplicateKey, NestedColumnValue, ParseError, UnknownContainer, UnknownDatabase

KEY = "Key"

COMPARATORS = ("=", "<", "<=", ">", ">=", "!=")
_COMPARATOR_ALIASES = {"≠": "!=", "<>": "!=", "==": "=", "≤": "<=", "≥": ">="}
_ORDERING = {"<": operator.lt, "<=": operator.le, ">": operator.gt, ">=": operator.ge}


class ContainerKind(str, Enum):
    COLLECTION = "Collection"
    COLUMN_FAMILY = "ColumnFamily"


@dataclass(frozen=True, order=True)
class ContainerRef:
    database: str
    container: str
    kind: ContainerKind = ContainerKind.COLLECTION

    def __str__(self) -> str:
        return f"{self.database}.{self.container}"

    def to_json(self) -> dict:
        return {"database": self.database, "container": self.container, "kind": self.kind.value}

    @classmethod
    def from_json(cls, data: Mapping[str, Any]) -> "ContainerRef":
        return cls(data["database"], data["container"], ContainerKind(data.get("kind", "Collection")))


@dataclass(frozen=True)
class Filter:
    """``attribute comparator operand``; the operand may be a :class:`LoopVar` in BQL bodies."""

    attribute: str
    comparator: str
    operand: Any

    def __post_init__(self):
        comp = _COMPARATOR_ALIASES.get(self.comparator, self.comparator)
        if comp not in COMPARATORS:
            raise ValueError(f"unknown comparator {self.comparator!r}")
        object.__setattr__(self, "comparator", comp)


# -- value semantics ---------------------------------------------------------

def value_kind(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "bool"
    if isinstance(value, (int, float)):
        return "number"
    if isinstance(value, str):
        return "text"
    if isinstance(value, list):
        return "list"
    if isinstance(value, dict):
        return "map"
    raise TypeError(f"not a store value: {value!r}")


def _scalar_compare(left: Any, comparator: str, right: Any) -> bool:
    kind = value_kind(left)
    if kind != value_kind(right) or kind in ("list", "map"):
        return False
    if comparator == "=":
        return left == right
    if comparator == "!=":
        return left != right
    if kind in ("null", "bool"):
        return False
    return _ORDERING[comparator](left, right)


def compare(value: Any, comparator: str, operand: Any) -> bool:
    """Schemaless comparison: cross-kind comparisons are false, lists use membership."""
    comparator = _COMPARATOR_ALIASES.get(comparator, comparator)
    if isinstance(value, list):
        if comparator == "!=":
            return not any(_scalar_compare(v, "=", operand) for v in value)
        return any(_scalar_compare(v, comparator, operand) for v in value)
    return _scalar_compare(value, comparator, operand)


def sort_key(value: Any) -> tuple:
    """Total order over store values, used for deterministic result ordering."""
    kind = value_kind(value)
    rank = ("null", "bool", "number", "text", "list", "map").index(kind)
    if kind in ("list", "map"):
        return (rank, json.dumps(value, sort_keys=True, ensure_ascii=False))
    if kind == "null":
        return (rank, 0)
    return (rank, value)


# -- stores ------------------------------------------------------------------

@dataclass
class DocumentDatabase:
    name: str
    collections: dict[str, dict[str, dict]] = field(default_factory=dict)

    kind = ContainerKind.COLLECTION

    @property
    def containers(self) -> dict[str, dict[str, dict]]:
        return self.collections

    def to_json(self) -> dict:
        return {"name": self.name, "collections": self.collections}


@dataclass
class ColumnStore:
    keyspace: str
    families: dict[str, dict[str, dict]] = field(default_factory=dict)

    kind = ContainerKind.COLUMN_FAMILY

    @property
    def name(self) -> str:
        return self.keyspace

    @property
    def containers(self) -> dict[str, dict[str, dict]]:
        return self.families

    def to_json(self) -> dict:
        return {"keyspace": self.keyspace, "columnFamilies": self.families}


Database = DocumentDatabase | ColumnStore


class SourceCatalog:
    """All loaded sources, addressed by ``(database, container)``."""

    def __init__(self, document_dbs: Iterable[DocumentDatabase] = (), column_stores: Iterable[ColumnStore] = ()):
        self.document_dbs = list(document_dbs)
        self.column_stores = list(column_stores)
        self._by_name: dict[str, Database] = {}
        for db in [*self.document_dbs, *self.column_stores]:
            if db.name in self._by_name:
                raise DuplicateKey(f"database name {db.name!r} used twice in catalog")
            self._by_name[db.name] = db

    def database(self, name: str) -> Database:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownDatabase(f"no database named {name!r}") from None

    @property
    def databases(self) -> list[Database]:
        return [self._by_name[n] for n in sorted(self._by_name)]

    def entries(self, ref: ContainerRef) -> dict[str, dict]:
        db = self._by_name.get(ref.database)
        if db is None or ref.container not in db.containers:
            raise UnknownContainer(f"no container {ref}")
        return db.containers[ref.container]

    def ref(self, database: str, container: str) -> ContainerRef:
        db = self._by_name.get(database)
        if db is None or container not in db.containers:
            raise UnknownContainer(f"no container {database}.{container}")
        return ContainerRef(database, container, db.kind)

    def get(self, ref: ContainerRef, filters: Sequence[Filter] = (), projections: Iterable[str] = ()) -> list[dict]:
        return get(self, ref, filters, projections)

    def with_entry(self, ref: ContainerRef, key: str, entry: dict) -> "SourceCatalog":
        """Copy of the catalog with one entry inserted or replaced."""
        docs, cols = [], []
        for db in self.document_dbs:
            docs.append(_replace_entry(db, ref, key, entry))
        for db in self.column_stores:
            if ref.database == db.name:
                _check_column_entry(ref.container, key, entry)
            cols.append(_replace_entry(db, ref, key, entry))
        self.entries(ref)  # raises when unresolvable
        return SourceCatalog(docs, cols)


def _replace_entry(db, ref: ContainerRef, key: str, entry: dict):
    if db.name != ref.database:
        return db
    containers = dict(db.containers)
    if ref.container in containers:
        rows = dict(containers[ref.container])
        rows[key] = entry
        containers[ref.container] = rows
    if isinstance(db, DocumentDatabase):
        return DocumentDatabase(db.name, containers)
    return ColumnStore(db.keyspace, containers)


def get(catalog: SourceCatalog, ref: ContainerRef, filters: Sequence[Filter] = (),
        projections: Iterable[str] = ()) -> list[dict]:
    """Rows of ``ref`` satisfying every filter, projected to ``projections`` plus ``Key``.

    An empty projection set returns all attributes.  A filter on an attribute
    the entry lacks is false.
    """
    entries = catalog.entries(ref)
    projections = list(projections)
    rows = []
    for key, entry in entries.items():
        if not all(_matches(key, entry, f) for f in filters):
            continue
        if projections:
            row = {KEY: key}
            for attr in projections:
                if attr == KEY:
                    continue
                if attr in entry:
                    row[attr] = entry[attr]
        else:
            row = {KEY: key, **entry}
        rows.append(row)
    return rows


def _matches(key: str, entry: Mapping[str, Any], f: Filter) -> bool:
    if f.attribute == KEY:
        return compare(key, f.comparator, f.operand)
    if f.attribute not in entry:
        return False
    return compare(entry[f.attribute], f.comparator, f.operand)


def container_names(catalog: SourceCatalog) -> list[ContainerRef]:
    refs = [
        ContainerRef(db.name, name, db.kind)
        for db in catalog.databases
        for name in db.containers
    ]
    return sorted(refs, key=lambda r: (r.database, r.container))


# -- snapshot IO ---------------------------------------------------------------

class _Pairs(list):
    """Raw JSON object as key/value pairs, so duplicate keys stay visible."""


def _read_json(path: str | Path) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text, object_pairs_hook=_Pairs)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _to_value(raw: Any, where: str) -> Any:
    if isinstance(raw, _Pairs):
        out = {}
        for k, v in raw:
            if k in out:
                raise DuplicateKey(f"duplicate key {k!r} in {where}")
            out[k] = _to_value(v, f"{where}.{k}")
        return out
    if isinstance(raw, list):
        return [_to_value(v, where) for v in raw]
    return raw


def _object(raw: Any, where: str) -> _Pairs:
    if not isinstance(raw, _Pairs):
        raise ParseError(f"{where} must be a JSON object")
    return raw


def _load_containers(raw: _Pairs, where: str) -> dict[str, dict[str, dict]]:
    containers: dict[str, dict[str, dict]] = {}
    for cname, craw in raw:
        if cname in containers:
            raise DuplicateKey(f"container {cname!r} declared twice in {where}")
        entries: dict[str, dict] = {}
        for key, eraw in _object(craw, f"{where}.{cname}"):
            if key in entries:
                raise DuplicateKey(f"duplicate entry key {key!r} in {where}.{cname}")
            entries[key] = _to_value(_object(eraw, f"{where}.{cname}.{key}"), f"{cname}[{key}]")
        containers[cname] = entries
    return containers


def _field(raw: _Pairs, name: str, where: str) -> Any:
    for k, v in raw:
        if k == name:
            return v
    raise ParseError(f"{where}: missing field {name!r}")


def load_document_db(path: str | Path) -> DocumentDatabase:
    raw = _object(_read_json(path), str(path))
    name = _field(raw, "name", str(path))
    if not isinstance(name, str):
        raise ParseError(f"{path}: name must be a string")
    collections = _load_containers(_object(_field(raw, "collections", str(path)), "collections"), name)
    return DocumentDatabase(name, collections)


def _check_column_entry(family: str, key: str, entry: Mapping[str, Any]) -> None:
    for col, value in entry.items():
        if isinstance(value, dict) or (isinstance(value, list) and any(isinstance(v, (dict, list)) for v in value)):
            raise NestedColumnValue(f"column {family}[{key}].{col} holds a nested value")


def load_column_store(path: str | Path) -> ColumnStore:
    raw = _object(_read_json(path), str(path))
    keyspace = _field(raw, "keyspace", str(path))
    if not isinstance(keyspace, str):
        raise ParseError(f"{path}: keyspace must be a string")
    families = _load_containers(_object(_field(raw, "columnFamilies", str(path)), "columnFamilies"), keyspace)
    for fname, rows in families.items():
        for key, entry in rows.items():
            _check_column_entry(fname, key, entry)
    return ColumnStore(keyspace, families)


def dumps_snapshot(db: Database) -> str:
    return json.dumps(db.to_json(), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def save_snapshot(db: Database, path: str | Path) -> None:
    Path(path).write_text(dumps_snapshot(db), encoding="utf-8")


def load_catalog(path: str | Path) -> SourceCatalog:
    """Catalog manifest: ``{"documentDbs": [paths], "columnStores": [paths]}``.

    Relative paths resolve against the manifest's directory.
    """
    path = Path(path)
    raw = _to_value(_object(_read_json(path), str(path)), str(path))
    base = path.parent
    docs = [load_document_db(base / p) for p in raw.get("documentDbs", [])]
    cols = [load_column_store(base / p) for p in raw.get("columnStores", [])]
    return SourceCatalog(docs, cols)
