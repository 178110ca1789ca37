"""Command-line front end.  Stages talk to each other only through files."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from . import alignment as al
from . import bql, globalont, induction, sparql, store
from .dl import dumps_ontology, loads_ontology
from .errors import NosqintError


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _check_inputs(*paths: str | None) -> None:
    for p in paths:
        if p is not None and not Path(p).is_file():
            raise UsageError(f"input file not found: {p}")


def _check_output(path: str | None) -> None:
    if path is not None:
        parent = Path(path).resolve().parent
        if not parent.is_dir() or not os.access(parent, os.W_OK):
            raise UsageError(f"cannot write output to {path}")


def seed_from_env() -> int:
    """``NOSQINT_SEED``; every tie-break in the pipeline is already lexicographic, so it only gets validated."""
    raw = os.environ.get("NOSQINT_SEED", "0")
    try:
        seed = int(raw)
    except ValueError:
        raise UsageError(f"NOSQINT_SEED must be a non-negative integer, got {raw!r}") from None
    if seed < 0:
        raise UsageError(f"NOSQINT_SEED must be a non-negative integer, got {raw!r}")
    return seed


# -- subcommands --------------------------------------------------------------------------------

def cmd_ingest(args: argparse.Namespace) -> None:
    _check_inputs(args.catalog)
    catalog = store.load_catalog(args.catalog)
    out = Path(args.out) if args.out else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    lines = []
    for db in catalog.databases:
        for name in sorted(db.containers):
            lines.append(f"{db.name}.{name}\t{db.kind.value}\t{len(db.containers[name])}")
        if out is not None:
            store.save_snapshot(db, out / f"{db.name}.json")
    sys.stdout.write("\n".join(lines) + ("\n" if lines else ""))


def cmd_induce(args: argparse.Namespace) -> None:
    _check_inputs(args.catalog)
    _check_output(args.out)
    try:
        strategy = induction.parse_strategy(args.strategy)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if isinstance(strategy, induction.FrequencyLog):
        _check_inputs(strategy.path)
    catalog = store.load_catalog(args.catalog)
    onto, mappings = induction.induce_local(catalog, args.database, strategy)
    _write(args.out, dumps_ontology(onto))
    mapping_path = args.mappings_out or (f"{args.out}.mappings.json" if args.out else None)
    if mapping_path is not None:
        _check_output(mapping_path)
        _write(mapping_path, induction.dumps_mappings(mappings))


def cmd_align(args: argparse.Namespace) -> None:
    _check_inputs(args.left, args.right, args.synonyms)
    _check_output(args.out)
    synonyms = al.load_synonyms(args.synonyms) if args.synonyms else {}
    cfg = al.MatcherConfig(synonyms=synonyms, sim_threshold=args.threshold)
    o1 = al.saturate(loads_ontology(_read(args.left)))
    o2 = al.saturate(loads_ontology(_read(args.right)))
    result = al.align_simple(o1, o2, cfg)
    if args.complex:
        result = al.merge_alignments(result, al.align_complex(o1, o2, result, cfg))
    _write(args.out, al.serialize_alignment(result))


def cmd_merge(args: argparse.Namespace) -> None:
    _check_inputs(*args.ontologies, *args.alignments, *args.mappings)
    _check_output(args.out)
    ontologies = {p: loads_ontology(_read(p)) for p in args.ontologies}
    ids = {o.id: p for p, o in ontologies.items()}
    mapping_paths: dict[str, str] = {}
    mapping_sets = {}
    for i, p in enumerate(args.mappings):
        ms = induction.loads_mappings(_read(p))
        dbs = {m.source.database for m in ms.entries}
        if len(dbs) == 1 and next(iter(dbs)) in ids:
            oid = next(iter(dbs))
        elif len(args.mappings) == len(args.ontologies):
            oid = ontologies[args.ontologies[i]].id
        else:
            raise UsageError(f"cannot tell which ontology {p} maps; give one mapping file per ontology, in order")
        mapping_paths[oid] = p
        mapping_sets[oid] = ms
    aligns = [al.parse_alignment(_read(p)) for p in args.alignments]
    go = globalont.build_global(list(ontologies.values()), aligns, mapping_sets)
    data = globalont.global_to_json(go, ids, args.alignments, mapping_paths, args.out)
    _write(args.out, globalont.dumps_global(data))


def cmd_query(args: argparse.Namespace) -> None:
    _check_inputs(args.global_, args.catalog, args.sparql)
    _check_output(args.out)
    go = globalont.load_global(args.global_)
    query = sparql.parse_sparql(_read(args.sparql))
    programs = bql.translate(query, go)
    if args.explain:
        _write(args.out, bql.explain(programs))
        return
    if args.emit:
        dialect = bql.DOC_API if args.emit == "doc" else bql.COLUMN_API
        _write(args.out, "\n".join(bql.emit_plan(p, dialect) for p in programs))
        return
    catalog = store.load_catalog(args.catalog)
    _write(args.out, bql.format_table(bql.execute_all(programs, catalog)))


# -- entry points -------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nosqint", description="Ontology-based integration of NOSQL stores.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load and validate a store catalog")
    p.add_argument("--catalog", required=True)
    p.add_argument("--out", help="directory for canonical snapshot copies")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("induce", help="induce a local ontology from one database")
    p.add_argument("--catalog", required=True)
    p.add_argument("--database", required=True)
    p.add_argument("--strategy", default="full", help="full | incremental | freq:LOG:TOPN")
    p.add_argument("--out")
    p.add_argument("--mappings-out", help="default: <out>.mappings.json")
    p.set_defaults(func=cmd_induce)

    p = sub.add_parser("align", help="align two ontologies")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)
    p.add_argument("--synonyms")
    p.add_argument("--threshold", type=float, default=0.85)
    p.add_argument("--complex", action="store_true", help="also emit formula correspondences")
    p.add_argument("--out")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("merge", help="build the global ontology")
    p.add_argument("--ontologies", nargs="+", required=True)
    p.add_argument("--alignments", nargs="*", default=[])
    p.add_argument("--mappings", nargs="*", default=[])
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_merge)

    p = sub.add_parser("query", help="translate and run a SPARQL query")
    p.add_argument("--global", dest="global_", required=True)
    p.add_argument("--catalog", required=True)
    p.add_argument("--sparql", required=True)
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--explain", action="store_true", help="print BQL without executing")
    mode.add_argument("--emit", choices=("doc", "column"), help="print procedural plans")
    p.add_argument("--out")
    p.set_defaults(func=cmd_query)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        seed_from_env()
        args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"nosqint: error: {exc}", file=sys.stderr)
        return 2
    except NosqintError as exc:
        print(f"error [{exc.module}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (json.JSONDecodeError, KeyError, ValueError, TypeError) as exc:
        print(f"error [cli] malformed input: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
