"""Brute-force reference implementations used to check the library.

None of these import the code under test beyond plain data classes.
"""

from __future__ import annotations

import itertools
from typing import Any, Iterable, Mapping, Sequence

from nosqint.dl import TOP, And, Atomic, EquivalentTo, Exists, MinCard, SubClassOf, conj


# -- FCA ----------------------------------------------------------------------------------------

def closed_intents(n_objects: int, n_attrs: int, incidence: set[tuple[int, int]]) -> set[frozenset[int]]:
    def ext(attrs):
        return frozenset(g for g in range(n_objects) if all((g, m) in incidence for m in attrs))

    def intent(objs):
        return frozenset(m for m in range(n_attrs) if all((g, m) in incidence for g in objs))

    out = set()
    for r in range(n_attrs + 1):
        for combo in itertools.combinations(range(n_attrs), r):
            b = frozenset(combo)
            if intent(ext(b)) == b:
                out.add(b)
    return out


def attribute_extents(n_objects: int, n_attrs: int, incidence: set[tuple[int, int]]) -> list[frozenset[int]]:
    return [frozenset(g for g in range(n_objects) if (g, m) in incidence) for m in range(n_attrs)]


def told_closure(axioms: Iterable[Any], names: Iterable[str]) -> set[tuple[str, str]]:
    """Reflexive-transitive closure of atomic told subsumptions, by Floyd-Warshall."""
    names = sorted(set(names))
    rel = {(a, a) for a in names}
    for ax in axioms:
        pairs = []
        if isinstance(ax, SubClassOf):
            pairs = [(ax.sub, ax.sup)]
        elif isinstance(ax, EquivalentTo):
            pairs = [(ax.left, ax.right), (ax.right, ax.left)]
        for sub, sup in pairs:
            if not isinstance(sub, Atomic):
                continue
            sups = sup.items if isinstance(sup, And) else (sup,)
            for s in sups:
                if isinstance(s, Atomic):
                    rel.add((sub.name, s.name))
    for k in names:
        for i in names:
            if (i, k) in rel:
                for j in names:
                    if (k, j) in rel:
                        rel.add((i, j))
    return rel


# -- EL subsumption over an atomic hierarchy ------------------------------------------------------

def _parts(e):
    if e is TOP:
        return ()
    return e.items if isinstance(e, And) else (e,)


def el_subsumes(sup, sub, closure: set[tuple[str, str]]) -> bool:
    """Structural subsumption ``sub ⊑ sup`` for EL with a name-only TBox."""
    names = set()
    restr = []
    for p in _parts(sub):
        if isinstance(p, Atomic):
            names.update(b for a, b in closure if a == p.name)
            names.add(p.name)
        else:
            restr.append(p)
    for q in _parts(sup):
        if isinstance(q, Atomic):
            if q.name not in names:
                return False
        else:
            n = getattr(q, "n", 1)
            if not any(r.role == q.role and getattr(r, "n", 1) >= n and el_subsumes(q.filler, r.filler, closure)
                       for r in restr):
                return False
    return True


def candidate_atoms(names: Sequence[str], roles: Sequence[str]) -> list:
    """Depth-two candidate conjuncts: names, and restrictions whose fillers are
    top, a name, a pair of names, or a name with a nested restriction."""
    level1_fillers = [TOP, *(Atomic(n) for n in names),
                      *(conj(Atomic(a), Atomic(b)) for a, b in itertools.combinations(names, 2))]
    nested = [Exists(s, f) for s in roles for f in [TOP, *(Atomic(n) for n in names)]]
    level2_fillers = [*nested, *(conj(Atomic(a), x) for a in names for x in nested)]
    atoms = [Atomic(n) for n in names]
    atoms += [Exists(r, f) for r in roles for f in level1_fillers]
    atoms += [Exists(r, f) for r in roles for f in level2_fillers]
    return atoms


# -- triple-materialisation query oracle --------------------------------------------------------

def _kind(v: Any) -> str:
    if isinstance(v, bool):
        return "bool"
    if isinstance(v, (int, float)):
        return "number"
    return type(v).__name__


def same_value(a: Any, b: Any) -> bool:
    return _kind(a) == _kind(b) and a == b


def materialize(containers: Mapping[str, Mapping[str, Mapping[str, Any]]]) -> list[tuple]:
    """Triples ``(subject, predicate, object)``; subjects are ``(container, key)``."""
    triples = []
    for cname, entries in containers.items():
        for key, entry in entries.items():
            s = (cname, key)
            triples.append((s, "rdf:type", cname))
            for attr, value in entry.items():
                items = value if isinstance(value, list) else [value]
                for v in items:
                    if v is not None and not isinstance(v, (list, dict)):
                        triples.append((s, attr, v))
    return triples


def evaluate_bgp(triples: list[tuple], patterns: Sequence[tuple], select: Sequence[str],
                 node_vars: set[str]) -> set[tuple]:
    """Exhaustive join.  Patterns are ``(var, attr, term)`` where term is
    ``("var", name)`` or ``("lit", value)``; ``attr`` may be ``rdf:type`` with a
    container name as literal.  A node variable denotes a subject; used as an
    object it matches a value equal to that subject's key."""
    by_pred: dict[str, list[tuple]] = {}
    by_subj: dict[tuple, list[tuple]] = {}
    by_key: dict[tuple, list[tuple]] = {}
    for t in triples:
        by_pred.setdefault(t[1], []).append(t)
        by_subj.setdefault((t[1], t[0]), []).append(t)
        by_key.setdefault((t[1], t[0][1]), []).append(t)

    def candidates(binding, s, attr):
        # index lookups only prune; unify still checks every candidate
        cur = binding.get(s)
        if cur is None:
            return by_pred.get(attr, ())
        if cur[0] == "?":
            return by_key.get((attr, cur[1]), ()) if isinstance(cur[1], str) else ()
        return by_subj.get((attr, cur), ())

    results = set()

    def unify(binding, var, value, as_object):
        if var in node_vars:
            if as_object:
                # value must equal the key of the subject bound to var
                if var in binding:
                    return binding if same_value(binding[var][1], value) else None
                return {**binding, var: ("?", value)}
            if var in binding:
                cur = binding[var]
                if cur[0] == "?":
                    return {**binding, var: value} if same_value(cur[1], value[1]) else None
                return binding if cur == value else None
            return {**binding, var: value}
        if var in binding:
            return binding if same_value(binding[var], value) else None
        return {**binding, var: value}

    def search(i, binding):
        if i == len(patterns):
            if any(isinstance(binding[v], tuple) and binding[v][0] == "?" for v in node_vars if v in binding):
                return
            row = []
            for v in select:
                val = binding[v]
                row.append(val[1] if v in node_vars else val)
            results.add(tuple(row))
            return
        s, attr, (tk, tv) = patterns[i]
        for subj, _, obj in candidates(binding, s, attr):
            b = unify(binding, s, subj, False)
            if b is None:
                continue
            if tk == "lit":
                if not same_value(obj, tv):
                    continue
            else:
                b = unify(b, tv, obj, True)
                if b is None:
                    continue
            search(i + 1, b)

    search(0, {})
    return results
