"""Parser and printer for the SELECT + basic graph pattern subset of SPARQL.

Everything outside the subset is rejected with :class:`UnsupportedFeature`
naming the construct, rather than being partially supported.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import SparqlSyntaxError, UnboundSelectVar, UnsupportedFeature

RDF_TYPE = "rdf:type"
BUILTIN_PREFIXES = ("rdf", "rdfs")

_UNSUPPORTED_KEYWORDS = {
    "OPTIONAL", "FILTER", "UNION", "MINUS", "GRAPH", "BIND", "VALUES", "SERVICE", "ORDER", "GROUP",
    "HAVING", "LIMIT", "OFFSET", "PREFIX", "BASE", "DISTINCT", "REDUCED", "CONSTRUCT", "ASK",
    "DESCRIBE", "FROM", "EXISTS", "NOT",
}


@dataclass(frozen=True, order=True)
class Var:
    name: str

    def __str__(self) -> str:
        return "?" + self.name


@dataclass(frozen=True, order=True)
class Iri:
    """An IRI in surface form: a bare or prefixed name, or ``<...>``."""

    value: str

    @property
    def local(self) -> str:
        v = self.value
        if v.startswith("<"):
            v = v[1:-1]
            return re.split(r"[#/]", v)[-1]
        return v.split(":", 1)[-1] if ":" in v else v

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class Literal:
    value: str | int | float

    def __str__(self) -> str:
        if isinstance(self.value, str):
            return "'" + self.value.replace("\\", "\\\\").replace("'", "\\'") + "'"
        return repr(self.value)


Term = Var | Iri | Literal


@dataclass(frozen=True)
class TriplePattern:
    subject: Var | Iri
    predicate: Iri
    object: Term

    @property
    def is_type(self) -> bool:
        return self.predicate.value == RDF_TYPE


@dataclass(frozen=True)
class SparqlQuery:
    select_vars: tuple[str, ...]
    patterns: tuple[TriplePattern, ...]

    def variables(self) -> list[str]:
        seen: list[str] = []
        for p in self.patterns:
            for t in (p.subject, p.object):
                if isinstance(t, Var) and t.name not in seen:
                    seen.append(t.name)
        return seen


# -- lexer -------------------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+|\#[^\n]*)
  | (?P<var>[?$][A-Za-z_][A-Za-z0-9_]*)
  | (?P<iri><[^<>\s]*>)
  | (?P<str>'(?:[^'\\\n]|\\.)*'|"(?:[^"\\\n]|\\.)*")
  | (?P<num>[+-]?(?:\d+\.\d+|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_\-]*(?::(?:[A-Za-z0-9_][A-Za-z0-9_\-]*)?)?|:[A-Za-z0-9_][A-Za-z0-9_\-]*)
  | (?P<punct>[{}.;,*()/|^+!=<>\[\]])
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    pos: int


def _lex(text: str) -> list[_Tok]:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise SparqlSyntaxError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            out.append(_Tok(m.lastgroup, m.group(), pos))
        pos = m.end()
    out.append(_Tok("eof", "", len(text)))
    return out


def _unescape(body: str) -> str:
    return re.sub(r"\\(.)", lambda m: {"n": "\n", "t": "\t"}.get(m.group(1), m.group(1)), body)


class _Parser:
    def __init__(self, text: str):
        self.toks = _lex(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def keyword(self, t: _Tok) -> str | None:
        return t.text.upper() if t.kind == "name" and ":" not in t.text else None

    def reject_unsupported(self, t: _Tok) -> None:
        kw = self.keyword(t)
        if kw in _UNSUPPORTED_KEYWORDS:
            raise UnsupportedFeature(kw, t.pos)

    def expect_keyword(self, word: str) -> None:
        t = self.tok
        self.reject_unsupported(t)
        if self.keyword(t) != word:
            raise SparqlSyntaxError(f"expected {word}, found {t.text or 'end of input'!r}", t.pos)
        self.advance()

    def expect(self, punct: str) -> _Tok:
        t = self.tok
        if t.kind != "punct" or t.text != punct:
            self.reject_unsupported(t)
            raise SparqlSyntaxError(f"expected {punct!r}, found {t.text or 'end of input'!r}", t.pos)
        return self.advance()

    def parse(self) -> SparqlQuery:
        self.expect_keyword("SELECT")
        select: list[tuple[str, int]] = []
        while self.tok.kind == "var":
            t = self.advance()
            select.append((t.text[1:], t.pos))
        if not select:
            t = self.tok
            self.reject_unsupported(t)
            if t.kind == "punct" and t.text in "*(":
                raise UnsupportedFeature("SELECT *" if t.text == "*" else "projection expression", t.pos)
            raise SparqlSyntaxError("expected at least one variable after SELECT", t.pos)
        self.expect_keyword("WHERE")
        self.expect("{")
        patterns = []
        while not (self.tok.kind == "punct" and self.tok.text == "}"):
            patterns.append(self.triple())
            t = self.tok
            if t.kind == "punct" and t.text == ".":
                self.advance()
            elif t.kind == "punct" and t.text in ";,":
                raise UnsupportedFeature("predicate-object list", t.pos)
            elif not (t.kind == "punct" and t.text == "}"):
                self.reject_unsupported(t)
                raise SparqlSyntaxError(f"expected '.' or '}}', found {t.text or 'end of input'!r}", t.pos)
        self.expect("}")
        t = self.tok
        if t.kind != "eof":
            self.reject_unsupported(t)
            raise SparqlSyntaxError(f"unexpected {t.text!r} after query body", t.pos)
        if not patterns:
            raise SparqlSyntaxError("empty graph pattern", t.pos)
        query = SparqlQuery(tuple(n for n, _ in select), tuple(patterns))
        bound = set(query.variables())
        for name, pos in select:
            if name not in bound:
                raise UnboundSelectVar(f"select variable ?{name} at position {pos} occurs in no pattern")
        if len(set(query.select_vars)) != len(query.select_vars):
            raise SparqlSyntaxError("select variable listed twice", select[0][1])
        return query

    def triple(self) -> TriplePattern:
        subject = self.term("subject")
        if isinstance(subject, Literal):
            raise SparqlSyntaxError("literal in subject position", self.toks[self.i - 1].pos)
        t = self.tok
        if t.kind == "var":
            raise UnsupportedFeature("variable predicate", t.pos)
        if t.kind == "punct" and t.text in "^!(":
            raise UnsupportedFeature("property path", t.pos)
        predicate = self.term("predicate")
        if not isinstance(predicate, Iri):
            raise SparqlSyntaxError("predicate must be an IRI", t.pos)
        nxt = self.tok
        if nxt.kind == "punct" and nxt.text in "/|*+^":
            raise UnsupportedFeature("property path", nxt.pos)
        obj = self.term("object")
        return TriplePattern(subject, predicate, obj)

    def term(self, position: str) -> Term:
        t = self.tok
        if t.kind == "var":
            self.advance()
            return Var(t.text[1:])
        if t.kind == "iri":
            self.advance()
            return Iri(t.text)
        if t.kind == "str":
            self.advance()
            return Literal(_unescape(t.text[1:-1]))
        if t.kind == "num":
            self.advance()
            text = t.text
            return Literal(float(text) if any(c in text for c in ".eE") else int(text))
        if t.kind == "name":
            self.reject_unsupported(t)
            self.advance()
            if t.text == "a" and position == "predicate":
                return Iri(RDF_TYPE)
            if ":" in t.text:
                prefix = t.text.split(":", 1)[0]
                if prefix not in BUILTIN_PREFIXES:
                    raise SparqlSyntaxError(f"unknown prefix {prefix + ':'!r}", t.pos)
            return Iri(t.text)
        if t.kind == "punct" and t.text in "{[(":
            raise UnsupportedFeature("nested group" if t.text == "{" else "blank node or collection", t.pos)
        raise SparqlSyntaxError(f"expected {position}, found {t.text or 'end of input'!r}", t.pos)


def parse_sparql(text: str) -> SparqlQuery:
    return _Parser(text).parse()


def print_sparql(q: SparqlQuery) -> str:
    """Canonical text; ``parse_sparql(print_sparql(q)) == q``."""
    body = " ".join(f"{p.subject} {p.predicate} {p.object}." for p in q.patterns)
    return f"SELECT {' '.join('?' + v for v in q.select_vars)} WHERE {{{body}}}"
