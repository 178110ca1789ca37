import pytest
from hypothesis import given, strategies as st

from nosqint.errors import SparqlSyntaxError, UnboundSelectVar, UnsupportedFeature
from nosqint.sparql import Iri, Literal, SparqlQuery, TriplePattern, Var, parse_sparql, print_sparql

from conftest import DATA


def test_example_query():
    q = parse_sparql((DATA / "example5.rq").read_text())
    assert q.select_vars == ("title",)
    assert q.patterns[0] == TriplePattern(Var("p"), Iri("rdf:type"), Iri("Person"))
    assert q.patterns[1].object == Literal("Doe")
    assert q.variables() == ["p", "paper", "title"]
    assert q.patterns[0].is_type and not q.patterns[1].is_type


def test_surface_forms():
    q = parse_sparql("select ?x where { ?x a <http://ex.org/onto#Person> . ?x age 3 . ?x score -1.5e2 }")
    assert q.patterns[0].predicate == Iri("rdf:type")
    assert q.patterns[0].object.local == "Person"
    assert q.patterns[1].object == Literal(3)
    assert q.patterns[2].object == Literal(-150.0)
    q = parse_sparql('SELECT ?x WHERE {?x name "O\'Neil". # comment\n}')
    assert q.patterns[0].object == Literal("O'Neil")
    assert Iri("rdfs:label").local == "label"


@pytest.mark.parametrize("text, construct", [
    ("SELECT ?x WHERE { ?x p ?y OPTIONAL { ?y q ?z } }", "OPTIONAL"),
    ("SELECT ?x WHERE { ?x p ?y . FILTER(?y) }", "FILTER"),
    ("SELECT * WHERE { ?x p ?y }", "SELECT *"),
    ("SELECT DISTINCT ?x WHERE { ?x p ?y }", "DISTINCT"),
    ("SELECT ?x WHERE { ?x ?p ?y }", "variable predicate"),
    ("SELECT ?x WHERE { ?x p/q ?y }", "property path"),
    ("SELECT ?x WHERE { ?x p ?y ; q ?z }", "predicate-object list"),
    ("SELECT ?x WHERE { ?x p [ q ?z ] }", "blank node or collection"),
    ("PREFIX ex: <http://x/> SELECT ?x WHERE { ?x ex:p ?y }", "PREFIX"),
    ("SELECT ?x WHERE { ?x p ?y } LIMIT 3", "LIMIT"),
])
def test_unsupported_features(text, construct):
    with pytest.raises(UnsupportedFeature) as err:
        parse_sparql(text)
    assert err.value.construct == construct
    assert err.value.position is not None


@pytest.mark.parametrize("text", [
    "SELECT ?x WHERE { ?x p }",
    "SELECT ?x { ?x p ?y }",
    "SELECT WHERE { ?x p ?y }",
    "SELECT ?x WHERE { ?x ex:p ?y }",
    "SELECT ?x WHERE { 'lit' p ?y }",
    "SELECT ?x WHERE { }",
    "SELECT ?x WHERE { ?x p ?y } trailing",
    "SELECT ?x ?x WHERE { ?x p ?y }",
    "SELECT ?x WHERE { ?x p ?y @ }",
])
def test_syntax_errors(text):
    with pytest.raises(SparqlSyntaxError) as err:
        parse_sparql(text)
    assert 0 <= err.value.position <= len(text)


def test_unknown_prefix_position():
    text = "SELECT ?x WHERE { ?x ex:p ?y }"
    with pytest.raises(SparqlSyntaxError) as err:
        parse_sparql(text)
    assert text[err.value.position:].startswith("ex:p")


def test_unbound_select_var():
    with pytest.raises(UnboundSelectVar):
        parse_sparql("SELECT ?t WHERE { ?p rdf:type Person. ?p hasTitle ?title }")


names = st.from_regex(r"[A-Za-z][A-Za-z0-9_]{0,5}", fullmatch=True).filter(
    lambda s: s.upper() not in {"A", "SELECT", "WHERE", "OPTIONAL", "FILTER", "UNION", "MINUS", "GRAPH", "BIND",
                                "VALUES", "SERVICE", "ORDER", "GROUP", "HAVING", "LIMIT", "OFFSET", "PREFIX",
                                "BASE", "DISTINCT", "REDUCED", "CONSTRUCT", "ASK", "DESCRIBE", "FROM", "EXISTS",
                                "NOT"})
objects = st.one_of(names.map(Var), names.map(Iri),
                    st.text(alphabet=st.characters(blacklist_categories=("Cs", "Cc")), max_size=6).map(Literal),
                    st.integers(-1000, 1000).map(Literal),
                    st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False).map(Literal))


@st.composite
def queries(draw):
    patterns = draw(st.lists(st.tuples(names.map(Var), names.map(Iri), objects), min_size=1, max_size=4))
    patterns = tuple(TriplePattern(*p) for p in patterns)
    q = SparqlQuery((), patterns)
    chosen = draw(st.lists(st.sampled_from(q.variables()), min_size=1, unique=True))
    return SparqlQuery(tuple(chosen), patterns)


@given(queries())
def test_print_parse_round_trip(q):
    assert parse_sparql(print_sparql(q)) == q
    assert print_sparql(parse_sparql(print_sparql(q))) == print_sparql(q)
