import pytest

from nosqint.dl import Atomic, SubClassOf, dumps_ontology
from nosqint.errors import InductionError, LogParseError, UnknownContainer
from nosqint.induction import (
    CONCEPT_TO_CONTAINER, CONCEPT_TO_NESTED_PATH, CONCEPT_TO_TYPE_VALUE, DATATYPE_ROLE_TO_KEY, OBJECT_ROLE_TO_KEY,
    Full, FrequencyLog, IncrementalHook, InductionConfig, Mapping, detect_foreign_keys, detect_type_keys, dumps_mappings,
    incremental_update, induce, induce_local, loads_mappings, parse_strategy, profile_container, read_frequency_log,
    role_label, sanitize, start_incremental,
)
from nosqint.store import ColumnStore, DocumentDatabase, SourceCatalog

from conftest import DATA


@pytest.fixture
def shops():
    db = DocumentDatabase("s", {
        "Shop": {f"s{i}": {"name": f"n{i}", "address": {"city": ["Paris", "Lyon"][i % 2], "zip": i}}
                 for i in range(4)},
        "Order": {f"o{i}": {"shop": f"s{i % 4}", "total": i * 1.5} for i in range(5)},
    })
    return SourceCatalog([db])


def test_strategies_parse():
    assert parse_strategy("full") == Full()
    assert parse_strategy("incremental") == IncrementalHook()
    assert parse_strategy("freq:/tmp/a:b.log:3") == FrequencyLog("/tmp/a:b.log", 3)
    for bad in ("freq:x", "freq::3", "sometimes", "freq:x:0"):
        with pytest.raises(ValueError):
            parse_strategy(bad)


def test_naming_helpers():
    assert sanitize("first name") == "first_name"
    assert sanitize("2nd") == "_2nd"
    assert role_label("writeReview") == "hasWriteReview"


def test_conference_doc_profiles(catalog):
    profiles = profile_container(catalog, catalog.ref("docDB", "Person"))
    by_key = {p.key: p for p in profiles}
    assert by_key["type"].distinct_values == 4
    assert by_key["type"].total_occurrences == 11
    detect_foreign_keys(profiles, catalog)
    assert by_key["writeReview"].ref_target.container == "Document"
    assert by_key["firstName"].ref_target is None
    assert detect_type_keys(profiles) == ["type"]


def test_type_key_thresholds():
    db = DocumentDatabase("d", {"C": {f"e{i}": {"kind": f"k{i % 13}", "tag": f"t{i}"} for i in range(26)}})
    cat = SourceCatalog([db])
    profiles = profile_container(cat, cat.ref("d", "C"))
    # 13 distinct kinds exceeds max(12, 0.05 * 26); tags never repeat
    assert detect_type_keys(profiles) == []
    assert detect_type_keys(profiles, InductionConfig(type_abs=13)) == ["kind"]


def test_foreign_key_threshold():
    db = DocumentDatabase("d", {"A": {"a1": {}, "a2": {}, "a3": {}, "a4": {}},
                                "B": {"b1": {"ref": ["a1", "a2", "a3", "zz"]}, "b2": {"ref": "a4"}}})
    cat = SourceCatalog([db])
    profiles = detect_foreign_keys(profile_container(cat, cat.ref("d", "B")), cat, 0.8)
    assert profiles[0].ref_target.container == "A"
    profiles = detect_foreign_keys(profiles, cat, 0.9)
    assert profiles[0].ref_target is None


def test_nested_maps_are_reified(shops):
    onto, ms = induce_local(shops, "s")
    assert {"Shop", "Order", "Shop_address"} <= onto.concepts
    assert (onto.roles["address"].domain, onto.roles["address"].range) == ("Shop", "Shop_address")
    assert onto.roles["city"].domain == "Shop_address"
    assert onto.roles["zip"].range == "Number"
    assert onto.roles["shop"].kind == "Object" and onto.roles["shop"].range == "Shop"
    nested = ms.for_entity("Shop_address")
    assert nested.kind == CONCEPT_TO_NESTED_PATH and nested.key_path == ("address",)
    assert ms.for_entity("city").key_path == ("address", "city")
    # two repeated city values become type concepts under the reified concept
    assert SubClassOf(Atomic("Paris"), Atomic("Shop_address")) in onto.axioms
    assert ms.for_entity("Lyon").value == "Lyon"


def test_repeated_labels_are_qualified():
    db = ColumnStore("k", {"A": {"a1": {"title": "x"}}, "B": {"b1": {"title": "y"}}})
    onto, ms = induce_local(SourceCatalog([], [db]), "k")
    assert {"A_title", "B_title"} <= set(onto.roles)
    assert onto.annotations["A_title"] == ["hasTitle"]
    assert ms.for_entity("B_title").source.container == "B"


def test_conference_col_roles(induced):
    onto, _ = induced["colDB"]
    assert onto.roles["paper"].range == "Paper"
    assert onto.roles["author"].range == "Person"
    assert onto.roles["authors"].domain == "Paper"
    assert "Paper_abstract" in onto.roles and "Review_abstract" in onto.roles


def test_mappings_cover_every_entity(induced):
    for onto, ms in induced.values():
        entities = [m.entity for m in ms.entries]
        assert len(entities) == len(set(entities))
        assert set(entities) == onto.concepts | set(onto.roles)
        for m in ms.entries:
            assert m.kind in (CONCEPT_TO_CONTAINER, CONCEPT_TO_TYPE_VALUE, CONCEPT_TO_NESTED_PATH,
                              DATATYPE_ROLE_TO_KEY, OBJECT_ROLE_TO_KEY)
        text = dumps_mappings(ms)
        assert dumps_mappings(loads_mappings(text)) == text


def test_mapping_validation():
    from nosqint.store import ContainerRef
    with pytest.raises(ValueError):
        Mapping("x", "Nope", ContainerRef("d", "c"))
    with pytest.raises(ValueError):
        Mapping("x", OBJECT_ROLE_TO_KEY, ContainerRef("d", "c"), ("k",))


def test_induction_is_deterministic(catalog):
    a = induce(catalog, "docDB")
    b = induce(catalog, "docDB")
    assert dumps_ontology(a.ontology) == dumps_ontology(b.ontology)
    assert dumps_mappings(a.mappings) == dumps_mappings(b.mappings)


def test_frequency_log_restricts_sample(catalog, tmp_path):
    assert read_frequency_log(DATA / "access.log")["joe.doe@gmail.com"] == 1
    onto, _ = induce_local(catalog, "docDB", FrequencyLog(str(DATA / "access.log"), 1))
    # only Joe's entry is sampled: no type value repeats, so no type concepts
    assert onto.concepts == {"Document", "Person"}
    assert onto.roles["writeReview"].range == "Document"
    assert "authors" not in onto.roles
    bad = tmp_path / "bad.log"
    bad.write_text("two keys\n")
    with pytest.raises(LogParseError):
        read_frequency_log(bad)
    with pytest.raises(LogParseError):
        read_frequency_log(tmp_path / "missing.log")


def test_unknown_database(catalog):
    from nosqint.errors import UnknownDatabase
    with pytest.raises(UnknownDatabase):
        induce_local(catalog, "nope")


def test_incremental_reports_new_labels(catalog):
    state = start_incremental(catalog, "docDB")
    person = catalog.ref("docDB", "Person")
    state2, report = incremental_update(state, (person, "new@x.org",
                                                {"firstName": "N", "orcid": "0000", "type": ["User", "Chair"]}))
    assert report.added_concepts == ["Chair"]
    assert report.added_roles == ["orcid"]
    assert not report.removed_concepts and not report.removed_roles
    assert not report.empty
    assert SubClassOf(Atomic("Chair"), Atomic("User")) in report.added_axioms
    # an entry that only repeats known labels changes nothing visible
    _, quiet = incremental_update(state2, (person, "n2@x.org", {"firstName": "M", "type": ["User"]}))
    assert quiet.empty
    with pytest.raises(UnknownContainer):
        incremental_update(state, (catalog.ref("colDB", "Paper"), "p9", {}))
    with pytest.raises(InductionError):
        incremental_update(state, (person, "x", ["not", "a", "map"]))
