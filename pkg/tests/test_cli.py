import subprocess
import sys

import pytest

from conftest import GOLDEN
from pipeline import DATA, cli, run_pipeline

CATALOG = DATA / "stores.json"


@pytest.fixture(scope="module")
def work(tmp_path_factory):
    work = tmp_path_factory.mktemp("pipeline")
    run_pipeline(work)
    return work


def test_pipeline_outputs(work):
    assert (work / "example5.bql").read_text() == (GOLDEN / "example5.bql").read_text()
    assert (work / "example5.tsv").read_text().splitlines() == [
        "title", "Aligning expressive ontologies", "Schema induction for document stores"]
    assert (work / "snapshots" / "docDB.json").is_file()
    assert (work / "docDB.onto.json").read_text() == (GOLDEN / "docDB.ontology.json").read_text()


def test_ingest_summary_goes_to_stdout():
    code, out, _ = cli("ingest", "--catalog", CATALOG)
    assert code == 0
    assert out.splitlines() == ["colDB.Paper\tColumnFamily\t3", "colDB.Person\tColumnFamily\t4",
                                "colDB.Review\tColumnFamily\t3", "docDB.Document\tCollection\t4",
                                "docDB.Person\tCollection\t5"]


def test_query_column_plan_to_stdout(work):
    code, out, err = cli("query", "--global", work / "global.json", "--catalog", CATALOG,
                         "--sparql", DATA / "example5.rq", "--emit", "column")
    assert code == 0, err
    assert "getSlice" in out


def test_usage_errors(work, tmp_path):
    assert cli()[0] == 2
    assert cli("induce", "--catalog", CATALOG)[0] == 2
    code, _, err = cli("induce", "--catalog", tmp_path / "missing.json", "--database", "docDB")
    assert code == 2 and "input file not found" in err
    code, _, err = cli("induce", "--catalog", CATALOG, "--database", "docDB", "--strategy", "sometimes")
    assert code == 2
    code, _, _ = cli("query", "--global", work / "global.json", "--catalog", CATALOG,
                     "--sparql", DATA / "example5.rq", "--explain", "--emit", "doc")
    assert code == 2


def test_seed_is_validated(monkeypatch):
    monkeypatch.setenv("NOSQINT_SEED", "-3")
    code, _, err = cli("ingest", "--catalog", CATALOG)
    assert code == 2 and "NOSQINT_SEED" in err
    monkeypatch.setenv("NOSQINT_SEED", "42")
    assert cli("ingest", "--catalog", CATALOG)[0] == 0


def test_library_errors_exit_one(work, tmp_path):
    code, _, err = cli("induce", "--catalog", CATALOG, "--database", "nope")
    assert code == 1 and err.startswith("error [") and "UnknownDatabase:" in err
    bad = tmp_path / "q.rq"
    bad.write_text("SELECT ?x WHERE { ?x rdf:type Unicorn . }")
    code, _, err = cli("query", "--global", work / "global.json", "--catalog", CATALOG, "--sparql", bad)
    assert code == 1 and "UnresolvableType:" in err


def test_malformed_json_exits_one(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _, err = cli("ingest", "--catalog", bad)
    assert code == 1 and err.startswith("error [")


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nosqint", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "induce" in proc.stdout
