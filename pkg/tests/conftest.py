from __future__ import annotations

import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).resolve().parent
ROOT = TESTS.parent
DATA = ROOT / "data" / "conference"
GOLDEN = TESTS / "golden"

sys.path.insert(0, str(TESTS))

from nosqint import alignment as al  # noqa: E402
from nosqint.dl import loads_ontology  # noqa: E402
from nosqint.globalont import build_global  # noqa: E402
from nosqint.induction import induce_local  # noqa: E402
from nosqint.store import load_catalog  # noqa: E402

# acceptance lines recorded by test_acceptance, echoed in the terminal summary
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])


@pytest.fixture(scope="session")
def catalog():
    return load_catalog(DATA / "stores.json")


@pytest.fixture(scope="session")
def induced(catalog):
    return {db: induce_local(catalog, db) for db in ("docDB", "colDB")}


@pytest.fixture(scope="session")
def synonyms():
    return al.load_synonyms(DATA / "synonyms.tsv")


@pytest.fixture(scope="session")
def matcher(synonyms):
    return al.MatcherConfig(synonyms=synonyms)


@pytest.fixture(scope="session")
def o1():
    return al.saturate(loads_ontology((DATA / "o1.json").read_text()))


@pytest.fixture(scope="session")
def o2():
    return al.saturate(loads_ontology((DATA / "o2.json").read_text()))


@pytest.fixture(scope="session")
def conference_go(induced, matcher):
    (od, md), (oc, mc) = induced["docDB"], induced["colDB"]
    simple = al.align_simple(al.saturate(od), al.saturate(oc), matcher)
    return build_global([od, oc], [simple], {"docDB": md, "colDB": mc})
