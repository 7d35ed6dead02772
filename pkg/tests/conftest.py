import pytest

from opinrank.corpus import build_index, parse_corpus
from opinrank.crf import parse_conll, train
from opinrank.fuzzy import FuzzyConfig, InputPartition, TriangularMF
from opinrank.resources import default_model, fixture_text
from opinrank.text import OpinionLexicon


@pytest.fixture(scope="session")
def lexicon():
    return OpinionLexicon.default()


@pytest.fixture(scope="session")
def narrow_partition():
    """The (0,0,5) / (2.5,5,7.5) / (5,10,10) partition used in hand-worked examples."""
    return InputPartition(TriangularMF(0, 0, 5), TriangularMF(2.5, 5, 7.5), TriangularMF(5, 10, 10))


@pytest.fixture(scope="session")
def config():
    return FuzzyConfig()


@pytest.fixture(scope="session")
def toy_corpus():
    return parse_conll(fixture_text("toy.conll"))


@pytest.fixture(scope="session")
def toy_model(toy_corpus):
    return train(toy_corpus, seed=7)


@pytest.fixture(scope="session")
def aspect_model():
    return default_model()


@pytest.fixture(scope="session")
def laptop_records():
    return parse_corpus(fixture_text("laptops.tsv"))


@pytest.fixture(scope="session")
def laptop_index(laptop_records, aspect_model):
    return build_index(laptop_records, aspect_model)


# -- one pass/fail line per acceptance criterion -----------------------------

_acceptance = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or report.outcome != "passed":
        prev = _acceptance.get(report.nodeid)
        if prev is None or prev == "passed":
            _acceptance[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, outcome in _acceptance.items():
        name = nodeid.split("::")[-1]
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
