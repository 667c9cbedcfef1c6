import pathlib

import pytest

from synq.corpus import load_corpus_dir, load_corpus_path
from synq.query import WordListTable, load_query_file

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> pathlib.Path:
    return FIXTURES


@pytest.fixture(scope="session")
def main_corpus():
    return load_corpus_dir(str(FIXTURES / "main_corpus"), corpus_id="main")


@pytest.fixture(scope="session")
def suggest_corpus():
    return load_corpus_path(str(FIXTURES / "suggest.conllu"), "suggest")


@pytest.fixture(scope="session")
def control_corpus():
    return load_corpus_path(str(FIXTURES / "control.conllu"), "control")


@pytest.fixture(scope="session")
def context_corpus():
    return load_corpus_path(str(FIXTURES / "context.conllu"), "context")


@pytest.fixture(scope="session")
def word_lists():
    return WordListTable.load(str(FIXTURES / "queries" / "word_lists.txt"))


@pytest.fixture(scope="session")
def main_queries(word_lists):
    return load_query_file(str(FIXTURES / "queries" / "main.dsl"), word_lists)
