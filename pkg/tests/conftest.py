import pytest

from linkrag.corpus import BASE_URL, synthetic_documents, synthetic_suite
from linkrag.embedding import HashingEmbedder
from linkrag.index import build_index
from linkrag.ingest import Chunk, LinkRef, build_chunk_id, ingest_documents


@pytest.fixture(scope="session")
def embedder():
    return HashingEmbedder()


@pytest.fixture(scope="session")
def synthetic_chunks():
    return ingest_documents(synthetic_documents(), BASE_URL)


@pytest.fixture(scope="session")
def synthetic_index(synthetic_chunks, embedder):
    return build_index(synthetic_chunks, embedder)


@pytest.fixture(scope="session")
def suite():
    return synthetic_suite()


def make_chunk(url, anchor, index, text, links=()):
    return Chunk(build_chunk_id(url, anchor, index), url, anchor, index, text, tuple(links))


def link_to(url, anchor=None, context="", internal=True):
    return LinkRef(url, anchor, context, internal)


# (number, title, passed, detail) rows appended by test_acceptance.py
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"{status} criterion {number}: {title} ({detail})")
