import pytest

from sarch import HashingProvider, SearchEngine, load_stopwords
from sarch.pipeline import IngestResult, ingest_corpus_dir

from pathlib import Path

FIXTURES = Path(__file__).parent / "fixtures"
CORPUS_DIR = FIXTURES / "corpus"


@pytest.fixture(scope="session")
def provider() -> HashingProvider:
    return HashingProvider(dim=256)


@pytest.fixture(scope="session")
def ingested(provider) -> IngestResult:
    return ingest_corpus_dir(CORPUS_DIR, provider)


@pytest.fixture(scope="session")
def engine(ingested, provider) -> SearchEngine:
    return SearchEngine(
        index=ingested.index,
        stores=ingested.stores,
        provider=provider,
        manifest=ingested.manifest,
        display=ingested.display,
        stopwords=load_stopwords(),
    )


def pytest_runtest_logreport(report):
    # one visible verdict line per acceptance criterion
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    verdict = "PASS" if report.passed else "FAIL"
    print(f"\n[ACCEPTANCE] {verdict} {name}")
