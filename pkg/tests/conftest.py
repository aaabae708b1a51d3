import pytest

from hoverbench.pipeline import build_corpus


@pytest.fixture(scope="session")
def small_corpus():
    """Shared tiny corpus: 3 sessions x 40 s, one held out for testing."""
    return build_corpus(3, 1, seed=123, duration=40.0)


@pytest.fixture(scope="session")
def desk_corpus():
    """Desk-scale corpus for statistical properties: 4 sessions x 120 s."""
    return build_corpus(4, 1, seed=7, duration=120.0)
