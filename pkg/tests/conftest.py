import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from corpus import BIAS_TEXT, generate_corpus  # noqa: E402

from tdassist.drawing import load_drawing  # noqa: E402
from tdassist.ilp import SearchParams, parse_bias  # noqa: E402
from tdassist.index import build_index  # noqa: E402
from tdassist.pipeline import build_tasks, learn_bootstrap  # noqa: E402


@pytest.fixture(scope="session")
def corpus_docs():
    return generate_corpus(12, seed=7)


@pytest.fixture(scope="session")
def drawings(corpus_docs):
    return [load_drawing(doc) for doc in corpus_docs]


@pytest.fixture(scope="session")
def modes():
    return parse_bias(BIAS_TEXT)


@pytest.fixture(scope="session")
def trained(drawings, modes):
    """Bootstrap run on the first six drawings (rows 1..6)."""
    tasks = build_tasks(drawings[:6], modes, SearchParams())
    return learn_bootstrap(tasks)


@pytest.fixture(scope="session")
def programs(trained):
    return {label: res.program for label, res in trained.results.items()}


@pytest.fixture(scope="session")
def small_index(corpus_docs, programs):
    return build_index(corpus_docs, programs, min_support_frac=0.25, max_literals=2)
