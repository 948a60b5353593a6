import numpy as np
import pytest

from itemvec.corpus import Corpus, Vocabulary
from itemvec.trainer import EmbeddingModel


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def tiny_vocab():
    return Vocabulary(["a", "b", "c", "d"], [3, 2, 2, 1])


def random_model(n, m, seed=0, scale=0.5):
    r = np.random.default_rng(seed)
    vocab = Vocabulary([f"t{i}" for i in range(n)], np.ones(n, dtype=np.int64))
    return EmbeddingModel(r.normal(0, scale, (n, m)), r.normal(0, scale, (n, m)), vocab)


def two_cluster_corpus(reps=200):
    """Sets {a,b} and {c,d} repeated; ids a=0, b=1, c=2, d=3."""
    vocab = Vocabulary(["a", "b", "c", "d"], [reps] * 4)
    return Corpus.from_sets([[0, 1], [2, 3]] * reps), vocab


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(RESULTS):
        ok, name, detail = RESULTS[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {key:>2}. {name}: {detail}")
