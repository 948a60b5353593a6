import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from itemvec.corpus import Vocabulary
from itemvec.similarity import ItemSpace, assemble, cosine, neighbor_table, top_k
from itemvec.svd import SvdModel
from itemvec.trainer import EmbeddingModel

from conftest import random_model


def space_of(vectors):
    vectors = np.asarray(vectors, dtype=np.float64)
    vocab = Vocabulary([f"i{i}" for i in range(len(vectors))], [1] * len(vectors))
    return ItemSpace(vectors, vocab)


def oracle_top_k(vectors, seed, k):
    """Exhaustive sort on (-cosine, id)."""
    rows = [(-cosine(vectors[seed], vectors[j]), j) for j in range(len(vectors)) if j != seed]
    return [j for _, j in sorted(rows)[:k]]


# --- cosine ------------------------------------------------------------------

def test_cosine_examples():
    assert cosine([3, 4], [4, 3]) == pytest.approx(0.96, abs=1e-15)
    assert cosine([1, 0], [0, 1]) == 0.0
    assert cosine([1, 2], [-1, -2]) == pytest.approx(-1.0)
    assert cosine([0, 0], [1, 1]) == 0.0


def test_cosine_dimension_mismatch():
    with pytest.raises(ValueError):
        cosine([1, 2], [1, 2, 3])


@settings(max_examples=50)
@given(arrays(np.float64, 6, elements=st.floats(-10, 10)), arrays(np.float64, 6, elements=st.floats(-10, 10)),
       st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
def test_cosine_scale_invariant_and_bounded(x, y, a, b):
    c = cosine(x, y)
    assert -1.0 - 1e-12 <= c <= 1.0 + 1e-12
    if np.linalg.norm(x) > 1e-6 and np.linalg.norm(y) > 1e-6:
        assert cosine(a * x, b * y) == pytest.approx(c, abs=1e-9)
        assert cosine(x, y) == pytest.approx(cosine(y, x), abs=1e-15)


# --- top-k -------------------------------------------------------------------

def test_tie_break_by_id():
    space = space_of([[1, 0], [1, 0], [1, 0], [0, 1]])
    assert top_k(space, 0, 2).ids == [1, 2]
    assert top_k(space, 2, 3).ids == [0, 1, 3]


def test_zero_vector_scores_zero():
    space = space_of([[1, 0], [0, 0], [-1, 0]])
    result = top_k(space, 0, 2)
    assert result.neighbors == [(1, 0.0), (2, -1.0)]
    assert all(s == 0.0 for _, s in top_k(space, 1, 2).neighbors)


def test_truncated_when_k_exceeds_vocab():
    result = top_k(space_of(np.eye(3)), 0, 10)
    assert result.truncated and len(result.ids) == 2


def test_exclude_and_errors():
    space = space_of(np.eye(4) + 0.1)
    assert 1 not in top_k(space, 0, 3, exclude=[1]).ids
    with pytest.raises(ValueError):
        top_k(space, 0, 0)
    with pytest.raises(IndexError):
        top_k(space, 9, 1)


@pytest.mark.parametrize("seed", range(5))
def test_matches_exhaustive_sort(seed):
    rng = np.random.default_rng(seed)
    V = rng.standard_normal((20, 5))
    V[3] = V[7]  # an exact tie
    space = space_of(V)
    for s in range(20):
        for k in (1, 4, 19):
            assert top_k(space, s, k).ids == oracle_top_k(V, s, k)


def test_discrete_ties_match_oracle():
    rng = np.random.default_rng(9)
    V = rng.integers(-1, 2, size=(60, 3)).astype(float)
    space = space_of(V)
    for s in range(0, 60, 7):
        assert top_k(space, s, 10).ids == oracle_top_k(V, s, 10)


def test_scores_descending_and_scale_invariant():
    V = np.random.default_rng(1).standard_normal((30, 4))
    a = top_k(space_of(V), 0, 10)
    b = top_k(space_of(V * np.arange(1, 31)[:, None]), 0, 10)
    assert a.ids == b.ids
    scores = [s for _, s in a.neighbors]
    assert scores == sorted(scores, reverse=True)


def test_neighbor_table():
    space = space_of(np.random.default_rng(0).standard_normal((10, 3)))
    table = neighbor_table(space, [0, 5], k=3)
    assert [t.seed for t in table] == [0, 5] and all(len(t.ids) == 3 for t in table)


# --- variants ----------------------------------------------------------------

def test_assemble_variants():
    m = random_model(6, 3, seed=1)
    m = EmbeddingModel(m.U, m.U[::-1].copy(), m.vocab)
    np.testing.assert_array_equal(assemble(m).vectors, m.U)
    np.testing.assert_array_equal(assemble(m, "context").vectors, m.V)
    np.testing.assert_array_equal(assemble(m, "additive").vectors, m.U + m.V)
    assert assemble(m, "concat").vectors.shape == (6, 6)
    with pytest.raises(ValueError):
        assemble(m, "bogus")


def test_assemble_needs_context():
    m = random_model(4, 2)
    with pytest.raises(ValueError):
        assemble(EmbeddingModel(m.U, None, m.vocab), "additive")


def test_assemble_svd_model():
    vocab = Vocabulary(list("abc"), [1, 1, 1])
    model = SvdModel(np.eye(3), np.ones(3), vocab)
    assert assemble(model).variant == "target"
    with pytest.raises(ValueError):
        assemble(model, "concat")
