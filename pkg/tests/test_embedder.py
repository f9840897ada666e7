"""TF-IDF cosine similarity: formula values and metric properties."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from restyle.embedder import EmbeddingIndex, fit_embedder, similarity
from restyle.textcore import DataError, LabeledExample, tokenize


def _ex(text):
    return LabeledExample(text=text, seq=tokenize(text))


def test_idf_single_document():
    index = fit_embedder([_ex("a")])
    # idf(a) = ln((1+1)/(1+1)) + 1 = 1
    assert math.isclose(index.idf["a"], 1.0, abs_tol=1e-12)


def test_idf_unseen_token_path():
    index = fit_embedder([_ex("a b"), _ex("a c")])
    # df = 0 -> idf = ln(1+N) + 1
    assert math.isclose(index.idf_of("zzz"), math.log(3.0) + 1.0, abs_tol=1e-12)
    # df counts documents, not occurrences
    assert math.isclose(index.idf["a"], math.log(3.0 / 3.0) + 1.0, abs_tol=1e-12)
    assert math.isclose(index.idf["b"], math.log(3.0 / 2.0) + 1.0, abs_tol=1e-12)


def test_cosine_hand_value():
    # uniform idf = 1 via a single doc containing every token once
    index = EmbeddingIndex(idf={"x": 1.0, "y": 1.0, "z": 1.0}, n_docs=1)
    got = similarity(index, ("x", "y"), ("x", "z"))
    assert math.isclose(got, 0.5, abs_tol=1e-12)  # 1/(sqrt(2)*sqrt(2))


def test_empty_conventions():
    index = fit_embedder([_ex("a")])
    assert similarity(index, (), ()) == 1.0
    assert similarity(index, ("a",), ()) == 0.0
    assert similarity(index, (), ("a",)) == 0.0


token = st.sampled_from(["a", "b", "c", "d", "e"])
seq = st.lists(token, min_size=0, max_size=10).map(tuple)


@pytest.fixture(scope="module")
def index():
    return fit_embedder([_ex("a b c"), _ex("c d"), _ex("d e a")])


@given(seq, seq)
@settings(max_examples=150)
def test_symmetry_and_range(index, a, b):
    ab = similarity(index, a, b)
    ba = similarity(index, b, a)
    assert math.isclose(ab, ba, abs_tol=1e-12)
    assert 0.0 <= ab <= 1.0


@given(seq.filter(bool), seq.filter(bool), st.integers(min_value=2, max_value=5))
@settings(max_examples=100)
def test_tf_scale_invariance(index, a, b, k):
    # repeating a sentence k times scales its tf vector; cosine is unchanged
    assert math.isclose(similarity(index, a * k, b), similarity(index, a, b), abs_tol=1e-9)


@given(seq.filter(bool))
@settings(max_examples=50)
def test_self_similarity_is_one(index, a):
    assert math.isclose(similarity(index, a, a), 1.0, abs_tol=1e-9)


def test_fit_requires_documents():
    with pytest.raises(DataError, match="empty corpus"):
        fit_embedder([])


def test_json_round_trip(index):
    again = EmbeddingIndex.from_json(index.to_json())
    assert again.idf == index.idf
    assert again.n_docs == index.n_docs
    with pytest.raises(DataError):
        EmbeddingIndex.from_json({"format": "nope"})
