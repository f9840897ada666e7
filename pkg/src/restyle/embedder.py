"""Sentence similarity via tf-idf cosine.

Stands in for neural sentence encoders in candidate selection and the
Semantic metric. Unsupervised: fit on the same non-parallel corpus the rest
of the system trains on. Neural embedders attach through the bridge protocol
(embedding role); cosine is always computed locally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .textcore import DataError, LabeledExample


@dataclass
class EmbeddingIndex:
    idf: dict  # token -> idf weight
    n_docs: int

    def idf_of(self, token: str) -> float:
        default = math.log(1.0 + self.n_docs) + 1.0  # df = 0 path
        return self.idf.get(token, default)

    def to_json(self) -> dict:
        return {"format": "restyle/embedder/v1", "n_docs": self.n_docs, "idf": dict(self.idf)}

    @classmethod
    def from_json(cls, doc: dict) -> "EmbeddingIndex":
        if doc.get("format") != "restyle/embedder/v1":
            raise DataError("expected format restyle/embedder/v1")
        return cls(idf=dict(doc["idf"]), n_docs=int(doc["n_docs"]))


def fit_embedder(corpus: Sequence[LabeledExample]) -> EmbeddingIndex:
    """idf(t) = ln((1+N)/(1+df(t))) + 1 over the corpus documents."""
    if not corpus:
        raise DataError("empty corpus")
    df = {}
    for example in corpus:
        for tok in set(example.seq):
            df[tok] = df.get(tok, 0) + 1
    n = len(corpus)
    idf = {tok: math.log((1.0 + n) / (1.0 + d)) + 1.0 for tok, d in df.items()}
    return EmbeddingIndex(idf=idf, n_docs=n)


def _tfidf(index: EmbeddingIndex, seq: Sequence[str]) -> dict:
    tf = {}
    for tok in seq:
        tf[tok] = tf.get(tok, 0) + 1
    return {tok: count * index.idf_of(tok) for tok, count in tf.items()}


def similarity(index: EmbeddingIndex, a: Sequence[str], b: Sequence[str]) -> float:
    """Cosine of tf-idf vectors, in [0,1]. Both empty -> 1; one empty -> 0."""
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    va = _tfidf(index, a)
    vb = _tfidf(index, b)
    dot = sum(w * vb[t] for t, w in va.items() if t in vb)
    na = math.sqrt(sum(w * w for w in va.values()))
    nb = math.sqrt(sum(w * w for w in vb.values()))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return min(1.0, dot / (na * nb))
