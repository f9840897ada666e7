"""Attribute classifier: multinomial naive Bayes with add-alpha smoothing.

The classifier is the source of truth for the attribute: it assigns control
tokens at data-building time, filters candidates at inference time, and
defines the Accuracy metric. Real neural classifiers attach through the
bridge protocol instead; this built-in one has exactly hand-checkable
probabilities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .textcore import AttributeLabel, DataError, LabeledExample


@dataclass
class ClassifierModel:
    labels: tuple  # AttributeLabel, ordered by index
    log_prior: list  # per label
    log_likelihood: list  # per label: {token: log prob}
    log_unk: list  # per label: add-alpha mass for unseen tokens
    alpha: float

    def label_by_name(self, name: str) -> AttributeLabel:
        for lab in self.labels:
            if lab.name == name:
                return lab
        raise DataError(f"unknown label: {name!r}")

    def to_json(self) -> dict:
        return {
            "format": "restyle/classifier/v1",
            "labels": [lab.name for lab in self.labels],
            "alpha": self.alpha,
            "log_prior": list(self.log_prior),
            "log_unk": list(self.log_unk),
            "log_likelihood": [dict(table) for table in self.log_likelihood],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ClassifierModel":
        if doc.get("format") != "restyle/classifier/v1":
            raise DataError("expected format restyle/classifier/v1")
        labels = tuple(AttributeLabel(n, i) for i, n in enumerate(doc["labels"]))
        return cls(
            labels=labels,
            log_prior=list(doc["log_prior"]),
            log_likelihood=[dict(t) for t in doc["log_likelihood"]],
            log_unk=list(doc["log_unk"]),
            alpha=float(doc["alpha"]),
        )


def train_classifier(
    corpus: Sequence[LabeledExample],
    labels: Sequence[AttributeLabel],
    alpha: float = 1.0,
) -> ClassifierModel:
    """Fit add-alpha multinomial naive Bayes on gold-labeled examples."""
    if alpha <= 0:
        raise DataError("alpha must be > 0")
    labels = tuple(labels)
    token_counts = [{} for _ in labels]
    total_tokens = [0 for _ in labels]
    doc_counts = [0 for _ in labels]
    vocab = set()
    for example in corpus:
        if example.label is None:
            raise DataError("training example without gold label")
        li = example.label.index
        doc_counts[li] += 1
        for tok in example.seq:
            token_counts[li][tok] = token_counts[li].get(tok, 0) + 1
            total_tokens[li] += 1
            vocab.add(tok)
    if any(c == 0 for c in doc_counts):
        missing = labels[doc_counts.index(0)].name
        raise DataError(f"unrepresented label: {missing}")

    n_docs = sum(doc_counts)
    v = len(vocab)
    log_prior = [math.log(c / n_docs) for c in doc_counts]
    log_likelihood = []
    log_unk = []
    for li in range(len(labels)):
        denom = total_tokens[li] + alpha * v
        log_likelihood.append(
            {tok: math.log((token_counts[li].get(tok, 0) + alpha) / denom) for tok in vocab}
        )
        log_unk.append(math.log(alpha / denom))
    return ClassifierModel(
        labels=labels,
        log_prior=log_prior,
        log_likelihood=log_likelihood,
        log_unk=log_unk,
        alpha=alpha,
    )


def predict_proba(model: ClassifierModel, seq: Sequence[str]) -> list:
    """Posterior probability vector over labels; empty input yields priors."""
    scores = []
    for li in range(len(model.labels)):
        table = model.log_likelihood[li]
        s = model.log_prior[li]
        for tok in seq:
            s += table.get(tok, model.log_unk[li])
        scores.append(s)
    top = max(scores)
    exp = [math.exp(s - top) for s in scores]
    z = sum(exp)
    return [e / z for e in exp]


def predict_label(model: ClassifierModel, seq: Sequence[str]) -> AttributeLabel:
    """Argmax label; ties broken by lowest label index."""
    probs = predict_proba(model, seq)
    best = 0
    for i in range(1, len(probs)):
        if probs[i] > probs[best]:
            best = i
    return model.labels[best]
