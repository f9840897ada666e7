"""Shared fixtures: the synthetic corpus and components trained on it."""

from __future__ import annotations

import pytest

from restyle.classifier import train_classifier
from restyle.embedder import fit_embedder
from restyle.metrics import train_lm
from restyle.textcore import LabeledExample, build_vocab, make_label_set, tokenize
from restyle.toydata import default_spec, gen_toy_corpus


@pytest.fixture(scope="session")
def labels2():
    return make_label_set(("positive", "negative"))


@pytest.fixture(scope="session")
def toy_paths(tmp_path_factory):
    """Default synthetic corpus written to disk: (train path, test path)."""
    from restyle.toydata import write_jsonl

    root = tmp_path_factory.mktemp("toy")
    train, test = gen_toy_corpus(default_spec(seed=0), n_test_per_label=25)
    write_jsonl(train, root / "train.jsonl")
    write_jsonl(test, root / "test.jsonl")
    return root / "train.jsonl", root / "test.jsonl"


@pytest.fixture(scope="session")
def toy_components(toy_paths, labels2):
    """(corpus, vocab, classifier, embedder, lm, test triples) on the default
    synthetic corpus."""
    from restyle.metrics import read_test_set
    from restyle.textcore import read_jsonl_corpus

    train_path, test_path = toy_paths
    corpus = read_jsonl_corpus(train_path, labels2)
    vocab = build_vocab(corpus, labels2)
    clf = train_classifier(corpus, labels2)
    index = fit_embedder(corpus)
    lm = train_lm(corpus)
    test = read_test_set(test_path, labels2)
    return corpus, vocab, clf, index, lm, test


def example(text: str, label=None) -> LabeledExample:
    return LabeledExample(text=text, seq=tokenize(text), label=label)


@pytest.fixture(scope="session")
def tiny_corpus(labels2):
    """Two-sentence lexicon corpus, repeated so the classifier is confident."""
    pos, neg = labels2
    out = []
    for _ in range(10):
        out.append(example("the food was great", pos))
        out.append(example("the food was awful", neg))
    return out
