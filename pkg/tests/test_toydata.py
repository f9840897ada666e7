"""Synthetic corpus: spec validation, generation contract, transfer oracle."""

import json

import pytest

from restyle.textcore import DataError
from restyle.toydata import (
    SLOT,
    ToyCorpusSpec,
    default_spec,
    gen_toy_corpus,
    oracle_swaps,
    write_jsonl,
)


def _spec(**overrides):
    base = dict(
        templates=(("it", "was", SLOT, "indeed"),),
        lexicons={"positive": ("good",), "negative": ("bad",)},
        count_per_label=5,
        seed=0,
    )
    base.update(overrides)
    return ToyCorpusSpec(**base)


def test_spec_requires_exactly_one_slot():
    with pytest.raises(DataError, match="exactly one SLOT"):
        _spec(templates=(("no", "slot", "here"),))
    with pytest.raises(DataError, match="exactly one SLOT"):
        _spec(templates=((SLOT, "and", SLOT),))


def test_spec_requires_disjoint_lexicons():
    with pytest.raises(DataError, match="overlap"):
        _spec(lexicons={"positive": ("good", "fine"), "negative": ("bad", "fine")})


def test_spec_requires_two_labels():
    with pytest.raises(DataError, match="two labels"):
        _spec(lexicons={"positive": ("good",)})


def test_train_counts_and_slot_fill():
    spec = _spec(count_per_label=7)
    train, test = gen_toy_corpus(spec, n_test_per_label=3)
    assert len(train) == 14
    assert len(test) == 6
    for row in train:
        tokens = row["text"].split()
        assert SLOT not in tokens
        word = tokens[2]
        assert word in spec.lexicons[row["label"]]


def test_test_rows_have_valid_references():
    spec = _spec(count_per_label=2)
    _, test = gen_toy_corpus(spec, n_test_per_label=4)
    for row in test:
        assert row["target_label"] != row["label"]
        src = row["source"].split()
        ref = row["reference"].split()
        assert len(src) == len(ref)
        diffs = [i for i, (a, b) in enumerate(zip(src, ref)) if a != b]
        assert diffs == [2]  # only the slot changes
        assert ref[2] in spec.lexicons[row["target_label"]]
        # the reference is in the transfer oracle set
        assert tuple(ref) in oracle_swaps(spec, tuple(src), row["target_label"])


def test_generation_is_seed_deterministic():
    a = gen_toy_corpus(default_spec(seed=5), 10)
    b = gen_toy_corpus(default_spec(seed=5), 10)
    c = gen_toy_corpus(default_spec(seed=6), 10)
    assert a == b
    assert a != c


def test_oracle_swaps_contents():
    spec = _spec(lexicons={"positive": ("good", "fine"), "negative": ("bad",)})
    source = ("it", "was", "bad", "indeed")
    swaps = oracle_swaps(spec, source, "positive")
    assert swaps == {("it", "was", "good", "indeed"), ("it", "was", "fine", "indeed")}
    # non-corpus sentence has no slot word -> empty oracle
    assert oracle_swaps(spec, ("hello", "world"), "positive") == set()


def test_default_spec_tokens_unique_outside_slot():
    spec = default_spec()
    seen = set()
    for template in spec.templates:
        for tok in template:
            if tok == SLOT:
                continue
            assert tok not in seen, f"duplicate template token {tok!r}"
            seen.add(tok)
    lexicon_words = set().union(*spec.lexicons.values())
    assert not seen & lexicon_words


def test_from_json_round_trip():
    spec = _spec()
    doc = {
        "templates": [" ".join(t) for t in spec.templates],
        "lexicons": {k: list(v) for k, v in spec.lexicons.items()},
        "count_per_label": spec.count_per_label,
        "seed": spec.seed,
    }
    assert ToyCorpusSpec.from_json(doc) == spec


def test_write_jsonl(tmp_path):
    path = tmp_path / "out.jsonl"
    rows = [{"text": "a b", "label": "positive"}, {"text": "c d", "label": "negative"}]
    write_jsonl(rows, path)
    lines = path.read_text().splitlines()
    assert [json.loads(line) for line in lines] == rows
