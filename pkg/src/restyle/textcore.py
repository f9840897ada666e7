"""Tokenization, vocabulary, and attribute-label conventions.

Everything downstream operates on whitespace-tokenized, lowercased token
sequences. Reserved sentinel spellings are fixed and bit-exact: "<mask>",
"<unk>", and "<attr:NAME>" for control tokens.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

MASK_TOKEN = "<mask>"
UNK_TOKEN = "<unk>"

TokenSeq = tuple  # tuple[str, ...]; immutable token sequence


class DataError(ValueError):
    """Malformed or insufficient input data."""


@dataclass(frozen=True)
class AttributeLabel:
    name: str
    index: int


@dataclass(frozen=True)
class LabeledExample:
    text: str
    seq: tuple
    label: Optional[AttributeLabel] = None
    predicted_label: Optional[AttributeLabel] = None


def make_label_set(names: Sequence[str]) -> tuple:
    """Build an ordered label set from unique names."""
    if len(set(names)) != len(names):
        raise DataError("label names must be unique")
    if len(names) < 2:
        raise DataError("label set size must be >= 2")
    return tuple(AttributeLabel(name, i) for i, name in enumerate(names))


def tokenize(text: str) -> tuple:
    """Lowercase and split on whitespace runs."""
    return tuple(text.lower().split())


def detokenize(seq: Iterable[str]) -> str:
    """Join tokens with single spaces; inverse of tokenize on valid TokenSeqs."""
    return " ".join(seq)


def control_token(label: AttributeLabel) -> str:
    """Canonical control-token spelling for an attribute label."""
    return f"<attr:{label.name}>"


@dataclass
class Vocab:
    """Dense token<->id table with reserved sentinel ids assigned first."""

    id_to_token: list = field(default_factory=list)
    token_to_id: dict = field(default_factory=dict)
    labels: tuple = ()

    def add(self, token: str) -> int:
        if token in self.token_to_id:
            return self.token_to_id[token]
        idx = len(self.id_to_token)
        self.id_to_token.append(token)
        self.token_to_id[token] = idx
        return idx

    def id(self, token: str) -> int:
        idx = self.token_to_id.get(token)
        if idx is None:
            return self.token_to_id[UNK_TOKEN]
        return idx

    def lookup(self, idx: int) -> str:
        return self.id_to_token[idx]

    def __len__(self) -> int:
        return len(self.id_to_token)

    @property
    def mask_id(self) -> int:
        return self.token_to_id[MASK_TOKEN]

    @property
    def unk_id(self) -> int:
        return self.token_to_id[UNK_TOKEN]

    def control_id(self, label: AttributeLabel) -> int:
        tok = control_token(label)
        if tok not in self.token_to_id:
            raise DataError(f"unknown label: {label.name}")
        return self.token_to_id[tok]

    @property
    def reserved_ids(self) -> frozenset:
        return frozenset(range(2 + len(self.labels)))

    def to_json(self) -> dict:
        return {
            "format": "restyle/vocab/v1",
            "tokens": list(self.id_to_token),
            "labels": [lab.name for lab in self.labels],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Vocab":
        if doc.get("format") != "restyle/vocab/v1":
            raise DataError("expected format restyle/vocab/v1")
        labels = make_label_set(doc["labels"])
        vocab = cls(labels=labels)
        for tok in doc["tokens"]:
            vocab.add(tok)
        return vocab


def build_vocab(corpus: Sequence[LabeledExample], labels: Sequence[AttributeLabel]) -> Vocab:
    """Reserved tokens first (MASK, UNK, one control per label), then corpus
    tokens in first-occurrence order. Deterministic."""
    if not corpus:
        raise DataError("empty corpus")
    vocab = Vocab(labels=tuple(labels))
    vocab.add(MASK_TOKEN)
    vocab.add(UNK_TOKEN)
    reserved = {MASK_TOKEN, UNK_TOKEN}
    for label in labels:
        tok = control_token(label)
        vocab.add(tok)
        reserved.add(tok)
    for example in corpus:
        for tok in example.seq:
            if tok in reserved:
                raise DataError(f"reserved token appears in corpus: {tok!r}")
            vocab.add(tok)
    return vocab


def read_jsonl_corpus(path, labels: Optional[Sequence[AttributeLabel]] = None) -> list:
    """Read a JSON Lines corpus ({"text": ..., "label": optional})."""
    by_name = {lab.name: lab for lab in labels} if labels else {}
    examples = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            text = obj.get("text")
            if not isinstance(text, str):
                raise DataError(f"{path}:{lineno}: missing 'text' field")
            label = None
            if obj.get("label") is not None and labels is not None:
                name = obj["label"]
                if name not in by_name:
                    raise DataError(f"{path}:{lineno}: unknown label {name!r}")
                label = by_name[name]
            examples.append(LabeledExample(text=text, seq=tokenize(text), label=label))
    return examples
