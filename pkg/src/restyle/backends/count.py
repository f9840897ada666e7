"""Count backend: control-conditioned bigram span infilling.

Learns, per control label, a histogram of masked-span lengths and bigram
continuation counts restricted to masked-run reconstructions. Generation
replaces each sentinel with a variable-length span: length drawn from the
histogram, tokens from a temperature-scaled bigram chain seeded by the
left-context token.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..noising import MaskedVariant, MaskMode
from ..rng import Xoshiro256StarStar
from ..textcore import MASK_TOKEN, AttributeLabel, DataError, Vocab
from .base import BOS, BackendError, GenMode, GenOptions, TrainingPair


@dataclass
class CountModel:
    vocab: Vocab
    span_hist: list  # per label index: {length: count}
    bigram: list  # per label index: {prev: {token: count}}
    unigram: list  # per label index: {token: count}; back-off for unseen prev

    @property
    def max_span(self) -> int:
        longest = max((max(h) for h in self.span_hist if h), default=1)
        return 2 * longest  # termination cap for span generation

    def to_json(self) -> dict:
        return {
            "format": "restyle/count/v1",
            "vocab": self.vocab.to_json(),
            "span_hist": [{str(k): v for k, v in h.items()} for h in self.span_hist],
            "bigram": self.bigram,
            "unigram": self.unigram,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "CountModel":
        if doc.get("format") != "restyle/count/v1":
            raise DataError("expected format restyle/count/v1")
        return cls(
            vocab=Vocab.from_json(doc["vocab"]),
            span_hist=[{int(k): v for k, v in h.items()} for h in doc["span_hist"]],
            bigram=[{p: dict(t) for p, t in b.items()} for b in doc["bigram"]],
            unigram=[dict(u) for u in doc["unigram"]],
        )


def _runs(masked: frozenset, n: int) -> list:
    """Maximal runs of masked positions, as (start, end) half-open pairs."""
    runs = []
    i = 0
    while i < n:
        if i in masked:
            j = i
            while j < n and j in masked:
                j += 1
            runs.append((i, j))
            i = j
        else:
            i += 1
    return runs


def train_count(pairs: Sequence[TrainingPair], vocab: Vocab) -> CountModel:
    if not pairs:
        raise BackendError("empty pairs")
    n_labels = len(vocab.labels)
    span_hist = [{} for _ in range(n_labels)]
    bigram = [{} for _ in range(n_labels)]
    unigram = [{} for _ in range(n_labels)]
    for pair in pairs:
        if pair.variant.kind is not MaskMode.HARD:
            raise BackendError("count backend accepts HARD variants only")
        li = pair.control.index
        for start, end in _runs(pair.variant.masked_positions, len(pair.source)):
            length = end - start
            span_hist[li][length] = span_hist[li].get(length, 0) + 1
            prev = pair.source[start - 1] if start > 0 else BOS
            for j in range(start, end):
                tok = pair.source[j]
                table = bigram[li].setdefault(prev, {})
                table[tok] = table.get(tok, 0) + 1
                unigram[li][tok] = unigram[li].get(tok, 0) + 1
                prev = tok
    return CountModel(vocab=vocab, span_hist=span_hist, bigram=bigram, unigram=unigram)


def _scaled(counts: dict, temperature: float, key_order) -> list:
    """Temperature-scaled distribution as (key, prob) in deterministic order."""
    keys = sorted(counts, key=key_order)
    weights = [counts[k] ** (1.0 / temperature) for k in keys]
    z = sum(weights)
    return [(k, w / z) for k, w in zip(keys, weights)]


def _draw(dist: list, rng: Xoshiro256StarStar):
    u = rng.random()
    acc = 0.0
    for key, p in dist:
        acc += p
        if u < acc:
            return key
    return dist[-1][0]


def _argmax(dist: list):
    best_key, best_p = dist[0]
    for key, p in dist[1:]:
        if p > best_p:
            best_key, best_p = key, p
    return best_key


def continuation_distribution(
    model: CountModel, label: AttributeLabel, prev: str, temperature: float = 1.0
) -> dict:
    """Normalized next-token distribution for a context (with back-off)."""
    li = label.index
    counts = model.bigram[li].get(prev)
    if not counts:
        counts = model.unigram[li]
    if not counts:
        raise BackendError(f"no continuations learned for label {label.name!r}")
    return dict(_scaled(counts, temperature, key_order=model.vocab.id))


def span_length_distribution(
    model: CountModel, label: AttributeLabel, temperature: float = 1.0
) -> dict:
    hist = model.span_hist[label.index]
    if not hist:
        raise BackendError(f"no spans learned for label {label.name!r}")
    return dict(_scaled(hist, temperature, key_order=lambda k: k))


def generate_count(
    model: CountModel,
    variant: MaskedVariant,
    control: AttributeLabel,
    opts: GenOptions,
) -> list:
    """n infilled sequences; one shared RNG consumed sample-by-sample."""
    if variant.kind is not MaskMode.HARD:
        raise BackendError("count backend generates from HARD variants only")
    rng = Xoshiro256StarStar(opts.seed)
    greedy = opts.mode is GenMode.GREEDY
    cap = min(model.max_span, opts.max_len)
    outputs = []
    for _ in range(opts.n):
        out = []
        prev = BOS
        for tok in variant.hard_tokens:
            if tok != MASK_TOKEN:
                out.append(tok)
                prev = tok
                continue
            if greedy:
                length = _argmax(_scaled_or_fail(model, control))
            else:
                length = _draw(_scaled_or_fail(model, control, opts.temperature), rng)
            length = min(length, cap)
            for _ in range(length):
                dist = list(
                    continuation_distribution(model, control, prev, opts.temperature).items()
                )
                nxt = _argmax(dist) if greedy else _draw(dist, rng)
                out.append(nxt)
                prev = nxt
        outputs.append(tuple(out))
    return outputs


def _scaled_or_fail(model: CountModel, control: AttributeLabel, temperature: float = 1.0):
    hist = model.span_hist[control.index]
    if not hist:
        raise BackendError(f"no spans learned for label {control.name!r}")
    return _scaled(hist, temperature, key_order=lambda k: k)
