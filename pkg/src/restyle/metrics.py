"""Evaluation suite: Accuracy, Semantic, G, S-BLEU, Fluency.

Accuracy is judged by the same attribute classifier that drives the system
(the classifier is the source of truth for the attribute). Semantic is
embedding cosine against the reference (or the source in reference-free
settings). G is the geometric mean of the two. S-BLEU is sentence BLEU of
the output against its own source, averaged. Fluency is perplexity under an
n-gram language model trained on the attribute corpus.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .classifier import ClassifierModel, predict_label
from .embedder import EmbeddingIndex, similarity
from .textcore import AttributeLabel, DataError, LabeledExample, detokenize

LM_BOS = "<s>"
LM_EOS = "</s>"
LM_UNK = "<unk>"


class GMode(enum.Enum):
    CORPUS = "corpus"
    PER_EXAMPLE = "per_example"


class SemanticMode(enum.Enum):
    VS_REFERENCE = "vs_reference"
    VS_SOURCE = "vs_source"


@dataclass(frozen=True)
class EvalRecord:
    source: tuple
    output: tuple
    target_label: AttributeLabel
    reference: Optional[tuple] = None


@dataclass
class EvalReport:
    accuracy: float
    semantic: float
    g: float
    s_bleu: float
    fluency: float
    g_mode: GMode
    rows: list = field(default_factory=list)  # per-record dicts

    def to_json(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "semantic": self.semantic,
            "g": self.g,
            "s_bleu": self.s_bleu,
            "fluency": self.fluency,
            "g_mode": self.g_mode.value,
            "records": self.rows,
        }

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.DictWriter(
                handle,
                fieldnames=[
                    "source", "output", "reference", "target",
                    "acc_hit", "semantic", "bleu", "ppl",
                ],
            )
            writer.writeheader()
            for row in self.rows:
                writer.writerow(row)


def _ngrams(seq: Sequence[str], n: int) -> Counter:
    return Counter(tuple(seq[i : i + n]) for i in range(len(seq) - n + 1))


def bleu(candidate: Sequence[str], reference: Sequence[str]) -> float:
    """Sentence BLEU-4 in [0,100]: modified precisions, add-1 smoothing for
    orders 2-4 (order 1 unsmoothed), brevity penalty exp(1 - r/c) for c < r."""
    c, r = len(candidate), len(reference)
    if c == 0 and r == 0:
        return 100.0
    if c == 0:
        return 0.0
    log_precisions = 0.0
    for n in range(1, 5):
        cand = _ngrams(candidate, n)
        ref = _ngrams(reference, n)
        matched = sum(min(count, ref[gram]) for gram, count in cand.items())
        total = sum(cand.values())
        if n == 1:
            if matched == 0:
                return 0.0
            p = matched / total
        else:
            p = (matched + 1) / (total + 1)
        log_precisions += math.log(p) / 4.0
    bp = 1.0 if c >= r else math.exp(1.0 - r / c)
    return 100.0 * bp * math.exp(log_precisions)


def g_score(accuracy: float, semantic: float) -> float:
    """Geometric mean of attribute accuracy and semantic preservation."""
    if not 0.0 <= accuracy <= 1.0 or not 0.0 <= semantic <= 1.0:
        raise DataError("g_score inputs must be in [0,1]")
    return math.sqrt(accuracy * semantic)


@dataclass
class NgramLM:
    """Order-2 add-k language model with sentence-boundary symbols.

    Outcome space is the corpus vocabulary plus the end and unknown symbols,
    so every conditional distribution sums to one.
    """

    add_k: float
    vocab: list  # corpus tokens, first-occurrence order
    bigram: dict  # prev -> {token: count}
    context_total: dict  # prev -> count
    order: int = 2

    @property
    def outcomes(self) -> list:
        return self.vocab + [LM_EOS, LM_UNK]

    def _norm(self, token: str) -> str:
        return token if token in self.bigram or token in self._vocab_set else LM_UNK

    def __post_init__(self):
        self._vocab_set = set(self.vocab)

    def cond_prob(self, prev: str, token: str) -> float:
        if token not in self._vocab_set and token not in (LM_EOS, LM_UNK):
            token = LM_UNK
        if prev != LM_BOS and prev not in self._vocab_set:
            prev = LM_UNK
        counts = self.bigram.get(prev, {})
        total = self.context_total.get(prev, 0)
        k = self.add_k
        return (counts.get(token, 0) + k) / (total + k * len(self.outcomes))

    def to_json(self) -> dict:
        return {
            "format": "restyle/lm/v1",
            "add_k": self.add_k,
            "vocab": list(self.vocab),
            "bigram": {p: dict(t) for p, t in self.bigram.items()},
            "context_total": dict(self.context_total),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "NgramLM":
        if doc.get("format") != "restyle/lm/v1":
            raise DataError("expected format restyle/lm/v1")
        return cls(
            add_k=float(doc["add_k"]),
            vocab=list(doc["vocab"]),
            bigram={p: dict(t) for p, t in doc["bigram"].items()},
            context_total=dict(doc["context_total"]),
        )


def train_lm(corpus: Sequence[LabeledExample], add_k: float = 0.1) -> NgramLM:
    if not corpus:
        raise DataError("empty corpus")
    if add_k <= 0:
        raise DataError("unsmoothed LM forbidden")
    vocab = []
    seen = set()
    bigram = {}
    context_total = {}
    for example in corpus:
        prev = LM_BOS
        for tok in list(example.seq) + [LM_EOS]:
            if tok != LM_EOS and tok not in seen:
                seen.add(tok)
                vocab.append(tok)
            table = bigram.setdefault(prev, {})
            table[tok] = table.get(tok, 0) + 1
            context_total[prev] = context_total.get(prev, 0) + 1
            prev = tok
    return NgramLM(add_k=add_k, vocab=vocab, bigram=bigram, context_total=context_total)


def perplexity(lm: NgramLM, seq: Sequence[str]) -> float:
    """exp of mean negative log probability per predicted token, including
    the end symbol; an empty sequence scores the end symbol alone."""
    prev = LM_BOS
    nll = 0.0
    count = 0
    for tok in list(seq) + [LM_EOS]:
        nll -= math.log(lm.cond_prob(prev, tok))
        count += 1
        prev = tok if tok in lm._vocab_set else LM_UNK
    return math.exp(nll / count)


def evaluate(
    records: Sequence[EvalRecord],
    clf: ClassifierModel,
    index: EmbeddingIndex,
    lm: NgramLM,
    g_mode: GMode = GMode.CORPUS,
    semantic_mode: SemanticMode = SemanticMode.VS_REFERENCE,
) -> EvalReport:
    if not records:
        raise DataError("no records to evaluate")
    rows = []
    hits = []
    sems = []
    bleus = []
    ppls = []
    for rec in records:
        if semantic_mode is SemanticMode.VS_REFERENCE:
            if rec.reference is None:
                raise DataError("VS_REFERENCE requires references on all records")
            other = rec.reference
        else:
            other = rec.source
        hit = 1.0 if predict_label(clf, rec.output) == rec.target_label else 0.0
        sem = similarity(index, rec.output, other)
        b = bleu(rec.output, rec.source)
        ppl = perplexity(lm, rec.output)
        hits.append(hit)
        sems.append(sem)
        bleus.append(b)
        ppls.append(ppl)
        rows.append(
            {
                "source": detokenize(rec.source),
                "output": detokenize(rec.output),
                "reference": detokenize(rec.reference) if rec.reference else "",
                "target": rec.target_label.name,
                "acc_hit": int(hit),
                "semantic": sem,
                "bleu": b,
                "ppl": ppl,
            }
        )
    n = len(records)
    accuracy = sum(hits) / n
    semantic = sum(sems) / n
    if g_mode is GMode.CORPUS:
        g = g_score(accuracy, semantic)
    else:
        g = sum(g_score(h, s) for h, s in zip(hits, sems)) / n
    return EvalReport(
        accuracy=accuracy,
        semantic=semantic,
        g=g,
        s_bleu=sum(bleus) / n,
        fluency=sum(ppls) / n,
        g_mode=g_mode,
        rows=rows,
    )


def read_test_set(path, labels: Sequence[AttributeLabel]) -> list:
    """JSON Lines test set: {"source", "reference" (optional), "target_label"}.

    Returns (source seq, reference seq or None, target label) triples.
    """
    from .textcore import tokenize

    by_name = {lab.name: lab for lab in labels}
    out = []
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, 1):
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            if "source" not in obj or "target_label" not in obj:
                raise DataError(f"{path}:{lineno}: need 'source' and 'target_label'")
            if obj["target_label"] not in by_name:
                raise DataError(f"{path}:{lineno}: unknown label {obj['target_label']!r}")
            ref = tokenize(obj["reference"]) if obj.get("reference") else None
            out.append((tokenize(obj["source"]), ref, by_name[obj["target_label"]]))
    return out
