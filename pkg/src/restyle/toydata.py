"""Synthetic corpus generation for desk-scale experiments.

Sentences are templates with exactly one SLOT filled from a per-label
lexicon; lexicons are pairwise disjoint, so the attribute is perfectly
separable and a brute-force transfer oracle exists: the single-SLOT swaps of
a source sentence into the target label's lexicon.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from .rng import Xoshiro256StarStar
from .textcore import DataError

SLOT = "SLOT"


@dataclass(frozen=True)
class ToyCorpusSpec:
    templates: tuple  # token tuples, each containing exactly one SLOT
    lexicons: dict  # label name -> tuple of slot tokens
    count_per_label: int
    seed: int = 0

    def __post_init__(self):
        for template in self.templates:
            if sum(1 for t in template if t == SLOT) != 1:
                raise DataError("every template needs exactly one SLOT")
        names = list(self.lexicons)
        if len(names) < 2:
            raise DataError("need at least two labels")
        for i, a in enumerate(names):
            for b in names[i + 1 :]:
                if set(self.lexicons[a]) & set(self.lexicons[b]):
                    raise DataError(f"lexicons overlap: {a} and {b}")

    @classmethod
    def from_json(cls, doc: dict) -> "ToyCorpusSpec":
        return cls(
            templates=tuple(tuple(t.split()) for t in doc["templates"]),
            lexicons={k: tuple(v) for k, v in doc["lexicons"].items()},
            count_per_label=int(doc["count_per_label"]),
            seed=int(doc.get("seed", 0)),
        )


def _fill(template: tuple, word: str) -> tuple:
    return tuple(word if t == SLOT else t for t in template)


def oracle_swaps(spec: ToyCorpusSpec, source: tuple, target_name: str) -> set:
    """Brute-force oracle: every single-SLOT swap of the source into the
    target lexicon. Empty when the source is not a corpus sentence."""
    targets = set(spec.lexicons[target_name])
    all_slot_words = set().union(*spec.lexicons.values())
    out = set()
    slot_positions = [i for i, tok in enumerate(source) if tok in all_slot_words]
    for i in slot_positions:
        for word in targets:
            swapped = list(source)
            swapped[i] = word
            out.add(tuple(swapped))
    return out


def gen_toy_corpus(spec: ToyCorpusSpec, n_test_per_label: int = 0):
    """(train lines, test lines) as JSON-able dicts.

    Train: {"text", "label"} cycling templates per label, slot word drawn
    uniformly. Test: additionally a reference (same template, slot swapped to
    a uniformly drawn token of the target label) and the target label, which
    cycles over the other labels.
    """
    rng = Xoshiro256StarStar(spec.seed)
    names = list(spec.lexicons)
    train = []
    for name in names:
        lexicon = spec.lexicons[name]
        for i in range(spec.count_per_label):
            template = spec.templates[i % len(spec.templates)]
            word = lexicon[rng.randbelow(len(lexicon))]
            train.append({"text": " ".join(_fill(template, word)), "label": name})
    test = []
    for li, name in enumerate(names):
        lexicon = spec.lexicons[name]
        for i in range(n_test_per_label):
            template = spec.templates[i % len(spec.templates)]
            word = lexicon[rng.randbelow(len(lexicon))]
            target = names[(li + 1 + (i % (len(names) - 1))) % len(names)]
            tlex = spec.lexicons[target]
            ref_word = tlex[rng.randbelow(len(tlex))]
            test.append(
                {
                    "source": " ".join(_fill(template, word)),
                    "reference": " ".join(_fill(template, ref_word)),
                    "target_label": target,
                    "label": name,
                }
            )
    return train, test


def write_jsonl(lines: Sequence[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for line in lines:
            handle.write(json.dumps(line) + "\n")


def default_spec(seed: int = 0) -> ToyCorpusSpec:
    """The stock desk-scale corpus: 2 labels, 4 templates.

    Template tokens are unique within and across templates (only the slot
    lexicons repeat), so every non-slot bigram continuation is deterministic
    and the attribute words are reachable only through the slot context.
    Sentences are long enough that a small masking budget rarely covers the
    slot, leaving K-sample rejection sampling room to matter.
    """
    return ToyCorpusSpec(
        templates=(
            tuple(
                "the food here was SLOT today and everyone around stayed fairly busy "
                "while music kept getting louder as night wore on slowly for us".split()
            ),
            tuple(
                "overall our service seemed SLOT tonight although queues moved rather "
                "sluggishly since more tables filled up quickly during an evening running quite late".split()
            ),
            tuple(
                "honestly my visit felt SLOT somehow because crowded streets outside grew "
                "noisier when each lobby area buzzed along into that grey dull afternoon".split()
            ),
            tuple(
                "frankly this dinner looked SLOT anyway given its kitchen turned slower "
                "so menus read plainly under dim lights which flickered above every corner".split()
            ),
        ),
        lexicons={
            "positive": ("great", "amazing", "wonderful"),
            "negative": ("awful", "terrible", "dreadful"),
        },
        count_per_label=100,
        seed=seed,
    )
