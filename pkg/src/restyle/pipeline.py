"""The transfer protocol: controlled-denoising data building, K-sample
classifier-guided transfer, and student distillation.

Inference builds K masked variants of the input, generates one candidate per
variant with the control token switched to the target attribute, scores each
candidate with (classifier target probability, similarity to the source),
and selects via the policy: among candidates passing the probability
threshold (and similarity floor, when set), take the most similar one.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .backends import GenMode, GenOptions, TrainingPair, backend_generate
from .classifier import ClassifierModel, predict_label, predict_proba
from .embedder import EmbeddingIndex, similarity
from .noising import MaskSpec, make_variants, unmasked_variant
from .rng import mix
from .textcore import AttributeLabel, DataError, LabeledExample, detokenize

GEN_SEED_SALT = 0x67656E  # keeps generation seeds disjoint from variant seeds


class Fallback(enum.Enum):
    BEST_PROB = "best_prob"
    COPY_SOURCE = "copy_source"


@dataclass(frozen=True)
class SelectionPolicy:
    threshold: float = 0.5
    fallback: Fallback = Fallback.BEST_PROB
    similarity_floor: Optional[float] = None

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise DataError("threshold must be in [0,1]")
        if self.similarity_floor is not None and not 0.0 <= self.similarity_floor <= 1.0:
            raise DataError("similarity_floor must be in [0,1]")


@dataclass(frozen=True)
class TransferRequest:
    source: tuple
    target_label: AttributeLabel
    k: int
    mask: MaskSpec
    gen: GenOptions
    policy: SelectionPolicy = SelectionPolicy()
    source_label: Optional[AttributeLabel] = None

    def __post_init__(self):
        if self.k < 1:
            raise DataError("K must be >= 1")


@dataclass
class TransferResult:
    output: tuple
    chosen_index: Optional[int]  # None when fallback COPY_SOURCE fired
    candidates: list  # (tokens, target_prob, similarity)
    passed_filter: list  # bool per candidate

    @property
    def used_fallback_copy(self) -> bool:
        return self.chosen_index is None


def select_candidate(scored: Sequence[tuple], policy: SelectionPolicy) -> Optional[int]:
    """Index of the selected candidate from (target_prob, similarity) pairs.

    Most similar among those passing the threshold (ties -> lowest index);
    if none pass, BEST_PROB falls back to the most probable candidate and
    COPY_SOURCE returns None.
    """
    if not scored:
        raise DataError("empty candidate list")
    best = None
    for i, (prob, sim) in enumerate(scored):
        if prob < policy.threshold:
            continue
        if policy.similarity_floor is not None and sim < policy.similarity_floor:
            continue
        if best is None or sim > scored[best][1]:
            best = i
    if best is not None:
        return best
    if policy.fallback is Fallback.COPY_SOURCE:
        return None
    best = 0
    for i in range(1, len(scored)):
        if scored[i][0] > scored[best][0]:
            best = i
    return best


def build_denoising_data(
    corpus: Sequence[LabeledExample],
    clf: ClassifierModel,
    spec: MaskSpec,
    variants_per_example: int,
    seed: int,
    use_gold_labels: bool = False,
    control_override: Optional[AttributeLabel] = None,
) -> list:
    """V masked variants per example, each paired with its control label.

    Controls come from the classifier's prediction by default (gold labels
    with use_gold_labels). control_override forces one constant control for
    every pair (the no-control ablation).
    """
    pairs = []
    for ex_index, example in enumerate(corpus):
        if control_override is not None:
            control = control_override
        elif use_gold_labels:
            if example.label is None:
                raise DataError("gold-label control requested but example has no label")
            control = example.label
        else:
            control = predict_label(clf, example.seq)
        variants = make_variants(example.seq, spec, variants_per_example, mix(seed, ex_index))
        for variant in variants:
            pairs.append(TrainingPair(control=control, variant=variant, source=example.seq))
    return pairs


def _score_candidates(
    candidates: Sequence[tuple],
    source: tuple,
    target: AttributeLabel,
    clf: ClassifierModel,
    index: EmbeddingIndex,
) -> list:
    scored = []
    for cand in candidates:
        prob = predict_proba(clf, cand)[target.index]
        sim = similarity(index, source, cand)
        scored.append((cand, prob, sim))
    return scored


def _finish(scored, req: TransferRequest) -> TransferResult:
    passed = [
        prob >= req.policy.threshold
        and (req.policy.similarity_floor is None or sim >= req.policy.similarity_floor)
        for _, prob, sim in scored
    ]
    chosen = select_candidate([(p, s) for _, p, s in scored], req.policy)
    output = tuple(req.source) if chosen is None else scored[chosen][0]
    return TransferResult(
        output=output, chosen_index=chosen, candidates=scored, passed_filter=passed
    )


def transfer(
    model,
    clf: ClassifierModel,
    index: EmbeddingIndex,
    req: TransferRequest,
    control_override: Optional[AttributeLabel] = None,
) -> TransferResult:
    """K-variant masked transfer with classifier-guided selection.

    Variant i uses seed mix(req.gen.seed, i); its generation call uses seed
    mix(req.gen.seed ^ GEN_SEED_SALT, i). One sample per variant, so K counts
    masked variants.
    """
    variants = make_variants(req.source, req.mask, req.k, req.gen.seed)
    control = control_override if control_override is not None else req.target_label
    candidates = []
    for i, variant in enumerate(variants):
        opts = GenOptions(
            n=1,
            temperature=req.gen.temperature,
            mode=req.gen.mode,
            seed=mix(req.gen.seed ^ GEN_SEED_SALT, i),
            max_len=req.gen.max_len,
        )
        candidates.extend(backend_generate(model, variant, control, opts))
    scored = _score_candidates(candidates, req.source, req.target_label, clf, index)
    return _finish(scored, req)


def student_transfer(
    model,
    clf: ClassifierModel,
    index: EmbeddingIndex,
    req: TransferRequest,
) -> TransferResult:
    """Student inference: no masking. The unmasked source plus the target
    control is decoded req.k times (greedy when K == 1), then filtered with
    the same selection policy."""
    variant = unmasked_variant(req.source)
    if req.k == 1 and req.gen.mode is GenMode.GREEDY:
        opts = GenOptions(n=1, mode=GenMode.GREEDY, seed=req.gen.seed, max_len=req.gen.max_len)
    else:
        opts = GenOptions(
            n=req.k,
            temperature=req.gen.temperature,
            mode=GenMode.SAMPLE,
            seed=req.gen.seed,
            max_len=req.gen.max_len,
        )
    candidates = backend_generate(model, variant, req.target_label, opts)
    scored = _score_candidates(candidates, req.source, req.target_label, clf, index)
    return _finish(scored, req)


@dataclass(frozen=True)
class StudentPair:
    source: tuple
    control: AttributeLabel
    output: tuple
    target_prob: float
    similarity: float


def build_student_data(
    model,
    clf: ClassifierModel,
    index: EmbeddingIndex,
    corpus: Sequence[LabeledExample],
    mask: MaskSpec,
    gen: GenOptions,
    policy: SelectionPolicy = SelectionPolicy(),
    k: int = 32,
    seed: int = 0,
    keep_fallback_copies: bool = False,
) -> list:
    """Teacher outputs for every example and every non-source label.

    The source label is the classifier's prediction (the same rule used for
    control assignment). Pairs where the COPY_SOURCE fallback fired are
    dropped unless keep_fallback_copies.
    """
    out = []
    for ex_index, example in enumerate(corpus):
        own = predict_label(clf, example.seq)
        for label in clf.labels:
            if label == own:
                continue
            req = TransferRequest(
                source=example.seq,
                target_label=label,
                k=k,
                mask=mask,
                gen=GenOptions(
                    n=1,
                    temperature=gen.temperature,
                    mode=gen.mode,
                    seed=mix(seed, ex_index * len(clf.labels) + label.index),
                    max_len=gen.max_len,
                ),
                policy=policy,
                source_label=own,
            )
            result = transfer(model, clf, index, req)
            if result.used_fallback_copy and not keep_fallback_copies:
                continue
            if result.chosen_index is None:
                prob = predict_proba(clf, result.output)[label.index]
                sim = similarity(index, example.seq, result.output)
            else:
                _, prob, sim = result.candidates[result.chosen_index]
            out.append(
                StudentPair(
                    source=example.seq,
                    control=label,
                    output=result.output,
                    target_prob=prob,
                    similarity=sim,
                )
            )
    return out


def student_pairs_to_training(pairs: Sequence[StudentPair]) -> list:
    """Convert teacher outputs into length-preserving training pairs.

    Inputs stay unmasked (all blend weights zero, every position supervised);
    pairs whose output length differs from the input are skipped since the
    neural student predicts position-by-position.
    """
    out = []
    for pair in pairs:
        if len(pair.source) != len(pair.output):
            continue
        out.append(
            TrainingPair(
                control=pair.control,
                variant=unmasked_variant(pair.source),
                source=pair.output,
            )
        )
    return out


def write_student_jsonl(pairs: Sequence[StudentPair], path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for pair in pairs:
            handle.write(
                json.dumps(
                    {
                        "source": detokenize(pair.source),
                        "control": pair.control.name,
                        "output": detokenize(pair.output),
                        "target_prob": pair.target_prob,
                        "similarity": pair.similarity,
                    }
                )
                + "\n"
            )


def read_student_jsonl(path, labels: Sequence[AttributeLabel]) -> list:
    from .textcore import tokenize

    by_name = {lab.name: lab for lab in labels}
    pairs = []
    with open(path, "r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            obj = json.loads(line)
            pairs.append(
                StudentPair(
                    source=tokenize(obj["source"]),
                    control=by_name[obj["control"]],
                    output=tokenize(obj["output"]),
                    target_prob=float(obj["target_prob"]),
                    similarity=float(obj["similarity"]),
                )
            )
    return pairs
