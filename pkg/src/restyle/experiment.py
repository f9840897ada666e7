"""Seeded experiment runner: trains components, sweeps (condition, K, seed)
cells over a test set, and writes deterministic CSV reports.

Cells are independent (each trains its own components from its seed), so the
runner can fan out across processes; the merged CSV is sorted by cell key
and therefore byte-identical for any worker count.
"""

from __future__ import annotations

import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

from .backends import GenMode, GenOptions, NeuralHyper, backend_train, train_neural
from .classifier import train_classifier
from .embedder import fit_embedder
from .metrics import EvalRecord, GMode, SemanticMode, evaluate, read_test_set, train_lm
from .noising import MaskMode, MaskSpec
from .pipeline import (
    Fallback,
    SelectionPolicy,
    TransferRequest,
    build_denoising_data,
    build_student_data,
    student_pairs_to_training,
    student_transfer,
    transfer,
)
from .rng import mix
from .textcore import AttributeLabel, DataError, build_vocab, make_label_set, read_jsonl_corpus

CONDITIONS = ("hard", "soft", "no_control", "teacher", "student_k1", "student_k2", "student_k4")
NO_CONTROL_LABEL = "none"  # constant dummy control for the ablation


@dataclass(frozen=True)
class ExperimentConfig:
    train_path: str
    test_path: str
    labels: tuple
    outdir: str
    mask: MaskSpec = MaskSpec(ratio=0.4)
    backend_kind: str = "count"
    hyper: NeuralHyper = NeuralHyper()
    variants_per_example: int = 4
    k_list: tuple = (1, 8, 32)
    seeds: tuple = (0, 1, 2, 3, 4)
    policy: SelectionPolicy = SelectionPolicy()
    temperature: float = 1.0
    gen_mode: GenMode = GenMode.SAMPLE
    max_len: int = 64
    g_mode: GMode = GMode.CORPUS
    semantic_mode: SemanticMode = SemanticMode.VS_REFERENCE
    conditions: tuple = ("hard",)
    student_teacher_k: int = 32
    workers: int = 1

    def __post_init__(self):
        if not self.k_list:
            raise DataError("K list must be non-empty")
        if not self.seeds:
            raise DataError("seeds must be non-empty")
        for cond in self.conditions:
            if cond not in CONDITIONS:
                raise DataError(f"unknown condition: {cond!r}")

    @classmethod
    def from_json(cls, doc: dict) -> "ExperimentConfig":
        mask_doc = doc.get("mask", {})
        mask = MaskSpec(
            ratio=float(mask_doc.get("ratio", 0.4)),
            span_mean=float(mask_doc.get("span_mean", 3.0)),
            mode=MaskMode(mask_doc.get("mode", "hard")),
            blend=float(mask_doc.get("blend", 0.5)),
        )
        backend = doc.get("backend", {})
        hyper = NeuralHyper(
            dim=int(backend.get("dim", 32)),
            window=int(backend.get("window", 3)),
            lr=float(backend.get("lr", 0.1)),
            epochs=int(backend.get("epochs", 5)),
        )
        pol = doc.get("policy", {})
        policy = SelectionPolicy(
            threshold=float(pol.get("threshold", 0.5)),
            fallback=Fallback(pol.get("fallback", "best_prob")),
            similarity_floor=pol.get("similarity_floor"),
        )
        gen = doc.get("gen", {})
        return cls(
            train_path=doc["train"],
            test_path=doc["test"],
            labels=tuple(doc["labels"]),
            outdir=doc["outdir"],
            mask=mask,
            backend_kind=backend.get("kind", "count"),
            hyper=hyper,
            variants_per_example=int(doc.get("variants_per_example", 4)),
            k_list=tuple(doc.get("k_list", [1, 8, 32])),
            seeds=tuple(doc.get("seeds", [0, 1, 2, 3, 4])),
            policy=policy,
            temperature=float(gen.get("temperature", 1.0)),
            gen_mode=GenMode(gen.get("mode", "sample")),
            max_len=int(gen.get("max_len", 64)),
            g_mode=GMode(doc.get("g_mode", "corpus")),
            semantic_mode=SemanticMode(doc.get("semantic_mode", "vs_reference")),
            conditions=tuple(doc.get("conditions", ["hard"])),
            student_teacher_k=int(doc.get("student_teacher_k", 32)),
            workers=int(doc.get("workers", 1)),
        )


def _components(config: ExperimentConfig, extra_label: str | None = None):
    labels = make_label_set(config.labels)
    train = read_jsonl_corpus(config.train_path, labels)
    vocab_labels = labels
    if extra_label is not None:
        vocab_labels = labels + (AttributeLabel(extra_label, len(labels)),)
    vocab = build_vocab(train, vocab_labels)
    clf = train_classifier(train, labels)
    index = fit_embedder(train)
    lm = train_lm(train)
    test = read_test_set(config.test_path, labels)
    return labels, train, vocab, clf, index, lm, test


def _mask_for(config: ExperimentConfig, condition: str) -> MaskSpec:
    if condition == "hard":
        return replace(config.mask, mode=MaskMode.HARD)
    if condition == "soft":
        return replace(config.mask, mode=MaskMode.SOFT)
    return config.mask


def _eval_rows(config, condition, seed, clf, index, lm, test, run_one):
    rows = []
    k_values = (
        [int(condition.rsplit("k", 1)[1])] if condition.startswith("student_k") else config.k_list
    )
    for k in k_values:
        records = []
        for item_index, (source, reference, target) in enumerate(test):
            output = run_one(k, item_index, source, target)
            records.append(
                EvalRecord(source=source, output=output, reference=reference, target_label=target)
            )
        report = evaluate(records, clf, index, lm, config.g_mode, config.semantic_mode)
        rows.append(
            (
                condition,
                k,
                seed,
                report.accuracy,
                report.semantic,
                report.g,
                report.s_bleu,
                report.fluency,
            )
        )
    return rows


def run_cell(config: ExperimentConfig, condition: str, seed: int) -> list:
    """All result rows for one (condition, seed) pair."""
    extra = NO_CONTROL_LABEL if condition == "no_control" else None
    labels, train, vocab, clf, index, lm, test = _components(config, extra)
    mask = _mask_for(config, condition)
    if config.backend_kind == "count" and mask.mode is MaskMode.SOFT:
        raise DataError("count backend supports hard masking only")

    dummy = AttributeLabel(NO_CONTROL_LABEL, len(labels)) if extra else None
    pairs = build_denoising_data(
        train, clf, mask, config.variants_per_example, seed, control_override=dummy
    )
    model = backend_train(config.backend_kind, pairs, vocab, config.hyper, seed)

    def gen_opts(item_seed: int) -> GenOptions:
        return GenOptions(
            n=1,
            temperature=config.temperature,
            mode=config.gen_mode,
            seed=item_seed,
            max_len=config.max_len,
        )

    if condition.startswith("student_k"):
        teacher_gen = gen_opts(0)
        student_raw = build_student_data(
            model,
            clf,
            index,
            train,
            mask,
            teacher_gen,
            policy=config.policy,
            k=config.student_teacher_k,
            seed=mix(seed, 0x5454),
        )
        student_pairs = student_pairs_to_training(student_raw)
        if not student_pairs:
            raise DataError("student distillation produced no usable pairs")
        student = train_neural(student_pairs, vocab, config.hyper, mix(seed, 0x53))

        def run_one(k, item_index, source, target):
            req = TransferRequest(
                source=source,
                target_label=target,
                k=k,
                mask=mask,
                gen=GenOptions(
                    n=1,
                    temperature=config.temperature,
                    mode=GenMode.GREEDY if k == 1 else GenMode.SAMPLE,
                    seed=mix(mix(seed, k), item_index),
                    max_len=config.max_len,
                ),
                policy=config.policy,
            )
            return student_transfer(student, clf, index, req).output

    else:

        def run_one(k, item_index, source, target):
            req = TransferRequest(
                source=source,
                target_label=target,
                k=k,
                mask=mask,
                gen=gen_opts(mix(mix(seed, k), item_index)),
                policy=config.policy,
            )
            return transfer(model, clf, index, req, control_override=dummy).output

    return _eval_rows(config, condition, seed, clf, index, lm, test, run_one)


HEADER = "condition,K,seed,accuracy,semantic,g,s_bleu,fluency"


def _format_row(row) -> str:
    condition, k, seed, *metrics = row
    return ",".join([condition, str(k), str(seed)] + [f"{m:.6f}" for m in metrics])


def run_experiment(config: ExperimentConfig) -> Path:
    """Run every (condition, seed) cell, write results.csv and summary.csv."""
    outdir = Path(config.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    cells = [(condition, seed) for condition in config.conditions for seed in config.seeds]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            cell_rows = list(pool.map(run_cell, [config] * len(cells), *zip(*cells)))
    else:
        cell_rows = [run_cell(config, condition, seed) for condition, seed in cells]
    rows = sorted(
        (row for rows in cell_rows for row in rows),
        key=lambda r: (r[0], r[1], r[2]),
    )
    results_path = outdir / "results.csv"
    with open(results_path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(HEADER + "\n")
        for row in rows:
            handle.write(_format_row(row) + "\n")

    groups = {}
    for row in rows:
        groups.setdefault((row[0], row[1]), []).append(row[3:])
    with open(outdir / "summary.csv", "w", encoding="utf-8", newline="\n") as handle:
        handle.write("condition,K,accuracy,semantic,g,s_bleu,fluency\n")
        for (condition, k), metric_rows in sorted(groups.items()):
            means = [sum(col) / len(col) for col in zip(*metric_rows)]
            handle.write(
                ",".join([condition, str(k)] + [f"{m:.6f}" for m in means]) + "\n"
            )
    return results_path
