"""Experiment runner: cell determinism, worker invariance, output shape."""

import csv
import json

import pytest

from restyle.experiment import ExperimentConfig, run_cell, run_experiment
from restyle.noising import MaskMode, MaskSpec
from restyle.textcore import DataError
from restyle.toydata import default_spec, gen_toy_corpus, write_jsonl

import dataclasses


@pytest.fixture(scope="module")
def small_paths(tmp_path_factory):
    root = tmp_path_factory.mktemp("exp")
    spec = dataclasses.replace(default_spec(seed=0), count_per_label=20)
    train, test = gen_toy_corpus(spec, n_test_per_label=5)
    write_jsonl(train, root / "train.jsonl")
    write_jsonl(test, root / "test.jsonl")
    return root


def _config(small_paths, outdir, **overrides):
    base = dict(
        train_path=str(small_paths / "train.jsonl"),
        test_path=str(small_paths / "test.jsonl"),
        labels=("positive", "negative"),
        outdir=str(outdir),
        mask=MaskSpec(ratio=0.2, span_mean=1.0),
        k_list=(1, 4),
        seeds=(0, 1),
        conditions=("hard",),
    )
    base.update(overrides)
    return ExperimentConfig(**base)


def test_run_cell_rows_and_determinism(small_paths, tmp_path):
    config = _config(small_paths, tmp_path)
    rows = run_cell(config, "hard", 0)
    assert [r[:3] for r in rows] == [("hard", 1, 0), ("hard", 4, 0)]
    for row in rows:
        for metric in row[3:7]:
            assert 0.0 <= metric <= 100.0
    assert rows == run_cell(config, "hard", 0)
    assert rows != run_cell(config, "hard", 1)


def test_run_experiment_outputs(small_paths, tmp_path):
    config = _config(small_paths, tmp_path / "out")
    results = run_experiment(config)
    text = results.read_text()
    lines = text.splitlines()
    assert lines[0] == "condition,K,seed,accuracy,semantic,g,s_bleu,fluency"
    assert len(lines) == 1 + len(config.conditions) * len(config.seeds) * len(config.k_list)
    with open(results.parent / "summary.csv", newline="") as handle:
        summary = list(csv.DictReader(handle))
    assert len(summary) == len(config.conditions) * len(config.k_list)
    # summary means match the per-seed rows
    with open(results, newline="") as handle:
        detail = list(csv.DictReader(handle))
    for srow in summary:
        seeds = [
            float(d["g"])
            for d in detail
            if d["condition"] == srow["condition"] and d["K"] == srow["K"]
        ]
        assert abs(float(srow["g"]) - sum(seeds) / len(seeds)) < 1e-5


def test_rerun_is_byte_identical(small_paths, tmp_path):
    config_a = _config(small_paths, tmp_path / "a")
    config_b = _config(small_paths, tmp_path / "b")
    path_a = run_experiment(config_a)
    path_b = run_experiment(config_b)
    assert path_a.read_bytes() == path_b.read_bytes()


def test_worker_count_does_not_change_results(small_paths, tmp_path):
    serial = _config(small_paths, tmp_path / "w1", workers=1)
    parallel = _config(small_paths, tmp_path / "w2", workers=2)
    path_1 = run_experiment(serial)
    path_2 = run_experiment(parallel)
    assert path_1.read_bytes() == path_2.read_bytes()


def test_config_validation(small_paths, tmp_path):
    with pytest.raises(DataError, match="K list"):
        _config(small_paths, tmp_path, k_list=())
    with pytest.raises(DataError, match="seeds"):
        _config(small_paths, tmp_path, seeds=())
    with pytest.raises(DataError, match="unknown condition"):
        _config(small_paths, tmp_path, conditions=("mystery",))


def test_count_backend_rejects_soft_condition(small_paths, tmp_path):
    config = _config(small_paths, tmp_path, conditions=("soft",), backend_kind="count")
    with pytest.raises(DataError, match="hard masking only"):
        run_cell(config, "soft", 0)


def test_from_json(small_paths, tmp_path):
    doc = {
        "train": str(small_paths / "train.jsonl"),
        "test": str(small_paths / "test.jsonl"),
        "labels": ["positive", "negative"],
        "outdir": str(tmp_path / "out"),
        "mask": {"ratio": 0.2, "span_mean": 1.0, "mode": "hard"},
        "backend": {"kind": "neural", "dim": 16, "lr": 2.0, "epochs": 3},
        "policy": {"threshold": 0.6},
        "gen": {"temperature": 0.8, "mode": "sample"},
        "k_list": [1, 4],
        "seeds": [0],
        "conditions": ["hard", "soft"],
        "workers": 2,
    }
    config = ExperimentConfig.from_json(doc)
    assert config.backend_kind == "neural"
    assert config.hyper.dim == 16 and config.hyper.lr == 2.0
    assert config.mask.ratio == 0.2 and config.mask.mode is MaskMode.HARD
    assert config.policy.threshold == 0.6
    assert config.temperature == 0.8
    assert config.k_list == (1, 4) and config.seeds == (0,)
    assert config.conditions == ("hard", "soft")
    assert config.workers == 2
    json.dumps(doc)  # the accepted shape is plain JSON
