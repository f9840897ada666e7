"""Neural backend: length-preserving masked-token prediction.

A small embedding/projection model: each masked position is predicted
independently from the mean of blended token embeddings in a window around
it plus the control embedding. Soft masking is literal here: the input
representation of token j is (1-w_j)*E[token_j] + w_j*E[mask]. Trained with
plain SGD (lr decaying as 1/sqrt(step)).

Hot loops live in restyle.kernels (compiled core with numpy fallback).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .. import kernels
from ..noising import MaskedVariant, MaskMode
from ..rng import Xoshiro256StarStar
from ..textcore import AttributeLabel, DataError, Vocab
from .base import BackendError, GenMode, GenOptions, TrainingPair


@dataclass(frozen=True)
class NeuralHyper:
    dim: int = 32
    window: int = 3
    lr: float = 0.1
    epochs: int = 5
    init_scale: float = 0.05


@dataclass
class NeuralModel:
    vocab: Vocab
    hyper: NeuralHyper
    E: np.ndarray  # (V, dim) token embeddings (incl. sentinels and controls)
    W: np.ndarray  # (V, dim) output projection

    _banned: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        # built-in backends never emit sentinels, controls, or UNK
        self._banned = np.fromiter(sorted(self.vocab.reserved_ids), dtype=np.int64)

    def to_json(self) -> dict:
        return {
            "format": "restyle/neural/v1",
            "vocab": self.vocab.to_json(),
            "dim": self.hyper.dim,
            "window": self.hyper.window,
            "lr": self.hyper.lr,
            "epochs": self.hyper.epochs,
            "init_scale": self.hyper.init_scale,
            "E": self.E.tolist(),
            "W": self.W.tolist(),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "NeuralModel":
        if doc.get("format") != "restyle/neural/v1":
            raise DataError("expected format restyle/neural/v1")
        hyper = NeuralHyper(
            dim=int(doc["dim"]),
            window=int(doc["window"]),
            lr=float(doc["lr"]),
            epochs=int(doc["epochs"]),
            init_scale=float(doc["init_scale"]),
        )
        return cls(
            vocab=Vocab.from_json(doc["vocab"]),
            hyper=hyper,
            E=np.asarray(doc["E"], dtype=np.float64),
            W=np.asarray(doc["W"], dtype=np.float64),
        )


def init_neural(vocab: Vocab, hyper: NeuralHyper, seed: int) -> NeuralModel:
    """uniform(-init_scale, init_scale) parameters, filled row-major E then W
    from a single seeded stream."""
    rng = Xoshiro256StarStar(seed)
    v, d = len(vocab), hyper.dim
    scale = hyper.init_scale

    def fill(rows, cols):
        arr = np.empty((rows, cols))
        for i in range(rows):
            for j in range(cols):
                arr[i, j] = (rng.random() * 2.0 - 1.0) * scale
        return arr

    return NeuralModel(vocab=vocab, hyper=hyper, E=fill(v, d), W=fill(v, d))


def _pair_arrays(pair: TrainingPair, vocab: Vocab):
    variant = pair.variant
    ids = np.fromiter((vocab.id(t) for t in variant.source), dtype=np.int64)
    n = len(variant.source)
    masked = np.fromiter(sorted(variant.masked_positions), dtype=np.int64)
    if variant.kind is MaskMode.HARD:
        weights = np.zeros(n)
        weights[masked] = 1.0
    else:
        weights = np.asarray(variant.weights, dtype=np.float64)
    targets = np.fromiter((vocab.id(pair.source[int(i)]) for i in masked), dtype=np.int64)
    ctrl = vocab.control_id(pair.control)
    return ids, weights, masked, targets, ctrl


def forward_backward(model: NeuralModel, pair: TrainingPair):
    """(loss, {"E": dE, "W": dW}) for one pair; analytic gradients."""
    ids, weights, masked, targets, ctrl = _pair_arrays(pair, model.vocab)
    if masked.size == 0:
        raise BackendError("no supervised positions")
    dE = np.zeros_like(model.E)
    dW = np.zeros_like(model.W)
    loss = kernels.forward_backward(
        model.E, model.W, ids, weights, masked, targets,
        ctrl, model.vocab.mask_id, model.hyper.window, dE, dW,
    )
    return loss, {"E": dE, "W": dW}


def train_neural(
    pairs: Sequence[TrainingPair],
    vocab: Vocab,
    hyper: NeuralHyper = NeuralHyper(),
    seed: int = 0,
) -> NeuralModel:
    """SGD over pairs in the given order for hyper.epochs passes."""
    if not pairs:
        raise BackendError("empty pairs")
    model = init_neural(vocab, hyper, seed)
    prepared = []
    for pair in pairs:
        arrays = _pair_arrays(pair, vocab)
        if arrays[2].size == 0:
            continue  # nothing to supervise
        prepared.append(arrays)
    dE = np.zeros_like(model.E)
    dW = np.zeros_like(model.W)
    step = 0
    for _ in range(hyper.epochs):
        for ids, weights, masked, targets, ctrl in prepared:
            step += 1
            lr = hyper.lr / np.sqrt(step)
            dE.fill(0.0)
            dW.fill(0.0)
            kernels.forward_backward(
                model.E, model.W, ids, weights, masked, targets,
                ctrl, vocab.mask_id, hyper.window, dE, dW,
            )
            model.E -= lr * dE
            model.W -= lr * dW
    return model


def masked_position_logits(
    model: NeuralModel, variant: MaskedVariant, control: AttributeLabel
) -> tuple:
    """(sorted masked positions, (m, V) logits) for a variant."""
    vocab = model.vocab
    ids = np.fromiter((vocab.id(t) for t in variant.source), dtype=np.int64)
    masked = np.fromiter(sorted(variant.masked_positions), dtype=np.int64)
    n = len(variant.source)
    if variant.kind is MaskMode.HARD:
        weights = np.zeros(n)
        weights[masked] = 1.0
    else:
        weights = np.asarray(variant.weights, dtype=np.float64)
    logits = kernels.masked_logits(
        model.E, model.W, ids, weights, masked,
        vocab.control_id(control), vocab.mask_id, model.hyper.window,
    )
    return masked, np.asarray(logits)


def generate_neural(
    model: NeuralModel,
    variant: MaskedVariant,
    control: AttributeLabel,
    opts: GenOptions,
) -> list:
    """n length-preserving fills; masked positions sampled independently."""
    source = variant.source
    if not variant.masked_positions:
        return [tuple(source)] * opts.n
    masked, logits = masked_position_logits(model, variant, control)
    logits[:, model._banned] = -np.inf

    if opts.mode is GenMode.GREEDY:
        choice = np.argmax(logits, axis=1)  # first max = lowest token id
        out = list(source)
        for k, i in enumerate(masked):
            out[int(i)] = model.vocab.lookup(int(choice[k]))
        return [tuple(out)]

    scaled = logits / opts.temperature
    scaled -= scaled.max(axis=1, keepdims=True)
    probs = np.exp(scaled)
    probs /= probs.sum(axis=1, keepdims=True)
    cum = np.cumsum(probs, axis=1)
    rng = Xoshiro256StarStar(opts.seed)
    outputs = []
    for _ in range(opts.n):
        out = list(source)
        for k, i in enumerate(masked):
            u = rng.random()
            tok_id = int(np.searchsorted(cum[k], u, side="right"))
            tok_id = min(tok_id, len(model.vocab) - 1)
            out[int(i)] = model.vocab.lookup(tok_id)
        outputs.append(tuple(out))
    return outputs
