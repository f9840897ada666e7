"""Infill backends: count-based, neural, and external-process bridge."""

from __future__ import annotations

from typing import Sequence

from ..noising import MaskedVariant
from ..textcore import AttributeLabel, Vocab
from .base import BOS, BackendError, GenMode, GenOptions, TrainingPair
from .bridge import BridgeBackend, BridgeError, bridge_call
from .count import CountModel, generate_count, train_count
from .neural import (
    NeuralHyper,
    NeuralModel,
    forward_backward,
    generate_neural,
    init_neural,
    train_neural,
)

__all__ = [
    "BOS",
    "BackendError",
    "BridgeBackend",
    "BridgeError",
    "CountModel",
    "GenMode",
    "GenOptions",
    "NeuralHyper",
    "NeuralModel",
    "TrainingPair",
    "backend_generate",
    "backend_train",
    "bridge_call",
    "forward_backward",
    "generate_count",
    "generate_neural",
    "init_neural",
    "train_count",
    "train_neural",
]


def backend_train(
    kind: str,
    pairs: Sequence[TrainingPair],
    vocab: Vocab,
    hyper=None,
    seed: int = 0,
):
    if kind == "count":
        return train_count(pairs, vocab)
    if kind == "neural":
        return train_neural(pairs, vocab, hyper or NeuralHyper(), seed)
    raise BackendError(f"unknown backend kind: {kind!r}")


def backend_generate(model, variant: MaskedVariant, control: AttributeLabel, opts: GenOptions):
    if isinstance(model, CountModel):
        return generate_count(model, variant, control, opts)
    if isinstance(model, NeuralModel):
        return generate_neural(model, variant, control, opts)
    if isinstance(model, BridgeBackend):
        return model.generate(variant, control, opts)
    raise BackendError(f"unsupported model type: {type(model).__name__}")
