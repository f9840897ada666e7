"""Component persistence: JSON documents with a format tag, written
atomically so a failed save never leaves a partial component behind."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

from .backends import CountModel, NeuralModel
from .classifier import ClassifierModel
from .embedder import EmbeddingIndex
from .metrics import NgramLM
from .textcore import DataError

_LOADERS = {
    "restyle/classifier/v1": ClassifierModel.from_json,
    "restyle/embedder/v1": EmbeddingIndex.from_json,
    "restyle/count/v1": CountModel.from_json,
    "restyle/neural/v1": NeuralModel.from_json,
    "restyle/lm/v1": NgramLM.from_json,
}


def save_model(component, path) -> None:
    doc = component.to_json()
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            json.dump(doc, handle)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_model(path):
    try:
        with open(path, "r", encoding="utf-8") as handle:
            doc = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise DataError(
            f"unreadable model file {path} (expected one of: {', '.join(sorted(_LOADERS))}): {exc}"
        ) from exc
    fmt = doc.get("format") if isinstance(doc, dict) else None
    loader = _LOADERS.get(fmt)
    if loader is None:
        raise DataError(
            f"unsupported model format {fmt!r} in {path}; expected one of: "
            + ", ".join(sorted(_LOADERS))
        )
    return loader(doc)
