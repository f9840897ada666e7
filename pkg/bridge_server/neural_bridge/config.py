"""Server configuration: which model backs each protocol role."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

ROLES = ("generator", "classifier", "embedder")

# the built-in no-download model identifier; anything else is treated as a
# hosted (transformers-style) model name
TOY_MODEL = "toy"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class BridgeServerConfig:
    """Model identifiers per role (None disables the role), device selection,
    and decoding defaults. At least one role must be configured."""

    generator: str | None = TOY_MODEL
    classifier: str | None = TOY_MODEL
    embedder: str | None = TOY_MODEL
    device: str = "cpu"
    temperature: float = 1.0
    max_len: int = 64
    labels: tuple = ("positive", "negative")

    def __post_init__(self):
        if not any((self.generator, self.classifier, self.embedder)):
            raise ConfigError("at least one role must be configured")
        if self.temperature <= 0:
            raise ConfigError("temperature must be positive")
        if self.max_len < 1:
            raise ConfigError("max_len must be >= 1")
        if len(self.labels) < 2:
            raise ConfigError("need at least two labels")

    @property
    def roles(self) -> tuple:
        return tuple(
            role for role in ROLES if getattr(self, role) is not None
        )

    @classmethod
    def from_json(cls, doc: dict) -> "BridgeServerConfig":
        known = {
            "generator", "classifier", "embedder",
            "device", "temperature", "max_len", "labels",
        }
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(doc)
        if "labels" in kwargs:
            kwargs["labels"] = tuple(kwargs["labels"])
        return cls(**kwargs)

    @classmethod
    def from_file(cls, path) -> "BridgeServerConfig":
        with open(path, "r", encoding="utf-8") as handle:
            return cls.from_json(json.load(handle))
