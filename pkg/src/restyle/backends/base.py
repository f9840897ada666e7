"""Shared backend contract: training pairs, generation options, errors."""

from __future__ import annotations

import enum
from dataclasses import dataclass

from ..noising import MaskedVariant, MaskMode
from ..textcore import AttributeLabel

BOS = "<s>"  # internal chain-start symbol for the count backend


class BackendError(RuntimeError):
    pass


class GenMode(enum.Enum):
    GREEDY = "greedy"
    SAMPLE = "sample"


@dataclass(frozen=True)
class TrainingPair:
    """Controlled-denoising supervision unit: reconstruct ``source`` from the
    masked ``variant`` prefixed by the control for ``control``."""

    control: AttributeLabel
    variant: MaskedVariant
    source: tuple

    def __post_init__(self):
        if self.variant.kind is MaskMode.SOFT and len(self.variant.source) != len(self.source):
            raise BackendError("soft variant length must match source length")


@dataclass(frozen=True)
class GenOptions:
    n: int = 1
    temperature: float = 1.0
    mode: GenMode = GenMode.SAMPLE
    seed: int = 0
    max_len: int = 64

    def __post_init__(self):
        if self.n < 1:
            raise BackendError("n must be >= 1")
        if self.temperature <= 0:
            raise BackendError("temperature must be > 0")
        if self.mode is GenMode.GREEDY and self.n > 1:
            raise BackendError("greedy decoding with n > 1 would repeat one sample")
