"""Span masking: hard (sentinel-collapsing) and soft (blend-weight) variants.

Span selection is shared between the two modes so that, at equal seed, hard
and soft masking cover exactly the same source positions. RNG stream order
per draw: span start (modulo reduction), then span length (geometric).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

from .rng import Xoshiro256StarStar, mix
from .textcore import MASK_TOKEN


class MaskMode(enum.Enum):
    HARD = "hard"
    SOFT = "soft"


class NoisingError(ValueError):
    pass


@dataclass(frozen=True)
class MaskSpec:
    ratio: float
    span_mean: float = 3.0
    mode: MaskMode = MaskMode.HARD
    blend: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.ratio <= 1.0:
            raise NoisingError("ratio must be in [0,1]")
        if self.span_mean < 1.0:
            raise NoisingError("span_mean must be >= 1")
        if not 0.0 <= self.blend <= 1.0:
            raise NoisingError("blend must be in [0,1]")


@dataclass(frozen=True)
class MaskedVariant:
    kind: MaskMode
    source: tuple  # tokens the variant was derived from
    masked_positions: frozenset
    hard_tokens: Optional[tuple] = None  # HARD only: runs collapsed to <mask>
    weights: Optional[tuple] = None  # SOFT only: per-token blend weights


def mask_budget(n: int, ratio: float) -> int:
    """Number of source positions to mask: ceil(ratio*n), floored at 1 when
    ratio > 0, capped at n. The small epsilon guards float round-up noise."""
    if ratio == 0.0:
        return 0
    return min(n, max(1, math.ceil(ratio * n - 1e-9)))


def select_positions(n: int, spec: MaskSpec, seed: int) -> frozenset:
    """Draw spans (uniform start, geometric length) until the budget is met.

    Overlapping spans merge; the final span is truncated position-by-position
    so the budget is hit exactly.
    """
    if n == 0 and spec.ratio > 0.0:
        raise NoisingError("nothing to mask")
    budget = mask_budget(n, spec.ratio)
    if budget == 0:
        return frozenset()
    rng = Xoshiro256StarStar(seed)
    masked = set()
    while len(masked) < budget:
        start = rng.randbelow(n)
        length = rng.geometric(spec.span_mean)
        for pos in range(start, min(n, start + length)):
            if len(masked) >= budget:
                break
            masked.add(pos)
    return frozenset(masked)


def _collapse(seq: tuple, masked: frozenset) -> tuple:
    out = []
    in_run = False
    for i, tok in enumerate(seq):
        if i in masked:
            if not in_run:
                out.append(MASK_TOKEN)
                in_run = True
        else:
            out.append(tok)
            in_run = False
    return tuple(out)


def hard_mask(seq: tuple, spec: MaskSpec, seed: int) -> MaskedVariant:
    """Mask spans and collapse each maximal masked run to one sentinel."""
    if spec.mode is not MaskMode.HARD:
        raise NoisingError("hard_mask requires spec.mode == HARD")
    masked = select_positions(len(seq), spec, seed)
    return MaskedVariant(
        kind=MaskMode.HARD,
        source=tuple(seq),
        masked_positions=masked,
        hard_tokens=_collapse(tuple(seq), masked),
    )


def soft_mask(seq: tuple, spec: MaskSpec, seed: int) -> MaskedVariant:
    """Length-preserving masking: weight spec.blend at masked positions."""
    if spec.mode is not MaskMode.SOFT:
        raise NoisingError("soft_mask requires spec.mode == SOFT")
    masked = select_positions(len(seq), spec, seed)
    weights = tuple(spec.blend if i in masked else 0.0 for i in range(len(seq)))
    return MaskedVariant(
        kind=MaskMode.SOFT,
        source=tuple(seq),
        masked_positions=masked,
        weights=weights,
    )


def mask_one(seq: tuple, spec: MaskSpec, seed: int) -> MaskedVariant:
    if spec.mode is MaskMode.HARD:
        return hard_mask(seq, spec, seed)
    return soft_mask(seq, spec, seed)


def make_variants(seq: tuple, spec: MaskSpec, k: int, base_seed: int) -> list:
    """K independent masked variants; variant i uses seed mix(base_seed, i)."""
    if k < 1:
        raise NoisingError("K must be >= 1")
    return [mask_one(seq, spec, mix(base_seed, i)) for i in range(k)]


def unmasked_variant(seq: tuple) -> MaskedVariant:
    """A variant that supervises (and can rewrite) every position while
    leaving the input tokens fully visible (all blend weights zero).

    Used for student training and student inference, where the model sees the
    raw sentence plus a control token and no sentinel ever appears.
    """
    seq = tuple(seq)
    return MaskedVariant(
        kind=MaskMode.SOFT,
        source=seq,
        masked_positions=frozenset(range(len(seq))),
        weights=tuple(0.0 for _ in seq),
    )
