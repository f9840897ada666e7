"""Deterministic 64-bit RNG primitives.

All randomness in the package flows through these functions so that results
are reproducible bit-for-bit across runs, machines, and implementations.
Stream usage inside the noising module is documented there (span start draw,
then span length draw, repeated).
"""

import math

_MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One step of the splitmix64 output function applied to state ``x``."""
    z = (x + GOLDEN_GAMMA) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix(base: int, i: int) -> int:
    """Derive the i-th child seed from a base seed, order-independently."""
    return splitmix64((base ^ ((i * GOLDEN_GAMMA) & _MASK64)) & _MASK64)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & _MASK64


class Xoshiro256StarStar:
    """xoshiro256** generator, state seeded from a splitmix64 stream."""

    def __init__(self, seed: int):
        state = seed & _MASK64
        s = []
        for _ in range(4):
            s.append(splitmix64(state))
            state = (state + GOLDEN_GAMMA) & _MASK64
        self._s = s

    def next_uint64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s[1] << 17) & _MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_uint64() >> 11) * (2.0**-53)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) via modulo reduction (documented choice)."""
        if n <= 0:
            raise ValueError("randbelow requires n >= 1")
        return self.next_uint64() % n

    def geometric(self, mean: float) -> int:
        """Geometric length on {1, 2, ...} with the given mean (>= 1)."""
        if mean < 1.0:
            raise ValueError("geometric mean must be >= 1")
        p = 1.0 / mean
        u = self.random()
        if p >= 1.0:
            return 1
        return 1 + int(math.log1p(-u) / math.log1p(-p))

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]
