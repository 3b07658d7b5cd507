"""Logistic-map PRBS and the per-block operation selectors derived from it.

The selector source is pluggable: anything with a ``bits(count)`` method can
drive the cipher (e.g. a hyperchaos generator), the logistic generator below
is the one shipped implementation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

LOGISTIC_R = 3.9
BITS_PER_ITERATE = 32
_TWO32 = float(2**32)


def logistic_iterate(x: float) -> float:
    """One step of x -> 3.9*x*(1-x), evaluated in binary64."""
    if not 0.0 < x < 1.0:
        raise ValueError(f"logistic map state must lie in (0, 1), got {x}")
    return LOGISTIC_R * x * (1.0 - x)


def _iterate_bits(x: float) -> np.ndarray:
    """The 32 most significant fractional bits of x, MSB first."""
    v = int(x * _TWO32)
    return np.array([(v >> (31 - j)) & 1 for j in range(32)], dtype=np.uint8)


class LogisticBitGenerator:
    """Stateful PRBS source: each map iterate contributes 32 bits, MSB first.

    The first 32 output bits come from the first iterated value, not from the
    initial condition itself.
    """

    def __init__(self, x0: float):
        if not 0.0 < x0 < 1.0:
            raise ValueError(f"initial condition must lie in (0, 1), got {x0}")
        self._x = float(x0)
        self.iterations = 0
        self._buffer = np.zeros(0, dtype=np.uint8)

    def bits(self, count: int) -> np.ndarray:
        if count < 0:
            raise ValueError("bit count must be non-negative")
        chunks = [self._buffer]
        have = len(self._buffer)
        while have < count:
            self._x = logistic_iterate(self._x)
            self.iterations += 1
            chunk = _iterate_bits(self._x)
            chunks.append(chunk)
            have += BITS_PER_ITERATE
        stream = np.concatenate(chunks) if len(chunks) > 1 else chunks[0]
        self._buffer = stream[count:]
        return stream[:count]


def derive_bits(x0: float, bit_count: int) -> np.ndarray:
    """Generate ``bit_count`` PRBS bits from a fresh logistic generator."""
    return LogisticBitGenerator(x0).bits(bit_count)


def selector_sequence(bits: np.ndarray, block_count: int) -> np.ndarray:
    """Per-block selectors B(k) = 2*b(2k) + b(2k+1), values in {0,1,2,3}."""
    bits = np.asarray(bits, dtype=np.uint8)
    if len(bits) < 2 * block_count:
        raise ValueError(f"need {2 * block_count} bits for {block_count} blocks, got {len(bits)}")
    return (2 * bits[0 : 2 * block_count : 2] + bits[1 : 2 * block_count : 2]).astype(np.int8)


@dataclass
class SecretKey:
    """The cipher's key: two n-bit subkeys plus the map's initial condition."""

    key1: int
    key2: int
    x0: float
    n: int

    def __post_init__(self):
        if not 2 <= self.n <= 64:
            raise ValueError(f"word size must be in [2, 64], got {self.n}")
        limit = 1 << self.n
        if not 0 <= self.key1 < limit or not 0 <= self.key2 < limit:
            raise ValueError(f"subkeys must be {self.n}-bit values")
        if self.key1 == self.key2:
            raise ValueError("key1 and key2 must differ")
        if not 0.0 < self.x0 < 1.0:
            raise ValueError(f"x0 must lie in (0, 1), got {self.x0}")

    @property
    def hamming_distance(self) -> int:
        return (self.key1 ^ self.key2).bit_count()


def required_key_distance(n: int) -> int:
    """Hamming distance the key-generation rule enforces between the subkeys."""
    return math.ceil(n / 2)


def parse_x0(text: str) -> float:
    """Parse an initial condition given as a decimal or as 'numerator/2^k'."""
    text = text.strip()
    if "/" in text:
        num_s, den_s = text.split("/", 1)
        num = int(num_s)
        den_s = den_s.strip()
        if den_s.startswith("2^"):
            den = 1 << int(den_s[2:])
        elif den_s.startswith("2**"):
            den = 1 << int(den_s[3:])
        else:
            den = int(den_s)
        if den <= 0:
            raise ValueError(f"invalid denominator in {text!r}")
        value = num / den
    else:
        value = float(text)
    if not 0.0 < value < 1.0:
        raise ValueError(f"x0 must lie in (0, 1), got {text!r}")
    return value
