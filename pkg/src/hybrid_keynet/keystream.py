"""Seeded, replayable randomness streams with draw accounting."""

from __future__ import annotations

import hashlib
import random


class KeyStream:
    """Deterministic bit stream derived from ``(seed, label)``.

    Each session gives every link its own stream, so key bits are never
    shared between links and ``bits_drawn`` audits consumption.
    """

    def __init__(self, seed: int, label: str = ""):
        digest = hashlib.sha256(f"{seed}/{label}".encode()).digest()
        self._rng = random.Random(int.from_bytes(digest, "big"))
        self.seed = seed
        self.label = label
        self.bits_drawn = 0

    def draw_bits(self, n: int) -> int:
        if n < 0:
            raise ValueError("cannot draw a negative number of bits")
        self.bits_drawn += n
        return self._rng.getrandbits(n) if n else 0

    def randbelow(self, k: int) -> int:
        self.bits_drawn += (k - 1).bit_length()
        return self._rng.randrange(k)

    def __repr__(self) -> str:
        return f"KeyStream(seed={self.seed!r}, label={self.label!r}, bits_drawn={self.bits_drawn})"


def as_stream(randomness: int | KeyStream, label: str = "") -> KeyStream:
    if isinstance(randomness, KeyStream):
        return randomness
    return KeyStream(randomness, label)
