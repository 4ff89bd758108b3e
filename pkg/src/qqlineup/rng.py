"""Counter-based random streams addressable by (seed, label)."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Immutable descriptor of a reproducible random stream.

    Draws are a pure function of (seed, label): instantiating a generator
    from the same descriptor always replays the same sequence, and distinct
    labels under one seed give statistically independent streams.  Label
    derivation hashes the label, so streams can be created in any order
    (or in parallel) without affecting each other.
    """

    seed: int
    label: str = ""

    def __post_init__(self) -> None:
        if not isinstance(self.seed, int) or not 0 <= self.seed <= _MASK64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    def child(self, suffix: str) -> "RngStream":
        sep = "/" if self.label else ""
        return RngStream(self.seed, f"{self.label}{sep}{suffix}")

    def generator(self) -> np.random.Generator:
        digest = hashlib.sha256(self.label.encode("utf-8")).digest()
        words = [int.from_bytes(digest[i:i + 8], "little") for i in range(0, 32, 8)]
        ss = np.random.SeedSequence([self.seed, *words])
        return np.random.Generator(np.random.Philox(ss))
