"""Seeded, splittable randomness for reproducible experiments.

Everything random in this package flows from an :class:`Rng` node. A node is
just a 64-bit seed; labelled children are derived by hashing the parent seed
together with the label, so two runs with the same root seed always see the
same draws, and sibling streams never share state.
"""

from __future__ import annotations

import hashlib
import random

_MASK64 = (1 << 64) - 1


class Rng:
    """Deterministic random source with labelled child streams."""

    def __init__(self, seed: int):
        self.seed = seed & _MASK64

    def child(self, *labels: object) -> "Rng":
        """Derive an independent child node keyed by ``labels``."""
        key = "/".join(str(part) for part in labels)
        digest = hashlib.sha256(f"{self.seed}:{key}".encode()).digest()
        return Rng(int.from_bytes(digest[:8], "big"))

    def stream(self) -> random.Random:
        """A fresh PRNG positioned at the start of this node's stream."""
        return random.Random(self.seed)

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed})"
