"""Seeded random streams.

All randomness goes through numpy's Philox-4x64 counter-based bit generator
(64-bit keys, 10 rounds).  Each named stream derives its own key from the
user seed, so adding draws to one stream never shifts another.
"""

from __future__ import annotations

import hashlib
from fractions import Fraction

import numpy as np

ALGORITHM = "Philox-4x64-10"


def stream_key(seed: int, name: str = "") -> int:
    digest = hashlib.sha256(f"{int(seed)}:{name}".encode()).digest()
    return int.from_bytes(digest[:8], "little")


def make_rng(seed: int, name: str = "") -> np.random.Generator:
    """Generator for the stream ``name`` under ``seed``."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, name)))


def rational_weights(rng: np.random.Generator, k: int, denom: int = 6, p_zero: float = 0.0) -> list:
    """``k`` nonnegative Fractions summing to 1; each entry drawn from ``1..denom``
    and zeroed with probability ``p_zero`` (at least one entry survives)."""
    raw = [int(v) for v in rng.integers(1, denom + 1, size=k)]
    if p_zero:
        keep = rng.random(k) >= p_zero
        if not keep.any():
            keep[int(rng.integers(k))] = True
        raw = [r if kp else 0 for r, kp in zip(raw, keep)]
    tot = sum(raw)
    return [Fraction(r, tot) for r in raw]
