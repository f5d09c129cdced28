"""Seeded random-number streams.

One user-facing seed is split into independent, order-insensitive streams
via ``numpy``'s ``SeedSequence`` spawn keys, so adding a draw in one
component never shifts the values seen by another.
"""

from __future__ import annotations

import numpy as np

__all__ = ["spawn"]


def spawn(seed: int, *key: int | str) -> np.random.Generator:
    """Return a generator for the stream identified by ``key`` under ``seed``.

    String key parts are hashed to stable integers so call sites can use
    readable labels ("censor", "coverage", ...).
    """
    parts = tuple(_as_key_int(k) for k in key)
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=parts)))


def _as_key_int(part: int | str) -> int:
    if isinstance(part, str):
        # stable, platform-independent label -> integer mapping
        acc = 0
        for ch in part.encode("utf-8"):
            acc = (acc * 257 + ch) % (2**32)
        return acc
    return int(part)
