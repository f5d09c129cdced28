"""Matching and affinity primitives shared by all algorithm modules.

Two bit-string conventions coexist and are both exposed:

* complementarity scoring (:func:`xor_alignment_score`, :func:`total_reaction`)
  counts positions where the bits differ, modelling binding between a
  recognizing string and a recognized one;
* similarity matching (:func:`r_contiguous_match`) counts positions where the
  bits agree, modelling closeness between a detector and a pattern.

Real vectors use plain Euclidean distance with the bounded affinity map
``1 / (1 + distance)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ais_kit import kernels
from ais_kit.errors import ConfigError

FULL_OVERLAP = "full-overlap-only"
ALL_OVERLAPS = "all-shifted-overlaps"

__all__ = [
    "FULL_OVERLAP",
    "ALL_OVERLAPS",
    "MatchConfig",
    "as_bits",
    "bit_string",
    "xor_alignment_score",
    "total_reaction",
    "r_contiguous_match",
    "longest_common_run",
    "euclidean_distance",
    "affinity_from_distance",
    "as_vector",
]


def as_bits(pattern) -> np.ndarray:
    """Coerce ``'0110'``, ``[0, 1, 1, 0]`` or an array into a uint8 bit row."""
    if isinstance(pattern, str):
        if not pattern or any(ch not in "01" for ch in pattern):
            raise ConfigError(f"bit pattern string must be non-empty 0/1, got {pattern!r}")
        return np.frombuffer(pattern.encode("ascii"), dtype=np.uint8) - ord("0")
    arr = np.asarray(pattern)
    if arr.ndim != 1 or arr.size == 0:
        raise ConfigError("bit pattern must be a non-empty 1-D sequence")
    if not np.isin(arr, (0, 1)).all():
        raise ConfigError("bit pattern entries must be 0 or 1")
    return np.ascontiguousarray(arr, dtype=np.uint8)


def bit_string(bits) -> str:
    """Inverse of :func:`as_bits`: render a bit row as a '0101' string."""
    return "".join("1" if b else "0" for b in np.asarray(bits).ravel())


def as_vector(values) -> np.ndarray:
    """Coerce a real feature vector, rejecting non-finite entries."""
    arr = np.ascontiguousarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ConfigError("feature vector must be a non-empty 1-D sequence")
    if not np.isfinite(arr).all():
        raise ConfigError("feature vector entries must be finite")
    return arr


@dataclass(frozen=True)
class MatchConfig:
    """Threshold and alignment policy for complementarity scoring.

    ``s`` is the minimum complementary-pair count below which an alignment
    scores zero. ``alignment_mode`` selects either the single full-overlap
    alignment or every shifted alignment keeping at least ``min_overlap``
    overlapping positions (defaults to ``s``, keeping the threshold
    attainable in every alignment counted).
    """

    s: int
    alignment_mode: str = ALL_OVERLAPS
    min_overlap: int | None = None

    def __post_init__(self):
        if self.s < 1:
            raise ConfigError(f"match threshold s must be >= 1, got {self.s}")
        if self.alignment_mode not in (FULL_OVERLAP, ALL_OVERLAPS):
            raise ConfigError(f"unknown alignment_mode {self.alignment_mode!r}")
        if self.min_overlap is not None and self.min_overlap < 1:
            raise ConfigError("min_overlap must be >= 1")

    @property
    def shifted(self) -> bool:
        return self.alignment_mode == ALL_OVERLAPS

    def resolved_min_overlap(self) -> int:
        return self.s if self.min_overlap is None else self.min_overlap

    def offsets(self, length: int) -> range:
        """Valid epitope shifts for patterns of the given length."""
        self.validate_length(length)
        if not self.shifted:
            return range(0, 1)
        shift_max = length - self.resolved_min_overlap()
        return range(-shift_max, shift_max + 1)

    def validate_length(self, length: int) -> None:
        if self.s > length:
            raise ConfigError(f"threshold s={self.s} exceeds pattern length {length}")
        if self.resolved_min_overlap() > length:
            raise ConfigError(
                f"min_overlap={self.resolved_min_overlap()} exceeds pattern length {length}"
            )


def _pair(p, e) -> tuple[np.ndarray, np.ndarray]:
    p, e = as_bits(p), as_bits(e)
    if p.shape != e.shape:
        raise ConfigError(f"pattern lengths differ: {p.size} vs {e.size}")
    return p, e


def xor_alignment_score(p, e, offset: int, cfg: MatchConfig) -> int:
    """Reaction strength of one alignment of paratope ``p`` against epitope ``e``.

    Paratope position ``t`` pairs with epitope position ``t - offset``; the
    complementary pairs (bits that differ) in the overlap are counted and the
    score is ``1 + (count - s)``, or 0 when the count falls below ``s``.
    """
    p, e = _pair(p, e)
    if offset not in cfg.offsets(p.size):
        raise ConfigError(f"offset {offset} out of range for mode {cfg.alignment_mode}")
    t0, t1 = max(0, offset), min(p.size, p.size + offset)
    count = int(np.count_nonzero(p[t0:t1] != e[t0 - offset : t1 - offset]))
    if count < cfg.s:
        return 0
    return 1 + (count - cfg.s)


def total_reaction(p, e, cfg: MatchConfig) -> int:
    """Summed reaction strength over every alignment permitted by ``cfg``."""
    p, e = _pair(p, e)
    cfg.validate_length(p.size)
    return int(
        kernels.reaction_matrix(
            e[None, :], p[None, :], cfg.s, cfg.resolved_min_overlap(), cfg.shifted
        )[0, 0]
    )


def longest_common_run(a, b) -> int:
    """Length of the longest run of positions where ``a`` and ``b`` agree."""
    a, b = _pair(a, b)
    return int(kernels.longest_run_matrix(a[None, :], b[None, :])[0, 0])


def r_contiguous_match(a, b, r: int) -> bool:
    """True iff ``a`` and ``b`` hold equal bits in at least ``r`` consecutive positions."""
    a, b = _pair(a, b)
    if not 1 <= r <= a.size:
        raise ConfigError(f"r must be in [1, {a.size}], got {r}")
    return longest_common_run(a, b) >= r


def euclidean_distance(u, v) -> float:
    """Standard L2 distance between two equal-dimension real vectors."""
    u, v = as_vector(u), as_vector(v)
    if u.shape != v.shape:
        raise ConfigError(f"vector dimensions differ: {u.size} vs {v.size}")
    return float(np.linalg.norm(u - v))


def affinity_from_distance(distance) -> float:
    """Bounded, monotone-decreasing affinity in (0, 1]: ``1 / (1 + d)``."""
    return 1.0 / (1.0 + distance)
