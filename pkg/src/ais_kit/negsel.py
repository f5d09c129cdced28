"""Negative selection: generate random detectors, censor against self, classify.

The pipeline is one-shot: a self profile is fixed up front, candidate
detectors are drawn uniformly over the representation space, any candidate
matching a self pattern is deleted, and survivors label unseen patterns as
anomalous when they activate. There is no regeneration loop toward a
coverage target; :func:`coverage_estimate` reports what the surviving set
actually covers instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ais_kit import kernels, rng as rng_mod
from ais_kit.affinity import affinity_from_distance, as_bits, as_vector
from ais_kit.errors import ConfigError

BINARY = "binary"
REAL = "real"

__all__ = [
    "BINARY",
    "REAL",
    "Detector",
    "SelfProfile",
    "NegSelConfig",
    "Classification",
    "generate_candidates",
    "censor",
    "classify",
    "classify_batch",
    "coverage_estimate",
    "detector_matches",
]


@dataclass(frozen=True)
class Detector:
    """A censored recognizer: pattern plus the matching rule it was bred for."""

    id: int
    pattern: np.ndarray
    rule: str  # "r-contiguous" | "real-threshold"
    r: int | None = None
    radius: float | None = None


class SelfProfile:
    """Non-empty, representation-homogeneous set of normal patterns."""

    def __init__(self, patterns, representation: str):
        if representation not in (BINARY, REAL):
            raise ConfigError(f"unknown representation {representation!r}")
        if representation == BINARY:
            rows = [as_bits(p) for p in patterns]
        else:
            rows = [as_vector(p) for p in patterns]
        if not rows:
            raise ConfigError("self profile must be non-empty")
        widths = {row.size for row in rows}
        if len(widths) != 1:
            raise ConfigError(f"self profile patterns have mixed lengths {sorted(widths)}")
        self.patterns = np.ascontiguousarray(np.stack(rows))
        self.representation = representation

    def __len__(self) -> int:
        return self.patterns.shape[0]

    @property
    def length(self) -> int:
        return self.patterns.shape[1]


@dataclass(frozen=True)
class NegSelConfig:
    """Pipeline parameters; ``length`` is bit-length l or real dimension d."""

    representation: str
    length: int
    n_candidates: int
    rng_seed: int = 0
    r: int | None = None
    radius: float | None = None
    activation_threshold: float | None = None
    distinct: bool = False
    bounds: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if self.representation not in (BINARY, REAL):
            raise ConfigError(f"unknown representation {self.representation!r}")
        if self.length < 1:
            raise ConfigError("length must be >= 1")
        if self.n_candidates < 1:
            raise ConfigError("n_candidates must be >= 1")
        if self.representation == BINARY:
            if self.r is None or not 1 <= self.r <= self.length:
                raise ConfigError(f"r must be in [1, {self.length}], got {self.r}")
            if self.distinct and self.n_candidates > 2**self.length:
                raise ConfigError(
                    f"cannot draw {self.n_candidates} distinct patterns of length {self.length}"
                )
        else:
            if self.radius is None or not self.radius > 0:
                raise ConfigError(f"radius must be > 0, got {self.radius}")
            lo, hi = self.bounds
            if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
                raise ConfigError(f"bounds must be finite with lo < hi, got {self.bounds}")
            # classify() activates on affinity > threshold; censoring removes
            # detectors within radius of self, which only guarantees censored
            # self patterns stay below 1/(1+radius) affinity.
            t = self.resolved_threshold()
            if t < affinity_from_distance(self.radius):
                raise ConfigError(
                    f"activation_threshold {t} is below 1/(1+radius)="
                    f"{affinity_from_distance(self.radius)}; censored self patterns "
                    "could still activate"
                )
            if self.distinct:
                raise ConfigError("distinct sampling applies to binary patterns only")

    def resolved_threshold(self) -> float:
        if self.activation_threshold is not None:
            return self.activation_threshold
        return affinity_from_distance(self.radius)


@dataclass(frozen=True)
class Classification:
    label: str  # "normal" | "anomalous"
    detector_id: int | None = None
    affinity: float | None = None


def generate_candidates(cfg: NegSelConfig) -> list[Detector]:
    """Draw ``n_candidates`` detectors uniformly over the representation space.

    Deterministic per seed. With ``distinct`` set (binary only) duplicate
    patterns are rejected and redrawn.
    """
    rng = rng_mod.spawn(cfg.rng_seed, "generate")
    detectors: list[Detector] = []
    if cfg.representation == BINARY:
        seen: set[bytes] = set()
        while len(detectors) < cfg.n_candidates:
            bits = rng.integers(0, 2, size=cfg.length, dtype=np.uint8)
            if cfg.distinct:
                key = bits.tobytes()
                if key in seen:
                    continue
                seen.add(key)
            detectors.append(
                Detector(id=len(detectors), pattern=bits, rule="r-contiguous", r=cfg.r)
            )
    else:
        lo, hi = cfg.bounds
        for i in range(cfg.n_candidates):
            vec = rng.uniform(lo, hi, size=cfg.length)
            detectors.append(
                Detector(id=i, pattern=vec, rule="real-threshold", radius=cfg.radius)
            )
    return detectors


def _detector_matrix(detectors: list[Detector]) -> np.ndarray:
    return np.ascontiguousarray(np.stack([d.pattern for d in detectors]))


def _check_compatible(detectors, profile_repr, width, what="patterns"):
    first = detectors[0]
    det_repr = BINARY if first.rule == "r-contiguous" else REAL
    if det_repr != profile_repr:
        raise ConfigError(f"detector representation {det_repr} does not match {what} {profile_repr}")
    if first.pattern.size != width:
        raise ConfigError(
            f"detector length {first.pattern.size} does not match {what} length {width}"
        )


def detector_matches(detector: Detector, pattern) -> bool:
    """Replayable censoring/activation predicate for a single pair."""
    if detector.rule == "r-contiguous":
        a = as_bits(pattern)
        runs = kernels.longest_run_matrix(detector.pattern[None, :], a[None, :])
        return bool(runs[0, 0] >= detector.r)
    v = as_vector(pattern)
    return float(np.linalg.norm(detector.pattern - v)) <= detector.radius


def censor(candidates: list[Detector], self_profile: SelfProfile) -> list[Detector]:
    """Keep only candidates matching no self pattern; order and ids preserved."""
    if not candidates:
        return []
    _check_compatible(candidates, self_profile.representation, self_profile.length, "self profile")
    mat = _detector_matrix(candidates)
    if self_profile.representation == BINARY:
        runs = kernels.longest_run_matrix(mat, self_profile.patterns)
        hits = (runs >= candidates[0].r).any(axis=1)
    else:
        dists = np.linalg.norm(mat[:, None, :] - self_profile.patterns[None, :, :], axis=2)
        hits = (dists <= candidates[0].radius).any(axis=1)
    return [d for d, hit in zip(candidates, hits) if not hit]


def classify(pattern, detectors: list[Detector], cfg: NegSelConfig) -> Classification:
    """Label one pattern against the detector set.

    Bit detectors activate on a boolean r-contiguous match; the reported
    affinity is the longest shared run with the best-matching detector.
    Real detectors activate when ``1/(1+distance)`` exceeds the activation
    threshold; the nearest activating detector is reported.
    """
    return classify_batch([pattern], detectors, cfg)[0]


def classify_batch(patterns, detectors: list[Detector], cfg: NegSelConfig) -> list[Classification]:
    if not detectors:
        raise ConfigError("cannot classify with an empty detector set")
    if cfg.representation == BINARY:
        rows = np.stack([as_bits(p) for p in patterns])
    else:
        rows = np.stack([as_vector(p) for p in patterns])
    _check_compatible(detectors, cfg.representation, rows.shape[1], "test patterns")
    mat = _detector_matrix(detectors)
    out: list[Classification] = []
    if cfg.representation == BINARY:
        runs = kernels.longest_run_matrix(rows, mat)
        best = runs.argmax(axis=1)
        for i in range(rows.shape[0]):
            j = int(best[i])
            if runs[i, j] >= cfg.r:
                out.append(Classification("anomalous", detectors[j].id, float(runs[i, j])))
            else:
                out.append(Classification("normal"))
    else:
        dists = np.linalg.norm(rows[:, None, :] - mat[None, :, :], axis=2)
        aff = 1.0 / (1.0 + dists)
        best = aff.argmax(axis=1)
        t = cfg.resolved_threshold()
        for i in range(rows.shape[0]):
            j = int(best[i])
            if aff[i, j] > t:
                out.append(Classification("anomalous", detectors[j].id, float(aff[i, j])))
            else:
                out.append(Classification("normal"))
    return out


def coverage_estimate(
    detectors: list[Detector],
    cfg: NegSelConfig,
    sample_budget: int,
    self_profile: SelfProfile | None = None,
) -> float:
    """Monte-Carlo fraction of non-self space matched by at least one detector.

    Samples are drawn uniformly over the representation space; samples
    belonging to self (exact members for bit patterns, within ``radius`` of a
    self pattern for real ones) are excluded when a profile is given.
    Deterministic per ``cfg.rng_seed``.
    """
    if sample_budget < 1:
        raise ConfigError("sample_budget must be >= 1")
    rng = rng_mod.spawn(cfg.rng_seed, "coverage")
    if cfg.representation == BINARY:
        samples = rng.integers(0, 2, size=(sample_budget, cfg.length), dtype=np.uint8)
    else:
        lo, hi = cfg.bounds
        samples = rng.uniform(lo, hi, size=(sample_budget, cfg.length))
    if self_profile is not None:
        if cfg.representation == BINARY:
            self_keys = {row.tobytes() for row in self_profile.patterns}
            keep = np.array([row.tobytes() not in self_keys for row in samples])
        else:
            d = np.linalg.norm(
                samples[:, None, :] - self_profile.patterns[None, :, :], axis=2
            )
            keep = (d > cfg.radius).all(axis=1)
        samples = samples[keep]
    if samples.shape[0] == 0:
        return 0.0
    if not detectors:
        return 0.0
    mat = _detector_matrix(detectors)
    if cfg.representation == BINARY:
        runs = kernels.longest_run_matrix(samples, mat)
        matched = (runs >= cfg.r).any(axis=1)
    else:
        dists = np.linalg.norm(samples[:, None, :] - mat[None, :, :], axis=2)
        aff = 1.0 / (1.0 + dists)
        matched = (aff > cfg.resolved_threshold()).any(axis=1)
    return float(matched.sum()) / float(samples.shape[0])
