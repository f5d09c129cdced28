"""Clonal selection: the match/clone/mutate/replace cycle.

Two usage modes share the same cycle:

* supervised pattern classification (:func:`clonalg_classify_step`,
  :func:`fit_classifier`, :func:`predict`), where each antibody carries a
  class label and the best mutated clone's label is assigned to the antigen;
* function minimization (:func:`optimize`), where affinity is the negated
  objective and the cycle performs a population local search.

Cloning volume follows rank (``round(beta * N / rank)``, floor 1) and the
mutation scale shrinks exponentially with normalized affinity
(``rho * exp(-a)``), so strong matches spawn many conservative clones and
weak ones fewer, wilder clones. No crossover.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from ais_kit import rng as rng_mod
from ais_kit.errors import ConfigError

BINARY = "binary"
REAL = "real"

__all__ = [
    "Antibody",
    "ClonalConfig",
    "OptimizeResult",
    "OBJECTIVES",
    "get_objective",
    "affinity_to",
    "select_nearest",
    "clone_count",
    "normalized_affinities",
    "mutate_clone",
    "clonalg_classify_step",
    "optimize",
    "fit_classifier",
    "predict",
]


@dataclass
class Antibody:
    """One repertoire member: a candidate recognizer or solution."""

    vector: np.ndarray
    class_label: str | None = None
    affinity: float = 0.0
    age: int = 0


@dataclass(frozen=True)
class ClonalConfig:
    population_n: int
    clone_factor: float = 1.0  # cloning-volume multiplier
    mutation_scale: float = 1.0  # base perturbation scale
    replacement_count: int = 0  # fresh random antibodies injected per cycle
    elitism: bool = True
    max_iterations: int = 100
    rng_seed: int = 0
    stop_tolerance: float | None = None  # early-exit target for optimize()
    representation: str = REAL
    bounds: tuple[float, float] = (0.0, 1.0)  # fresh-antibody box (classification)

    def __post_init__(self):
        if self.population_n < 1:
            raise ConfigError("population_n must be >= 1")
        if not 0 <= self.replacement_count < self.population_n:
            raise ConfigError("replacement_count must satisfy 0 <= d < population_n")
        if self.clone_factor <= 0:
            raise ConfigError("clone_factor must be > 0")
        if self.mutation_scale < 0:
            raise ConfigError("mutation_scale must be >= 0")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be >= 1")
        if self.representation not in (BINARY, REAL):
            raise ConfigError(f"unknown representation {self.representation!r}")


def affinity_to(antigen, vector, representation: str = REAL) -> float:
    """Bounded affinity in (0, 1]: 1/(1+L2) for real vectors, 1/(1+Hamming) for bits."""
    if representation == BINARY:
        d = float(np.count_nonzero(np.asarray(antigen) != np.asarray(vector)))
    else:
        d = float(np.linalg.norm(np.asarray(antigen, float) - np.asarray(vector, float)))
    return 1.0 / (1.0 + d)


def _affinities(antigen, repertoire: list[Antibody], representation: str) -> np.ndarray:
    return np.array([affinity_to(antigen, ab.vector, representation) for ab in repertoire])


def select_nearest(antigen, repertoire: list[Antibody], representation: str = REAL):
    """Index and affinity of the best-matching antibody; ties go to the lowest index."""
    if not repertoire:
        raise ConfigError("repertoire is empty")
    affs = _affinities(antigen, repertoire, representation)
    idx = int(np.argmax(affs))
    return idx, float(affs[idx])


def clone_count(rank: int, cfg: ClonalConfig) -> int:
    """Clones awarded to the antibody of the given affinity rank (1 = best)."""
    if rank < 1:
        raise ConfigError("rank must be >= 1")
    return max(1, int(math.floor(cfg.clone_factor * cfg.population_n / rank + 0.5)))


def normalized_affinities(values) -> np.ndarray:
    """Min-max normalization to [0, 1]; a degenerate all-equal set maps to 0.5."""
    vals = np.asarray(values, dtype=float)
    lo, hi = vals.min(), vals.max()
    if hi == lo:
        return np.full(vals.shape, 0.5)
    return (vals - lo) / (hi - lo)


def mutate_clone(clone: Antibody, a_star: float, cfg: ClonalConfig, rng) -> Antibody:
    """Mutate one clone; perturbation shrinks as normalized affinity grows.

    Real vectors get additive noise with per-component scale
    ``mutation_scale * exp(-a_star)``; bit vectors flip each bit with that
    probability clamped to [0, 0.5]. A standard draw is consumed either way,
    so replaying a fixed rng transcript stays aligned.
    """
    if not 0.0 <= a_star <= 1.0:
        raise ConfigError(f"normalized affinity must lie in [0, 1], got {a_star}")
    rate = cfg.mutation_scale * math.exp(-a_star)
    if cfg.representation == BINARY:
        flips = rng.random(clone.vector.size) < min(0.5, max(0.0, rate))
        vector = np.where(flips, 1 - clone.vector, clone.vector).astype(np.uint8)
    else:
        vector = clone.vector + rng.standard_normal(clone.vector.size) * rate
    return Antibody(vector=vector, class_label=clone.class_label)


def clonalg_classify_step(antigen, repertoire: list[Antibody], cfg: ClonalConfig, rng):
    """One presentation cycle: select, clone, mutate, promote, replace.

    Returns ``(assigned_class, new_repertoire)``. rng consumption order:
    one draw per clone (in clone order), then per replaced slot (worst
    first) a fresh vector draw followed by a label draw when the repertoire
    carries labels.
    """
    if not repertoire:
        raise ConfigError("repertoire is empty")
    rep = cfg.representation
    affs = _affinities(antigen, repertoire, rep)
    parent_idx = int(np.argmax(affs))
    parent = repertoire[parent_idx]
    a_star = float(normalized_affinities(affs)[parent_idx])

    n_clones = clone_count(1, cfg)
    clones = [mutate_clone(parent, a_star, cfg, rng) for _ in range(n_clones)]
    clone_affs = np.array([affinity_to(antigen, c.vector, rep) for c in clones])
    best_clone_idx = int(np.argmax(clone_affs))
    best_clone = clones[best_clone_idx]
    assigned = best_clone.class_label

    new_rep = list(repertoire)
    new_affs = affs.copy()
    if clone_affs[best_clone_idx] > affs[parent_idx]:
        new_rep[parent_idx] = best_clone  # memory-cell promotion
        new_affs[parent_idx] = clone_affs[best_clone_idx]

    if cfg.replacement_count > 0:
        labels = sorted({ab.class_label for ab in repertoire if ab.class_label is not None})
        order = np.argsort(new_affs, kind="stable")  # worst first
        best_idx = int(np.argmax(new_affs))
        victims = [int(i) for i in order if not (cfg.elitism and int(i) == best_idx)]
        for i in victims[: cfg.replacement_count]:
            if rep == BINARY:
                vec = rng.integers(0, 2, size=len(parent.vector), dtype=np.uint8)
            else:
                lo, hi = cfg.bounds
                vec = rng.uniform(lo, hi, size=len(parent.vector))
            label = labels[int(rng.integers(len(labels)))] if labels else None
            new_rep[i] = Antibody(vector=vec, class_label=label)
            new_affs[i] = affinity_to(antigen, vec, rep)

    for i, ab in enumerate(new_rep):
        ab.affinity = float(new_affs[i])
        if ab is repertoire[i]:
            ab.age += 1
    return assigned, new_rep


# ---------------------------------------------------------------------------
# function optimization


def sphere(x):
    x = np.asarray(x, dtype=float)
    return np.sum(x * x, axis=-1)


def rosenbrock(x):
    x = np.asarray(x, dtype=float)
    return np.sum(
        100.0 * (x[..., 1:] - x[..., :-1] ** 2) ** 2 + (1.0 - x[..., :-1]) ** 2, axis=-1
    )


def rastrigin(x):
    x = np.asarray(x, dtype=float)
    return 10.0 * x.shape[-1] + np.sum(x * x - 10.0 * np.cos(2.0 * np.pi * x), axis=-1)


OBJECTIVES = {"sphere": sphere, "rosenbrock": rosenbrock, "rastrigin": rastrigin}


def get_objective(name: str):
    try:
        return OBJECTIVES[name]
    except KeyError:
        raise ConfigError(
            f"unknown objective {name!r}; known: {', '.join(sorted(OBJECTIVES))}"
        ) from None


def _resolve_objective(objective):
    if isinstance(objective, str):
        return get_objective(objective), True
    if callable(objective):
        return objective, bool(getattr(objective, "vectorized", False))
    raise ConfigError("objective must be a callable or a registry name")


def _evaluate(fn, vectorized: bool, points: np.ndarray) -> np.ndarray:
    if vectorized:
        vals = np.asarray(fn(points), dtype=float)
        if vals.shape != (points.shape[0],):
            raise ConfigError("vectorized objective returned a wrong-shaped result")
    else:
        vals = np.array([float(fn(row)) for row in points])
    if not np.isfinite(vals).all():
        raise ValueError("objective returned a non-finite value")
    return vals


@dataclass
class OptimizeResult:
    """Minimization trace: one (iteration, best_value, best_vector) per cycle."""

    trace: list[tuple[int, float, np.ndarray]] = field(default_factory=list)

    @property
    def best_value(self) -> float:
        return min(p[1] for p in self.trace)

    @property
    def best_vector(self) -> np.ndarray:
        return min(self.trace, key=lambda p: p[1])[2]


def optimize(objective, bounds, cfg: ClonalConfig, rng=None) -> OptimizeResult:
    """Minimize ``objective`` over a box via the clonal cycle.

    ``bounds`` is a sequence of (lo, hi) pairs, one per dimension. Affinity
    is the negated objective value rank-normalized per cycle. With elitism
    the recorded best value is non-increasing. The trace starts with the
    initial population (iteration 0) and stops early once the best value
    reaches ``cfg.stop_tolerance`` (when set).
    """
    fn, vectorized = _resolve_objective(objective)
    bounds = [(float(lo), float(hi)) for lo, hi in bounds]
    if not bounds or any(not (np.isfinite(lo) and np.isfinite(hi) and lo < hi) for lo, hi in bounds):
        raise ConfigError("bounds must be finite (lo, hi) pairs with lo < hi")
    lo = np.array([b[0] for b in bounds])
    hi = np.array([b[1] for b in bounds])
    dim = len(bounds)
    if rng is None:
        rng = rng_mod.spawn(cfg.rng_seed, "optimize")

    pop = rng.uniform(lo, hi, size=(cfg.population_n, dim))
    vals = _evaluate(fn, vectorized, pop)
    result = OptimizeResult()
    best = int(np.argmin(vals))
    result.trace.append((0, float(vals[best]), pop[best].copy()))

    for it in range(1, cfg.max_iterations + 1):
        order = np.argsort(vals, kind="stable")  # best first
        ranks = np.empty(cfg.population_n, dtype=int)
        ranks[order] = np.arange(1, cfg.population_n + 1)
        a_star = normalized_affinities(-vals)
        counts = np.array([clone_count(int(r), cfg) for r in ranks])
        scales = cfg.mutation_scale * np.exp(-a_star)

        noise = rng.standard_normal(size=(int(counts.sum()), dim))
        clones = np.repeat(pop, counts, axis=0) + noise * np.repeat(scales, counts)[:, None]
        np.clip(clones, lo, hi, out=clones)
        cvals = _evaluate(fn, vectorized, clones)

        pos = 0
        for i in range(cfg.population_n):
            seg = cvals[pos : pos + counts[i]]
            j = int(np.argmin(seg))
            if seg[j] < vals[i]:
                pop[i] = clones[pos + j]
                vals[i] = seg[j]
            pos += counts[i]

        if cfg.replacement_count > 0:
            order = np.argsort(vals, kind="stable")
            best = int(np.argmin(vals))
            victims = [int(i) for i in order[::-1] if not (cfg.elitism and int(i) == best)]
            victims = victims[: cfg.replacement_count]
            fresh = rng.uniform(lo, hi, size=(len(victims), dim))
            fvals = _evaluate(fn, vectorized, fresh)
            for slot, i in enumerate(victims):
                pop[i] = fresh[slot]
                vals[i] = fvals[slot]

        best = int(np.argmin(vals))
        result.trace.append((it, float(vals[best]), pop[best].copy()))
        if cfg.stop_tolerance is not None and vals[best] <= cfg.stop_tolerance:
            break
    return result


# ---------------------------------------------------------------------------
# supervised classification plumbing


def fit_classifier(patterns, labels, cfg: ClonalConfig, epochs: int = 1, rng=None):
    """Seed a labeled repertoire from training rows and adapt it by presentation."""
    patterns = np.asarray(patterns)
    if len(patterns) == 0 or len(patterns) != len(labels):
        raise ConfigError("training patterns and labels must be non-empty and aligned")
    if epochs < 0:
        raise ConfigError("epochs must be >= 0")
    if rng is None:
        rng = rng_mod.spawn(cfg.rng_seed, "clonal-fit")
    if cfg.representation == REAL:
        cfg = replace(cfg, bounds=(float(patterns.min()), float(patterns.max())))
    idx = rng.integers(0, len(patterns), size=cfg.population_n)
    repertoire = [
        Antibody(vector=np.array(patterns[i]), class_label=str(labels[i])) for i in idx
    ]
    for _ in range(epochs):
        for row in patterns:
            _, repertoire = clonalg_classify_step(row, repertoire, cfg, rng)
    return repertoire


def predict(patterns, repertoire: list[Antibody], representation: str = REAL) -> list[str]:
    """Nearest-antibody class for each pattern."""
    out = []
    for row in np.asarray(patterns):
        idx, _ = select_nearest(row, repertoire, representation)
        out.append(repertoire[idx].class_label)
    return out
