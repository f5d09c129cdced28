"""Deterministic dendritic cell algorithm.

A static population of cells correlates a stream of antigen identifiers
with the signal context they arrive in. Antigen events round-robin into
cell stores (a global counter modulo the population size). Each signal
frame folds (pamp, danger, safe) into two outputs: a costimulation value
``csm`` that burns every cell's remaining lifespan, and a context value
``k`` accumulated per cell (safe pushes k negative, pamp and danger push
it positive). A cell whose lifespan runs out presents everything it holds
together with its accumulated k, then restarts fresh with the next
lifespan from its slot's schedule.

Per antigen type, presentations aggregate into the anomaly score ``K_a``:
the presentation-count-weighted mean of presented k values. Positive means
the type was mostly sampled in anomalous (mature) context, negative in
normal (semi-mature) context.

The whole run is a pure function of (stream, config): no training phase,
no internal randomness.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ais_kit.errors import ConfigError

__all__ = [
    "AntigenEvent",
    "SignalFrame",
    "DendriticCell",
    "DcaConfig",
    "PresentationRecord",
    "DcaReport",
    "report_to_dict",
    "DEFAULT_WEIGHTS",
    "signal_transform",
    "new_population",
    "assign_antigen",
    "apply_signal",
    "reset_cell",
    "anomaly_scores",
    "classify_scores",
    "run",
]

# rows: (pamp, danger, safe); columns: (csm, k). Safe drives csm (it still
# matures cells) while pulling the context negative hard enough to cancel
# pamp and danger.
DEFAULT_WEIGHTS = ((2.0, 2.0), (1.0, 1.0), (2.0, -3.0))


@dataclass(frozen=True)
class AntigenEvent:
    type_id: str
    time_index: int = 0


@dataclass(frozen=True)
class SignalFrame:
    pamp: float
    danger: float
    safe: float
    time_index: int = 0

    def __post_init__(self):
        vals = (self.pamp, self.danger, self.safe)
        if not all(np.isfinite(v) and v >= 0 for v in vals):
            raise ConfigError(f"signal values must be finite and >= 0, got {vals}")


@dataclass
class DendriticCell:
    slot: int
    lifespan: float
    schedule_pos: int
    k: float = 0.0
    antigen_store: Counter = field(default_factory=Counter)
    iterations_sampled: int = 0


@dataclass(frozen=True)
class PresentationRecord:
    cell_slot: int
    k: float
    antigen_counts: dict
    iterations: int
    time_index: int | None = None
    flush: bool = False  # force-presented at end of stream, not by lifespan expiry


@dataclass(frozen=True)
class DcaConfig:
    num_cells: int
    lifespan_schedule: tuple[float, ...]
    weights: tuple = DEFAULT_WEIGHTS
    anomaly_threshold: float = 0.0
    include_flush_in_scores: bool = True

    def __post_init__(self):
        if self.num_cells < 1:
            raise ConfigError("num_cells must be >= 1")
        sched = tuple(float(v) for v in self.lifespan_schedule)
        if not sched or any(not (np.isfinite(v) and v > 0) for v in sched):
            raise ConfigError("lifespan_schedule must be non-empty with all values > 0")
        object.__setattr__(self, "lifespan_schedule", sched)
        w = np.asarray(self.weights, dtype=float)
        if w.shape != (3, 2):
            raise ConfigError("weights must be a 3x2 matrix (pamp,danger,safe) -> (csm,k)")
        if (w[:, 0] < 0).any():
            raise ConfigError("csm weights must be non-negative")
        if w[0, 1] < 0 or w[1, 1] < 0:
            raise ConfigError("pamp and danger context weights must be non-negative")
        if not w[2, 1] < 0:
            raise ConfigError("safe context weight must be strictly negative")
        object.__setattr__(self, "weights", tuple(tuple(row) for row in w))


def signal_transform(frame: SignalFrame, weights=DEFAULT_WEIGHTS) -> tuple[float, float]:
    """Fold one signal frame into its (csm, k) outputs."""
    w = np.asarray(weights, dtype=float)
    csm = w[0, 0] * frame.pamp + w[1, 0] * frame.danger + w[2, 0] * frame.safe
    k = w[0, 1] * frame.pamp + w[1, 1] * frame.danger + w[2, 1] * frame.safe
    return float(csm), float(k)


def new_population(cfg: DcaConfig) -> list[DendriticCell]:
    """Fresh cells, slot i starting at schedule position i (wrapping)."""
    sched = cfg.lifespan_schedule
    return [
        DendriticCell(slot=i, lifespan=sched[i % len(sched)], schedule_pos=i % len(sched))
        for i in range(cfg.num_cells)
    ]


def assign_antigen(
    population: list[DendriticCell], event: AntigenEvent, antigen_counter: int
) -> int:
    """Store one antigen in the slot picked by the (already incremented) counter."""
    slot = antigen_counter % len(population)
    population[slot].antigen_store[event.type_id] += 1
    return slot


def reset_cell(cell: DendriticCell, cfg: DcaConfig) -> None:
    """Return a presenting cell to sampling with the next scheduled lifespan."""
    cell.schedule_pos = (cell.schedule_pos + 1) % len(cfg.lifespan_schedule)
    cell.lifespan = cfg.lifespan_schedule[cell.schedule_pos]
    cell.k = 0.0
    cell.antigen_store = Counter()
    cell.iterations_sampled = 0


def apply_signal(
    population: list[DendriticCell], frame: SignalFrame, cfg: DcaConfig
) -> list[PresentationRecord]:
    """Apply one frame to every cell in slot order; present and reset expired cells."""
    csm, k = signal_transform(frame, cfg.weights)
    records = []
    for cell in population:
        cell.lifespan -= csm
        cell.k += k
        cell.iterations_sampled += 1
        if cell.lifespan <= 0:
            records.append(
                PresentationRecord(
                    cell_slot=cell.slot,
                    k=cell.k,
                    antigen_counts=dict(sorted(cell.antigen_store.items())),
                    iterations=cell.iterations_sampled,
                    time_index=frame.time_index,
                )
            )
            reset_cell(cell, cfg)
    return records


def anomaly_scores(records: list[PresentationRecord], include_flush: bool = True) -> dict:
    """Per-type K_a: presentation-count-weighted mean of the presented k values.

    Types appearing only in excluded records get no score (absent from the
    result), never a zero.
    """
    weighted: dict[str, float] = {}
    totals: dict[str, int] = {}
    for rec in records:
        if rec.flush and not include_flush:
            continue
        for type_id, count in rec.antigen_counts.items():
            weighted[type_id] = weighted.get(type_id, 0.0) + rec.k * count
            totals[type_id] = totals.get(type_id, 0) + count
    return {t: weighted[t] / totals[t] for t in sorted(totals)}


def classify_scores(k_a: dict, threshold: float = 0.0) -> dict:
    """Label each scored type: anomalous iff its K_a exceeds the threshold."""
    return {t: ("anomalous" if score > threshold else "normal") for t, score in k_a.items()}


@dataclass
class DcaReport:
    records: list[PresentationRecord]
    k_a: dict
    classifications: dict
    unscored: list[str]
    ingested_counts: dict
    config: DcaConfig


def report_to_dict(report: DcaReport) -> dict:
    """Plain-data view of a report, stable across runs for identical input."""
    cfg = report.config
    return {
        "config": {
            "num_cells": cfg.num_cells,
            "lifespan_schedule": list(cfg.lifespan_schedule),
            "weights": [list(row) for row in cfg.weights],
            "anomaly_threshold": cfg.anomaly_threshold,
            "include_flush_in_scores": cfg.include_flush_in_scores,
        },
        "records": [
            {
                "cell_slot": rec.cell_slot,
                "k": rec.k,
                "antigen_counts": rec.antigen_counts,
                "iterations": rec.iterations,
                "time_index": rec.time_index,
                "flush": rec.flush,
            }
            for rec in report.records
        ],
        "k_a": report.k_a,
        "classifications": report.classifications,
        "unscored": report.unscored,
        "ingested_counts": report.ingested_counts,
    }


def run(stream, cfg: DcaConfig) -> DcaReport:
    """Process an ordered event stream through a fresh population.

    Events must carry non-decreasing ``time_index``. Cells still holding
    antigen when the stream ends are force-presented in a final flush (their
    records are tagged) so every ingested antigen lands in exactly one
    record.
    """
    population = new_population(cfg)
    records: list[PresentationRecord] = []
    ingested: Counter = Counter()
    antigen_counter = 0
    last_time = None
    for event in stream:
        if not isinstance(event, (AntigenEvent, SignalFrame)):
            raise ConfigError(f"malformed event {event!r}")
        if last_time is not None and event.time_index < last_time:
            raise ConfigError(
                f"stream not ordered: time_index {event.time_index} after {last_time}"
            )
        last_time = event.time_index
        if isinstance(event, AntigenEvent):
            antigen_counter += 1
            assign_antigen(population, event, antigen_counter)
            ingested[event.type_id] += 1
        else:
            records.extend(apply_signal(population, event, cfg))
    for cell in population:
        if cell.antigen_store:
            records.append(
                PresentationRecord(
                    cell_slot=cell.slot,
                    k=cell.k,
                    antigen_counts=dict(sorted(cell.antigen_store.items())),
                    iterations=cell.iterations_sampled,
                    time_index=last_time,
                    flush=True,
                )
            )
    k_a = anomaly_scores(records, include_flush=cfg.include_flush_in_scores)
    classifications = classify_scores(k_a, cfg.anomaly_threshold)
    unscored = sorted(set(ingested) - set(k_a))
    return DcaReport(
        records=records,
        k_a=k_a,
        classifications=classifications,
        unscored=unscored,
        ingested_counts=dict(sorted(ingested.items())),
        config=cfg,
    )
