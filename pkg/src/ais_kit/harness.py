"""Data plumbing for the CLI: file formats, scenario generators, metrics.

File formats
------------

Pattern datasets (negative selection, clonal classification) are CSV, one
pattern per row. Binary patterns live in a single ``bits`` column
('010110'); real patterns occupy one numeric column per dimension. An
optional trailing ``label`` (normal/anomalous) or ``class`` column carries
ground truth.

Event streams (dendritic cell runs) are CSV with the fixed header
``time_index,kind,antigen_type,pamp,danger,safe``; antigen rows leave the
signal columns empty and signal rows leave ``antigen_type`` empty.

All generated files embed their ground truth, and every generator is a
pure function of (name, seed), so runs are reproducible byte for byte.
"""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass

import numpy as np

from ais_kit import dca, idionet, rng as rng_mod
from ais_kit.affinity import MatchConfig, bit_string
from ais_kit.errors import ConfigError, StreamFormatError

__all__ = [
    "LabeledDataset",
    "Metrics",
    "load_dataset",
    "write_dataset",
    "load_stream",
    "write_stream",
    "evaluate",
    "generate_scenario",
    "run_idionet_scenario",
    "SCENARIO_NAMES",
    "write_json",
]

LABEL_COLUMNS = ("label", "class")


@dataclass
class LabeledDataset:
    patterns: np.ndarray  # (n, l) uint8 bits or (n, d) float features
    labels: list[str] | None
    representation: str  # "binary" | "real"
    source: str = ""

    def __post_init__(self):
        if self.patterns.ndim != 2 or self.patterns.shape[0] == 0:
            raise ConfigError("dataset must contain at least one pattern")
        if self.labels is not None and len(self.labels) != self.patterns.shape[0]:
            raise ConfigError("labels must align with patterns")


def load_dataset(path) -> LabeledDataset:
    """Read a pattern CSV; raises with the offending line on schema errors."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise StreamFormatError("empty file", line=1) from None
        header = [h.strip() for h in header]
        label_col = next((i for i, h in enumerate(header) if h in LABEL_COLUMNS), None)
        feature_cols = [i for i in range(len(header)) if i != label_col]
        if not feature_cols:
            raise StreamFormatError("no feature columns", line=1)
        binary = header[feature_cols[0]] == "bits"
        if binary and len(feature_cols) != 1:
            raise StreamFormatError("'bits' datasets must have exactly one pattern column", line=1)

        rows, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise StreamFormatError(
                    f"expected {len(header)} fields, got {len(row)}", line=lineno
                )
            if binary:
                bits = row[feature_cols[0]].strip()
                if not bits or any(ch not in "01" for ch in bits):
                    raise StreamFormatError(f"invalid bit pattern {bits!r}", line=lineno)
                rows.append(np.frombuffer(bits.encode(), dtype=np.uint8) - ord("0"))
            else:
                try:
                    rows.append(np.array([float(row[i]) for i in feature_cols]))
                except ValueError:
                    raise StreamFormatError(f"non-numeric feature in {row!r}", line=lineno) from None
                if not np.isfinite(rows[-1]).all():
                    raise StreamFormatError("non-finite feature value", line=lineno)
            if label_col is not None:
                labels.append(row[label_col].strip())
        if not rows:
            raise StreamFormatError("no data rows", line=1)
        widths = {r.size for r in rows}
        if len(widths) != 1:
            raise StreamFormatError(f"inconsistent pattern lengths {sorted(widths)}", line=1)
    return LabeledDataset(
        patterns=np.stack(rows),
        labels=labels if label_col is not None else None,
        representation="binary" if binary else "real",
        source=str(path),
    )


def write_dataset(path, patterns, labels=None, representation="binary", label_header="label"):
    patterns = np.asarray(patterns)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if representation == "binary":
            header = ["bits"]
        else:
            header = [f"x{i}" for i in range(patterns.shape[1])]
        if labels is not None:
            header.append(label_header)
        writer.writerow(header)
        for i, row in enumerate(patterns):
            if representation == "binary":
                fields = [bit_string(row)]
            else:
                fields = [repr(float(v)) for v in row]
            if labels is not None:
                fields.append(str(labels[i]))
            writer.writerow(fields)


STREAM_HEADER = ["time_index", "kind", "antigen_type", "pamp", "danger", "safe"]


def load_stream(path) -> list:
    """Read a mixed antigen/signal event stream, preserving order."""
    events = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise StreamFormatError("empty file", line=1) from None
        if header != STREAM_HEADER:
            raise StreamFormatError(
                f"expected header {','.join(STREAM_HEADER)}, got {','.join(header)}", line=1
            )
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(STREAM_HEADER):
                raise StreamFormatError(
                    f"expected {len(STREAM_HEADER)} fields, got {len(row)}", line=lineno
                )
            t_raw, kind, antigen_type, pamp, danger, safe = (f.strip() for f in row)
            try:
                t = int(t_raw)
            except ValueError:
                raise StreamFormatError(f"bad time_index {t_raw!r}", line=lineno) from None
            if kind == "antigen":
                if not antigen_type or any((pamp, danger, safe)):
                    raise StreamFormatError(
                        "antigen rows need antigen_type and empty signal columns", line=lineno
                    )
                events.append(dca.AntigenEvent(type_id=antigen_type, time_index=t))
            elif kind == "signal":
                if antigen_type or not all((pamp, danger, safe)):
                    raise StreamFormatError(
                        "signal rows need pamp,danger,safe and an empty antigen_type", line=lineno
                    )
                try:
                    frame = dca.SignalFrame(
                        pamp=float(pamp), danger=float(danger), safe=float(safe), time_index=t
                    )
                except (ValueError, ConfigError) as exc:
                    raise StreamFormatError(str(exc), line=lineno) from None
                events.append(frame)
            else:
                raise StreamFormatError(f"unknown kind {kind!r}", line=lineno)
    if not events:
        raise StreamFormatError("no events", line=1)
    return events


def write_stream(path, events):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(STREAM_HEADER)
        for ev in events:
            if isinstance(ev, dca.AntigenEvent):
                writer.writerow([ev.time_index, "antigen", ev.type_id, "", "", ""])
            else:
                writer.writerow(
                    [ev.time_index, "signal", "", repr(ev.pamp), repr(ev.danger), repr(ev.safe)]
                )


# ---------------------------------------------------------------------------
# metrics


@dataclass
class Metrics:
    """Confusion counts with 'anomalous' as the positive class."""

    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def accuracy(self) -> float:
        total = self.tp + self.fp + self.tn + self.fn
        return (self.tp + self.tn) / total if total else 0.0

    @property
    def true_positive_rate(self) -> float:
        return self.tp / (self.tp + self.fn) if (self.tp + self.fn) else 0.0

    @property
    def false_positive_rate(self) -> float:
        return self.fp / (self.fp + self.tn) if (self.fp + self.tn) else 0.0

    def to_dict(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
            "accuracy": self.accuracy,
            "true_positive_rate": self.true_positive_rate,
            "false_positive_rate": self.false_positive_rate,
        }


def evaluate(predictions, labels) -> Metrics:
    """Confusion-matrix rates over aligned prediction/label sequences."""
    predictions, labels = list(predictions), list(labels)
    if len(predictions) != len(labels):
        raise ConfigError(
            f"predictions ({len(predictions)}) and labels ({len(labels)}) differ in length"
        )
    tp = fp = tn = fn = 0
    for pred, truth in zip(predictions, labels):
        pos_pred = pred == "anomalous"
        pos_truth = truth == "anomalous"
        if pos_pred and pos_truth:
            tp += 1
        elif pos_pred:
            fp += 1
        elif pos_truth:
            fn += 1
        else:
            tn += 1
    return Metrics(tp=tp, fp=fp, tn=tn, fn=fn)


# ---------------------------------------------------------------------------
# scenario generation

SCENARIO_NAMES = ("negsel-bits", "clonal-class", "sphere-opt", "dca-canonical")


def write_json(path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _config_skeleton(algorithm, seed, params, inputs):
    return {
        "algorithm": algorithm,
        "seed": seed,
        "params": params,
        "input": inputs,
        "output": {"dir": "."},
    }


def generate_scenario(name: str, seed: int, out_dir) -> list[str]:
    """Write one ready-to-run scenario (data + config) into ``out_dir``."""
    if name not in SCENARIO_NAMES:
        raise ConfigError(f"unknown scenario {name!r}; known: {', '.join(SCENARIO_NAMES)}")
    os.makedirs(out_dir, exist_ok=True)
    return _SCENARIOS[name](seed, out_dir)


def _gen_negsel_bits(seed, out_dir):
    l, n_self = 8, 16
    rng = rng_mod.spawn(seed, "negsel-bits")
    chosen: set[bytes] = set()
    while len(chosen) < n_self:
        chosen.add(rng.integers(0, 2, size=l, dtype=np.uint8).tobytes())
    self_rows = np.stack([np.frombuffer(b, dtype=np.uint8) for b in sorted(chosen)])
    all_rows = np.array(
        [[(v >> (l - 1 - i)) & 1 for i in range(l)] for v in range(2**l)], dtype=np.uint8
    )
    self_keys = {row.tobytes() for row in self_rows}
    labels = ["normal" if row.tobytes() in self_keys else "anomalous" for row in all_rows]
    self_path = os.path.join(out_dir, "self.csv")
    test_path = os.path.join(out_dir, "test.csv")
    cfg_path = os.path.join(out_dir, "config.json")
    write_dataset(self_path, self_rows, representation="binary")
    write_dataset(test_path, all_rows, labels=labels, representation="binary")
    write_json(
        cfg_path,
        _config_skeleton(
            "negsel",
            seed,
            {
                "representation": "binary",
                "length": l,
                "r": 5,
                "n_candidates": 200,
                "distinct": True,
                "coverage_samples": 2000,
            },
            {"self": "self.csv", "test": "test.csv"},
        ),
    )
    return [self_path, test_path, cfg_path]


def _gen_clonal_class(seed, out_dir):
    rng = rng_mod.spawn(seed, "clonal-class")
    centers = {"normal": (-1.5, -1.5), "anomalous": (1.5, 1.5)}
    sigma = 0.4

    def blob(label, count):
        pts = rng.normal(loc=centers[label], scale=sigma, size=(count, 2))
        return pts, [label] * count

    train_pts, train_labels = [], []
    test_pts, test_labels = [], []
    for label in centers:
        pts, labs = blob(label, 15)
        train_pts.append(pts)
        train_labels += labs
        pts, labs = blob(label, 10)
        test_pts.append(pts)
        test_labels += labs
    train_path = os.path.join(out_dir, "train.csv")
    test_path = os.path.join(out_dir, "test.csv")
    cfg_path = os.path.join(out_dir, "config.json")
    write_dataset(
        train_path, np.vstack(train_pts), labels=train_labels,
        representation="real", label_header="class",
    )
    write_dataset(
        test_path, np.vstack(test_pts), labels=test_labels,
        representation="real", label_header="class",
    )
    write_json(
        cfg_path,
        _config_skeleton(
            "clonal",
            seed,
            {
                "mode": "classify",
                "representation": "real",
                "population_n": 20,
                "clone_factor": 1.0,
                "mutation_scale": 0.5,
                "replacement_count": 0,
                "elitism": True,
                "epochs": 2,
            },
            {"train": "train.csv", "test": "test.csv"},
        ),
    )
    return [train_path, test_path, cfg_path]


def _gen_sphere_opt(seed, out_dir):
    cfg_path = os.path.join(out_dir, "config.json")
    write_json(
        cfg_path,
        _config_skeleton(
            "clonal",
            seed,
            {
                "mode": "optimize",
                "objective": "sphere",
                "bounds": [[-5.0, 5.0], [-5.0, 5.0]],
                "population_n": 20,
                "clone_factor": 1.0,
                "mutation_scale": 1.0,
                "replacement_count": 2,
                "elitism": True,
                "max_iterations": 200,
            },
            {},
        ),
    )
    return [cfg_path]


def canonical_dca_stream() -> list:
    """The 20-event reference stream: one antigen type seen only in safe
    context, one seen only in pamp context, each presented twice."""
    events = []
    t = 0
    for _ in range(2):
        for _ in range(3):
            events.append(dca.AntigenEvent(type_id="steady", time_index=t))
            t += 1
        for _ in range(2):
            events.append(dca.SignalFrame(pamp=0.0, danger=0.0, safe=2.0, time_index=t))
            t += 1
        for _ in range(3):
            events.append(dca.AntigenEvent(type_id="burst", time_index=t))
            t += 1
        for _ in range(2):
            events.append(dca.SignalFrame(pamp=2.0, danger=0.0, safe=0.0, time_index=t))
            t += 1
    return events


def _gen_dca_canonical(seed, out_dir):
    stream_path = os.path.join(out_dir, "stream.csv")
    truth_path = os.path.join(out_dir, "truth.csv")
    cfg_path = os.path.join(out_dir, "config.json")
    write_stream(stream_path, canonical_dca_stream())
    with open(truth_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["antigen_type", "label"])
        writer.writerow(["burst", "anomalous"])
        writer.writerow(["steady", "normal"])
    write_json(
        cfg_path,
        _config_skeleton(
            "dca",
            seed,
            {
                "num_cells": 1,
                "lifespan_schedule": [8.0],
                "weights": [list(row) for row in dca.DEFAULT_WEIGHTS],
                "anomaly_threshold": 0.0,
                "include_flush_in_scores": True,
            },
            {"stream": "stream.csv", "truth": "truth.csv"},
        ),
    )
    return [stream_path, truth_path, cfg_path]


_SCENARIOS = {
    "negsel-bits": _gen_negsel_bits,
    "clonal-class": _gen_clonal_class,
    "sphere-opt": _gen_sphere_opt,
    "dca-canonical": _gen_dca_canonical,
}


# ---------------------------------------------------------------------------
# idiotypic-network scenario runner

IDIONET_PARAM_KEYS = {
    "antibodies",
    "antigens",
    "match",
    "dynamics",
    "steps",
    "present_antigen",
    "selection",
    "paratope_affinity",
    "idiotope_belief",
    "idiotope_source",
}


def run_idionet_scenario(params: dict) -> tuple[list[dict], dict]:
    """Run a scripted network scenario; returns (trajectory rows, summary).

    The paratope-affinity matrix P may be scripted explicitly; otherwise it
    is derived once from the antigen match matrix (normalized by its largest
    entry). Affinity updates only run when an idiotope-belief matrix I is
    scripted. Pairing weights follow the current concentrations.
    """
    unknown = set(params) - IDIONET_PARAM_KEYS
    if unknown:
        raise ConfigError(f"unknown idionet parameter(s): {', '.join(sorted(unknown))}")
    try:
        antibodies = [
            idionet.NetworkAntibody(
                paratope=spec["paratope"],
                idiotope=spec["idiotope"],
                concentration=float(spec["concentration"]),
                action_label=spec.get("action"),
            )
            for spec in params["antibodies"]
        ]
        antigens = [
            idionet.AntigenPattern(
                epitope=spec["epitope"], concentration=float(spec.get("concentration", 1.0))
            )
            for spec in params.get("antigens", [])
        ]
        match_cfg = MatchConfig(**params["match"])
        dyn = idionet.FarmerParams(**params["dynamics"])
        steps = int(params["steps"])
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"bad idionet scenario: {exc}") from exc
    if steps < 1:
        raise ConfigError("steps must be >= 1")

    m = idionet.build_match_matrix(antibodies, antigens, match_cfg)
    state = idionet.NetworkState(
        x=np.array([ab.concentration for ab in antibodies]),
        y=np.array([ag.concentration for ag in antigens]),
        m=m,
    )
    n_ab, n_ag = len(antibodies), len(antigens)

    v = params.get("present_antigen", 0 if n_ag else None)
    if v is not None and not 0 <= v < n_ag:
        raise ConfigError(f"present_antigen {v} out of range")
    if "paratope_affinity" in params:
        P = np.asarray(params["paratope_affinity"], dtype=float)
    elif n_ag:
        peak = m.antigen.max()
        P = (m.antigen.T / peak) if peak > 0 else np.zeros((n_ab, n_ag))
    else:
        P = None
    I = np.asarray(params["idiotope_belief"], dtype=float) if "idiotope_belief" in params else None
    for name, mat in (("paratope_affinity", P), ("idiotope_belief", I)):
        if mat is not None and mat.shape != (n_ab, n_ag):
            raise ConfigError(f"{name} must have shape ({n_ab}, {n_ag})")
    selection = params.get("selection", "activation" if P is not None else "concentration")
    if selection not in ("activation", "concentration"):
        raise ConfigError(f"unknown selection {selection!r}")
    idiotope_source = params.get("idiotope_source", "antigenic")

    rows = []
    difference_count = 0
    for t in range(1, steps + 1):
        state = idionet.step(state, dyn)
        antigenic = ""
        difference = ""
        if v is not None and P is not None:
            r = idionet.select_antigenic(P, v)
            antigenic = r
            if I is not None:
                X = idionet.pairing_weights(state.x, n_ag)
                eps = idionet.stimulation(P, I, X, r, idiotope_source=idiotope_source)
                delta = idionet.suppression(P, I, X, r, dyn.k1)
                P = idionet.update_affinity(P, eps, delta, v)
            if selection == "activation":
                selected, diff = idionet.select_by_activation(state.x, P, v)
            else:
                selected = idionet.select_by_concentration(state)
                diff = selected != r
            difference = diff
            difference_count += int(diff)
        else:
            selected = idionet.select_by_concentration(state)
        rows.append(
            {
                "t": t,
                "x": state.x.copy(),
                "selected": selected,
                "antigenic": antigenic,
                "idiotypic_difference": difference,
            }
        )
    summary = {
        "final_concentrations": [float(val) for val in state.x],
        "idiotypic_difference_count": difference_count,
        "selected_final": rows[-1]["selected"],
        "selected_action": antibodies[rows[-1]["selected"]].action_label,
    }
    if P is not None:
        summary["final_paratope_affinity"] = [[float(val) for val in row] for row in P]
    return rows, summary


def write_trajectory(path, rows, n_antibodies: int) -> None:
    """Trajectory CSV: ``t,x_1..x_N,selected,antigenic,idiotypic_difference``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["t"]
            + [f"x_{i + 1}" for i in range(n_antibodies)]
            + ["selected", "antigenic", "idiotypic_difference"]
        )
        for row in rows:
            diff = row["idiotypic_difference"]
            writer.writerow(
                [row["t"]]
                + [repr(float(val)) for val in row["x"]]
                + [
                    row["selected"],
                    row["antigenic"],
                    "" if diff == "" else ("true" if diff else "false"),
                ]
            )
