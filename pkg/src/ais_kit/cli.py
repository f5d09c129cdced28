"""``ais-kit`` command line interface.

Subcommands: ``negsel``, ``clonal``, ``idionet``, ``dca`` run one algorithm
from a JSON config; ``generate`` writes ready-to-run scenarios; ``evaluate``
scores predictions against ground truth.

Config files share one schema::

    {
      "algorithm": "<subcommand>",
      "seed": 42,
      "params": { ... algorithm parameters ... },
      "input":  { ... input file paths, relative to the config file ... },
      "output": {"dir": "."}
    }

Unknown keys are rejected. ``--seed`` and ``--out`` override the config.
Exit codes: 0 success, 2 configuration/usage error, 1 runtime error.
Verbosity comes from ``AIS_KIT_LOG`` (quiet | info | trace).
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys

from ais_kit import __version__, clonal, dca, harness, negsel
from ais_kit.errors import ConfigError

log = logging.getLogger("ais_kit")

_TOP_KEYS = {"algorithm", "seed", "params", "input", "output"}


def _setup_logging() -> None:
    name = os.environ.get("AIS_KIT_LOG", "").strip().lower()
    level = {"quiet": logging.ERROR, "info": logging.INFO, "trace": logging.DEBUG}.get(
        name, logging.WARNING
    )
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


def _load_config(path, expected_algorithm: str) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    algorithm = cfg.get("algorithm")
    if algorithm != expected_algorithm:
        raise ConfigError(
            f"config is for algorithm {algorithm!r}, expected {expected_algorithm!r}"
        )
    cfg.setdefault("seed", 0)
    cfg.setdefault("params", {})
    cfg.setdefault("input", {})
    cfg.setdefault("output", {})
    if not isinstance(cfg["params"], dict) or not isinstance(cfg["input"], dict):
        raise ConfigError("'params' and 'input' must be JSON objects")
    return cfg


def _take(params: dict, allowed: set, required: set = frozenset()) -> dict:
    unknown = set(params) - allowed
    if unknown:
        raise ConfigError(f"unknown parameter(s): {', '.join(sorted(unknown))}")
    missing = required - set(params)
    if missing:
        raise ConfigError(f"missing parameter(s): {', '.join(sorted(missing))}")
    return params


def _resolve(base_dir: str, cfg: dict, key: str, required: bool) -> str | None:
    path = cfg["input"].get(key)
    if path is None:
        if required:
            raise ConfigError(f"config input.{key} is required")
        return None
    return os.path.join(base_dir, path)


def _out_dir(args, base_dir: str, cfg: dict) -> str:
    if args.out:
        out = args.out
    else:
        out = os.path.join(base_dir, cfg.get("output", {}).get("dir", "."))
    os.makedirs(out, exist_ok=True)
    return out


def _seed(args, cfg: dict) -> int:
    return args.seed if args.seed is not None else int(cfg.get("seed", 0))


# ---------------------------------------------------------------------------
# subcommand implementations


def _cmd_negsel(args) -> int:
    cfg = _load_config(args.config, "negsel")
    base = os.path.dirname(os.path.abspath(args.config))
    seed = _seed(args, cfg)
    params = _take(
        dict(cfg["params"]),
        allowed={
            "representation", "length", "r", "radius", "activation_threshold",
            "n_candidates", "distinct", "bounds", "coverage_samples",
        },
        required={"representation", "length", "n_candidates"},
    )
    coverage_samples = int(params.pop("coverage_samples", 2000))
    if "bounds" in params:
        params["bounds"] = tuple(params["bounds"])
    ns_cfg = negsel.NegSelConfig(rng_seed=seed, **params)

    self_ds = harness.load_dataset(_resolve(base, cfg, "self", required=True))
    if self_ds.representation != ns_cfg.representation:
        raise ConfigError(
            f"self profile is {self_ds.representation}, config says {ns_cfg.representation}"
        )
    profile = negsel.SelfProfile(self_ds.patterns, self_ds.representation)
    candidates = negsel.generate_candidates(ns_cfg)
    detectors = negsel.censor(candidates, profile)
    coverage = negsel.coverage_estimate(detectors, ns_cfg, coverage_samples, profile)
    log.info("negsel: %d candidates -> %d detectors, coverage %.3f",
             len(candidates), len(detectors), coverage)

    out = _out_dir(args, base, cfg)
    report = {
        "algorithm": "negsel",
        "seed": seed,
        "n_candidates": len(candidates),
        "n_detectors": len(detectors),
        "coverage_estimate": coverage,
    }
    test_path = _resolve(base, cfg, "test", required=False)
    if test_path is not None:
        test_ds = harness.load_dataset(test_path)
        if not detectors:
            raise RuntimeError("no detectors survived censoring; cannot classify")
        results = negsel.classify_batch(test_ds.patterns, detectors, ns_cfg)
        pred_path = os.path.join(out, "classifications.csv")
        with open(pred_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["pattern_index", "label", "detector_id", "affinity"])
            for i, res in enumerate(results):
                writer.writerow([
                    i, res.label,
                    "" if res.detector_id is None else res.detector_id,
                    "" if res.affinity is None else repr(res.affinity),
                ])
        report["classifications"] = os.path.basename(pred_path)
        if test_ds.labels is not None:
            metrics = harness.evaluate([r.label for r in results], test_ds.labels)
            report["metrics"] = metrics.to_dict()
    harness.write_json(os.path.join(out, "report.json"), report)
    return 0


def _expand_bounds(params: dict) -> list:
    bounds = params.pop("bounds")
    dimension = params.pop("dimension", None)
    if bounds and not isinstance(bounds[0], (list, tuple)):
        if dimension is None:
            raise ConfigError("scalar bounds need a 'dimension' parameter")
        bounds = [list(bounds)] * int(dimension)
    return [tuple(b) for b in bounds]


def _cmd_clonal(args) -> int:
    cfg = _load_config(args.config, "clonal")
    base = os.path.dirname(os.path.abspath(args.config))
    seed = _seed(args, cfg)
    params = dict(cfg["params"])
    mode = params.pop("mode", None)
    out = _out_dir(args, base, cfg)

    common = {"population_n", "clone_factor", "mutation_scale", "replacement_count", "elitism"}
    if mode == "optimize":
        params = _take(
            params,
            allowed=common | {"objective", "bounds", "dimension", "max_iterations", "stop_tolerance"},
            required={"objective", "bounds", "population_n"},
        )
        objective = params.pop("objective")
        bounds = _expand_bounds(params)
        cl_cfg = clonal.ClonalConfig(rng_seed=seed, representation="real", **params)
        result = clonal.optimize(objective, bounds, cl_cfg)
        trace_path = os.path.join(out, "trace.csv")
        dim = len(bounds)
        with open(trace_path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "best_value"] + [f"x{i}" for i in range(dim)])
            for it, value, vector in result.trace:
                writer.writerow([it, repr(value)] + [repr(float(v)) for v in vector])
        harness.write_json(
            os.path.join(out, "report.json"),
            {
                "algorithm": "clonal",
                "mode": "optimize",
                "seed": seed,
                "objective": objective,
                "best_value": result.best_value,
                "best_vector": [float(v) for v in result.best_vector],
                "iterations": result.trace[-1][0],
                "trace": os.path.basename(trace_path),
            },
        )
        log.info("clonal optimize: best %.6g", result.best_value)
        return 0

    if mode == "classify":
        params = _take(params, allowed=common | {"representation", "epochs"},
                       required={"population_n"})
        epochs = int(params.pop("epochs", 1))
        cl_cfg = clonal.ClonalConfig(rng_seed=seed, **params)
        train = harness.load_dataset(_resolve(base, cfg, "train", required=True))
        if train.labels is None:
            raise ConfigError("training dataset needs a label/class column")
        repertoire = clonal.fit_classifier(train.patterns, train.labels, cl_cfg, epochs=epochs)
        report = {"algorithm": "clonal", "mode": "classify", "seed": seed,
                  "population_n": cl_cfg.population_n, "epochs": epochs}
        test_path = _resolve(base, cfg, "test", required=False)
        if test_path is not None:
            test = harness.load_dataset(test_path)
            predictions = clonal.predict(test.patterns, repertoire, cl_cfg.representation)
            pred_path = os.path.join(out, "predictions.csv")
            with open(pred_path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["pattern_index", "label"])
                for i, label in enumerate(predictions):
                    writer.writerow([i, label])
            report["predictions"] = os.path.basename(pred_path)
            if test.labels is not None:
                report["metrics"] = harness.evaluate(predictions, test.labels).to_dict()
                report["accuracy"] = sum(
                    p == t for p, t in zip(predictions, test.labels)
                ) / len(test.labels)
        harness.write_json(os.path.join(out, "report.json"), report)
        return 0

    raise ConfigError(f"clonal params.mode must be 'optimize' or 'classify', got {mode!r}")


def _cmd_idionet(args) -> int:
    cfg = _load_config(args.config, "idionet")
    base = os.path.dirname(os.path.abspath(args.config))
    out = _out_dir(args, base, cfg)
    rows, summary = harness.run_idionet_scenario(cfg["params"])
    n_ab = len(cfg["params"]["antibodies"])
    traj_path = os.path.join(out, "trajectory.csv")
    harness.write_trajectory(traj_path, rows, n_ab)
    summary = {"algorithm": "idionet", "trajectory": os.path.basename(traj_path), **summary}
    harness.write_json(os.path.join(out, "report.json"), summary)
    log.info("idionet: %d steps, %d idiotypic differences",
             len(rows), summary["idiotypic_difference_count"])
    return 0


def _cmd_dca(args) -> int:
    cfg = _load_config(args.config, "dca")
    base = os.path.dirname(os.path.abspath(args.config))
    params = _take(
        dict(cfg["params"]),
        allowed={"num_cells", "lifespan_schedule", "weights", "anomaly_threshold",
                 "include_flush_in_scores"},
        required={"num_cells", "lifespan_schedule"},
    )
    if "weights" in params:
        params["weights"] = tuple(tuple(row) for row in params["weights"])
    params["lifespan_schedule"] = tuple(params["lifespan_schedule"])
    dca_cfg = dca.DcaConfig(**params)
    stream = harness.load_stream(_resolve(base, cfg, "stream", required=True))
    report = dca.run(stream, dca_cfg)
    out = _out_dir(args, base, cfg)

    class_path = os.path.join(out, "classifications.csv")
    with open(class_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["antigen_type", "label"])
        for type_id in sorted(report.classifications):
            writer.writerow([type_id, report.classifications[type_id]])

    doc = {"algorithm": "dca", **dca.report_to_dict(report)}
    truth_path = _resolve(base, cfg, "truth", required=False)
    if truth_path is not None:
        truth = _read_label_rows(truth_path)
        keyed = dict(zip(truth["keys"], truth["labels"]))
        pairs = [(report.classifications.get(t, "normal"), label)
                 for t, label in sorted(keyed.items())]
        doc["metrics"] = harness.evaluate([p for p, _ in pairs], [t for _, t in pairs]).to_dict()
    harness.write_json(os.path.join(out, "report.json"), doc)
    log.info("dca: %d presentations, %d types scored", len(report.records), len(report.k_a))
    return 0


def _read_label_rows(path) -> dict:
    """Read any CSV carrying a label/class column; keeps the first column as key."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ConfigError(f"{path}: empty file") from None
        try:
            label_idx = next(i for i, h in enumerate(header) if h in harness.LABEL_COLUMNS)
        except StopIteration:
            raise ConfigError(f"{path}: no label/class column") from None
        keys, labels = [], []
        for row in reader:
            if not row:
                continue
            keys.append(row[0].strip())
            labels.append(row[label_idx].strip())
    if not labels:
        raise ConfigError(f"{path}: no data rows")
    return {"keys": keys, "labels": labels, "key_header": header[0]}


def _cmd_evaluate(args) -> int:
    cfg = _load_config(args.config, "evaluate")
    base = os.path.dirname(os.path.abspath(args.config))
    _take(dict(cfg["params"]), allowed=set())
    pred = _read_label_rows(_resolve(base, cfg, "predictions", required=True))
    truth = _read_label_rows(_resolve(base, cfg, "truth", required=True))
    if len(pred["labels"]) != len(truth["labels"]):
        raise ConfigError(
            f"predictions ({len(pred['labels'])}) and truth ({len(truth['labels'])}) differ in length"
        )
    if pred["key_header"] == truth["key_header"] and pred["keys"] != truth["keys"]:
        raise ConfigError("prediction and truth rows are not aligned (key columns differ)")
    metrics = harness.evaluate(pred["labels"], truth["labels"])
    out = _out_dir(args, base, cfg)
    harness.write_json(
        os.path.join(out, "metrics.json"),
        {"algorithm": "evaluate", "count": len(pred["labels"]), **metrics.to_dict()},
    )
    print(json.dumps(metrics.to_dict(), sort_keys=True))
    return 0


def _cmd_generate(args) -> int:
    out = args.out or "."
    files = harness.generate_scenario(args.name, args.seed if args.seed is not None else 0, out)
    for path in files:
        print(path)
    return 0


# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ais-kit",
        description="Immune-inspired anomaly detection, classification and optimization.",
    )
    parser.add_argument("--version", action="version", version=f"ais-kit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_run(name, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=None, help="override the output directory")
        return p

    add_run("negsel", "run the negative-selection pipeline").set_defaults(func=_cmd_negsel)
    add_run("clonal", "run clonal selection (classify or optimize)").set_defaults(func=_cmd_clonal)
    add_run("idionet", "run an idiotypic network scenario").set_defaults(func=_cmd_idionet)
    add_run("dca", "run the dendritic cell algorithm on a stream").set_defaults(func=_cmd_dca)
    add_run("evaluate", "score predictions against ground truth").set_defaults(func=_cmd_evaluate)

    gen = sub.add_parser("generate", help="write a synthetic scenario")
    gen.add_argument("name", choices=harness.SCENARIO_NAMES)
    gen.add_argument("--seed", type=int, default=None)
    gen.add_argument("--out", default=None, help="destination directory (default: cwd)")
    gen.set_defaults(func=_cmd_generate)
    return parser


def main(argv=None) -> int:
    _setup_logging()
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"ais-kit: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        log.debug("runtime failure", exc_info=True)
        print(f"ais-kit: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
