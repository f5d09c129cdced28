import json

from ais_kit.cli import main
from ais_kit.harness import write_json


def read(path):
    with open(path, "rb") as fh:
        return fh.read()


class TestUsageAndErrors:
    def test_no_arguments_prints_usage_exit_2(self, capsys):
        assert main([]) == 2
        assert "usage" in capsys.readouterr().err.lower()

    def test_unknown_scenario_name_exit_2(self):
        assert main(["generate", "mystery"]) == 2

    def test_missing_config_file_exit_2(self, tmp_path):
        assert main(["dca", "--config", str(tmp_path / "nope.json")]) == 2

    def test_unknown_config_key_exit_2(self, tmp_path):
        cfg = tmp_path / "c.json"
        write_json(cfg, {"algorithm": "dca", "params": {}, "surprise": 1})
        assert main(["dca", "--config", str(cfg)]) == 2

    def test_wrong_algorithm_exit_2(self, tmp_path):
        cfg = tmp_path / "c.json"
        write_json(cfg, {"algorithm": "negsel", "params": {}})
        assert main(["dca", "--config", str(cfg)]) == 2

    def test_unknown_param_exit_2(self, tmp_path):
        cfg = tmp_path / "c.json"
        write_json(
            cfg,
            {
                "algorithm": "dca",
                "params": {"num_cells": 1, "lifespan_schedule": [5], "bogus": 3},
                "input": {"stream": "s.csv"},
            },
        )
        assert main(["dca", "--config", str(cfg)]) == 2

    def test_malformed_stream_nonzero_exit(self, tmp_path):
        stream = tmp_path / "stream.csv"
        stream.write_text("time_index,kind,antigen_type,pamp,danger,safe\n0,witch,,1,1,1\n")
        cfg = tmp_path / "c.json"
        write_json(
            cfg,
            {
                "algorithm": "dca",
                "params": {"num_cells": 1, "lifespan_schedule": [5.0]},
                "input": {"stream": "stream.csv"},
            },
        )
        assert main(["dca", "--config", str(cfg)]) != 0

    def test_runtime_failure_exit_1(self, tmp_path):
        # every candidate is censored (r=1 against a self set holding both bits),
        # so classification of the test set cannot run
        self_csv = tmp_path / "self.csv"
        self_csv.write_text("bits\n01\n10\n")
        test_csv = tmp_path / "test.csv"
        test_csv.write_text("bits\n11\n")
        cfg = tmp_path / "c.json"
        write_json(
            cfg,
            {
                "algorithm": "negsel",
                "seed": 1,
                "params": {
                    "representation": "binary", "length": 2, "r": 1, "n_candidates": 4,
                },
                "input": {"self": "self.csv", "test": "test.csv"},
            },
        )
        assert main(["negsel", "--config", str(cfg)]) == 1


class TestEndToEnd:
    def test_generate_then_dca_sign_separated(self, tmp_path, capsys):
        assert main(["generate", "dca-canonical", "--seed", "7", "--out", str(tmp_path)]) == 0
        capsys.readouterr()
        assert main(["dca", "--config", str(tmp_path / "config.json")]) == 0
        report = json.loads(read(tmp_path / "report.json"))
        assert report["k_a"]["steady"] < 0 < report["k_a"]["burst"]
        assert report["classifications"] == {"burst": "anomalous", "steady": "normal"}
        assert report["metrics"]["accuracy"] == 1.0
        lines = read(tmp_path / "classifications.csv").decode().splitlines()
        assert lines == ["antigen_type,label", "burst,anomalous", "steady,normal"]

    def test_negsel_seeded_runs_byte_identical(self, tmp_path):
        assert main(["generate", "negsel-bits", "--seed", "3", "--out", str(tmp_path)]) == 0
        out_a, out_b = tmp_path / "ra", tmp_path / "rb"
        cfg = str(tmp_path / "config.json")
        assert main(["negsel", "--config", cfg, "--out", str(out_a)]) == 0
        assert main(["negsel", "--config", cfg, "--out", str(out_b)]) == 0
        for name in ("report.json", "classifications.csv"):
            assert read(out_a / name) == read(out_b / name)
        report = json.loads(read(out_a / "report.json"))
        assert report["metrics"]["false_positive_rate"] == 0.0
        assert report["n_detectors"] > 0

    def test_seed_flag_overrides_config(self, tmp_path):
        assert main(["generate", "negsel-bits", "--seed", "3", "--out", str(tmp_path)]) == 0
        cfg_path = tmp_path / "config.json"
        cfg = json.loads(read(cfg_path))
        cfg["seed"] = 5
        write_json(cfg_path, cfg)
        out_a, out_b = tmp_path / "ra", tmp_path / "rb"
        assert main(["negsel", "--config", str(cfg_path), "--out", str(out_a)]) == 0
        cfg["seed"] = 11  # now force 5 back via the flag
        write_json(cfg_path, cfg)
        assert main(["negsel", "--config", str(cfg_path), "--seed", "5", "--out", str(out_b)]) == 0
        assert read(out_a / "report.json") == read(out_b / "report.json")

    def test_clonal_optimize_trace(self, tmp_path):
        assert main(["generate", "sphere-opt", "--seed", "1", "--out", str(tmp_path)]) == 0
        assert main(["clonal", "--config", str(tmp_path / "config.json")]) == 0
        report = json.loads(read(tmp_path / "report.json"))
        assert report["best_value"] < 1e-2
        lines = read(tmp_path / "trace.csv").decode().splitlines()
        assert lines[0] == "iteration,best_value,x0,x1"
        assert len(lines) == 202  # header + iterations 0..200

    def test_clonal_classify_accuracy(self, tmp_path):
        assert main(["generate", "clonal-class", "--seed", "5", "--out", str(tmp_path)]) == 0
        assert main(["clonal", "--config", str(tmp_path / "config.json")]) == 0
        report = json.loads(read(tmp_path / "report.json"))
        assert report["accuracy"] >= 0.9
        lines = read(tmp_path / "predictions.csv").decode().splitlines()
        assert lines[0] == "pattern_index,label"
        assert len(lines) == 21

    def test_idionet_trajectory(self, tmp_path):
        cfg = tmp_path / "net.json"
        write_json(
            cfg,
            {
                "algorithm": "idionet",
                "params": {
                    "antibodies": [
                        {"paratope": "1100", "idiotope": "0011",
                         "concentration": 0.3, "action": "left"},
                        {"paratope": "0011", "idiotope": "1100",
                         "concentration": 0.6, "action": "right"},
                    ],
                    "antigens": [{"epitope": "0101", "concentration": 0.8}],
                    "match": {"s": 2},
                    "dynamics": {"c": 1.0, "k1": 0.5, "k2": 0.1, "dt": 0.05},
                    "steps": 8,
                },
            },
        )
        assert main(["idionet", "--config", str(cfg), "--out", str(tmp_path)]) == 0
        lines = read(tmp_path / "trajectory.csv").decode().splitlines()
        assert lines[0] == "t,x_1,x_2,selected,antigenic,idiotypic_difference"
        assert len(lines) == 9
        report = json.loads(read(tmp_path / "report.json"))
        assert len(report["final_concentrations"]) == 2

    def test_evaluate_cli(self, tmp_path, capsys):
        pred = tmp_path / "pred.csv"
        pred.write_text("antigen_type,label\nburst,anomalous\nsteady,anomalous\n")
        truth = tmp_path / "truth.csv"
        truth.write_text("antigen_type,label\nburst,anomalous\nsteady,normal\n")
        cfg = tmp_path / "eval.json"
        write_json(
            cfg,
            {"algorithm": "evaluate", "input": {"predictions": "pred.csv", "truth": "truth.csv"}},
        )
        assert main(["evaluate", "--config", str(cfg), "--out", str(tmp_path)]) == 0
        metrics = json.loads(read(tmp_path / "metrics.json"))
        assert metrics["tp"] == 1 and metrics["fp"] == 1
        assert metrics["false_positive_rate"] == 1.0
        printed = json.loads(capsys.readouterr().out)
        assert printed["accuracy"] == 0.5

    def test_log_env_smoke(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("AIS_KIT_LOG", "trace")
        assert main(["generate", "dca-canonical", "--out", str(tmp_path / "g")]) == 0
