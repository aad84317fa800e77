"""End-to-end tests of the command-line interface."""

import json

import pytest

from dualedl.cli import main

TINY = {
    "data": {
        "k": 4, "n_max": 60, "imbalance_ratio": 6.0, "feature_dim": 3,
        "class_separation": 3.0, "ambiguous_class_pairs": [[2, 3, 0.5]],
        "ambiguous_fraction": 0.5, "label_noise_rate": 0.1, "noise_scope": "tail",
        "test_per_class": 25, "seed": 1,
    },
    "net": {"hidden_dims": [8]},
    "train": {"epochs": 2, "batch_size": 16, "seed": 1},
}


def write_tiny_config(tmp_path, **extra):
    cfg = dict(TINY)
    cfg.update(extra)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return str(path)


class TestGenData:
    def test_writes_files_and_reports_ir(self, tmp_path, capsys):
        cfg = write_tiny_config(tmp_path)
        assert main(["gen-data", "--config", cfg, "--out", str(tmp_path / "d")]) == 0
        out = capsys.readouterr().out
        assert "realized imbalance ratio" in out
        for name in ("train.csv", "test.csv", "dataset.json", "config.json"):
            assert (tmp_path / "d" / name).exists()

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_tiny_config(tmp_path)
        main(["gen-data", "--config", cfg, "--out", str(tmp_path / "a")])
        main(["gen-data", "--config", cfg, "--out", str(tmp_path / "b")])
        for name in ("train.csv", "test.csv", "dataset.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_invalid_config_exits_64_naming_field(self, tmp_path, capsys):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"data": {"imbalance_ratio": 0.2}}))
        assert main(["gen-data", "--config", str(path), "--out", str(tmp_path / "x")]) == 64
        assert "imbalance_ratio" in capsys.readouterr().err

    def test_default_benchmark_hits_requested_ir(self, tmp_path, capsys):
        assert main(["gen-data", "--out", str(tmp_path / "d")]) == 0
        out = capsys.readouterr().out
        ir = float(out.split("realized imbalance ratio: ")[1].split()[0])
        assert abs(ir - 50.0) / 50.0 <= 0.10


class TestTrain:
    def test_writes_metrics_state_and_figure(self, tmp_path):
        cfg = write_tiny_config(tmp_path)
        out = tmp_path / "run"
        assert main(["train", "--config", cfg, "--out", str(out)]) == 0
        for name in ("metrics.csv", "state.npz", "metrics.png", "config.json"):
            assert (out / name).exists()

    def test_deterministic_metrics(self, tmp_path):
        cfg = write_tiny_config(tmp_path)
        main(["train", "--config", cfg, "--out", str(tmp_path / "r1")])
        main(["train", "--config", cfg, "--out", str(tmp_path / "r2")])
        assert (tmp_path / "r1" / "metrics.csv").read_bytes() == \
            (tmp_path / "r2" / "metrics.csv").read_bytes()

    def test_config_echo_reproduces_run(self, tmp_path):
        cfg = write_tiny_config(tmp_path)
        main(["train", "--config", cfg, "--out", str(tmp_path / "r1")])
        echoed = tmp_path / "r1" / "config.json"
        assert main(["train", "--config", str(echoed), "--out", str(tmp_path / "r3")]) == 0
        assert (tmp_path / "r1" / "metrics.csv").read_bytes() == \
            (tmp_path / "r3" / "metrics.csv").read_bytes()

    def test_trains_from_exported_dataset(self, tmp_path):
        cfg = write_tiny_config(tmp_path)
        main(["gen-data", "--config", cfg, "--out", str(tmp_path / "d")])
        code = main(["train", "--config", cfg, "--out", str(tmp_path / "r"),
                     "--data", str(tmp_path / "d")])
        assert code == 0

    def test_policy_flag_lands_in_echo(self, tmp_path):
        cfg = write_tiny_config(tmp_path)
        main(["train", "--config", cfg, "--out", str(tmp_path / "r"), "--policy", "off"])
        echoed = json.loads((tmp_path / "r" / "config.json").read_text())
        assert echoed["policy"]["reweight_enabled"] is False
        assert echoed["policy"]["smoothing_enabled"] is False

    def test_seed_flag_changes_outputs(self, tmp_path):
        cfg = write_tiny_config(tmp_path)
        main(["train", "--config", cfg, "--out", str(tmp_path / "s1"), "--seed", "1"])
        main(["train", "--config", cfg, "--out", str(tmp_path / "s2"), "--seed", "2"])
        assert (tmp_path / "s1" / "metrics.csv").read_bytes() != \
            (tmp_path / "s2" / "metrics.csv").read_bytes()

    @pytest.mark.filterwarnings("ignore::RuntimeWarning")
    def test_nonfinite_data_exits_2(self, tmp_path, capsys):
        cfg = write_tiny_config(tmp_path)
        main(["gen-data", "--config", cfg, "--out", str(tmp_path / "d")])
        train_csv = tmp_path / "d" / "train.csv"
        lines = train_csv.read_text().split("\n")
        cells = lines[1].split(",")
        cells[0] = "inf"
        lines[1] = ",".join(cells)
        train_csv.write_text("\n".join(lines))
        code = main(["train", "--config", cfg, "--out", str(tmp_path / "r"),
                     "--data", str(tmp_path / "d")])
        assert code == 2
        assert "non-finite" in capsys.readouterr().err


class TestAblateAndSweep:
    def test_ablation_csv_row_count(self, tmp_path):
        cfg = write_tiny_config(tmp_path)
        out = tmp_path / "ab"
        assert main(["ablate", "--config", cfg, "--seeds", "1,2,3",
                     "--out", str(out)]) == 0
        lines = (out / "ablation.csv").read_text().strip().split("\n")
        assert len(lines) == 1 + 9 + 3
        assert (out / "ablation.png").exists()

    def test_missing_seeds_is_usage_error(self, tmp_path, capsys):
        cfg = write_tiny_config(tmp_path)
        with pytest.raises(SystemExit) as err:
            main(["ablate", "--config", cfg, "--out", str(tmp_path / "x")])
        assert err.value.code == 64

    def test_too_few_seeds_exit_64(self, tmp_path):
        cfg = write_tiny_config(tmp_path)
        assert main(["ablate", "--config", cfg, "--seeds", "1,2",
                     "--out", str(tmp_path / "x")]) == 64

    def test_sweep_outputs(self, tmp_path):
        cfg = write_tiny_config(tmp_path)
        out = tmp_path / "sw"
        assert main(["sweep", "--config", cfg, "--param", "sigma",
                     "--values", "1,3", "--seeds", "1,2", "--out", str(out)]) == 0
        lines = (out / "sweep_sigma.csv").read_text().strip().split("\n")
        assert lines[0] == "sigma,seed,overall_acc,avg_class_acc"
        assert len(lines) == 1 + 2 * 3
        assert (out / "sweep_sigma.png").exists()


class TestAnalyze:
    def test_synthetic_prints_strong_coefficient(self, tmp_path, capsys):
        out = tmp_path / "c"
        assert main(["analyze", "--synthetic", "-n", "2000", "--out", str(out)]) == 0
        printed = capsys.readouterr().out
        rho = float(printed.rsplit("=", 1)[1].split()[0])
        assert rho >= 0.9
        pairs = (out / "correlation.csv").read_text().strip().split("\n")
        assert len(pairs) == 1 + 2000
        assert (out / "correlation.png").exists()

    def test_small_n_is_usage_error(self, tmp_path):
        assert main(["analyze", "--synthetic", "-n", "50",
                     "--out", str(tmp_path / "c")]) == 64

    def test_requires_exactly_one_source(self, tmp_path):
        assert main(["analyze", "--out", str(tmp_path / "c")]) == 64

    def test_trained_state_source(self, tmp_path, capsys):
        cfg = write_tiny_config(tmp_path)
        main(["train", "--config", cfg, "--out", str(tmp_path / "r")])
        capsys.readouterr()
        code = main(["analyze", "--state", str(tmp_path / "r" / "state.npz"),
                     "--config", cfg, "-n", "100", "--out", str(tmp_path / "c")])
        assert code == 0
        assert "spearman" in capsys.readouterr().out

    def test_state_source_without_config_uses_embedded(self, tmp_path, capsys):
        cfg = write_tiny_config(tmp_path)
        main(["train", "--config", cfg, "--out", str(tmp_path / "r")])
        capsys.readouterr()
        code = main(["analyze", "--state", str(tmp_path / "r" / "state.npz"),
                     "-n", "100", "--out", str(tmp_path / "c")])
        assert code == 0
        assert "spearman" in capsys.readouterr().out
        # the echoed config proves the embedded data spec was used (k = 4)
        echoed = json.loads((tmp_path / "c" / "config.json").read_text())
        assert echoed["data"]["k"] == 4

    def test_deterministic_pairs_csv(self, tmp_path):
        main(["analyze", "--synthetic", "-n", "500", "--out", str(tmp_path / "c1")])
        main(["analyze", "--synthetic", "-n", "500", "--out", str(tmp_path / "c2")])
        assert (tmp_path / "c1" / "correlation.csv").read_bytes() == \
            (tmp_path / "c2" / "correlation.csv").read_bytes()


class TestUsage:
    def test_unknown_command(self):
        with pytest.raises(SystemExit) as err:
            main(["frobnicate"])
        assert err.value.code == 64

    def test_missing_config_file(self, tmp_path):
        assert main(["train", "--config", str(tmp_path / "nope.json"),
                     "--out", str(tmp_path / "x")]) == 64
