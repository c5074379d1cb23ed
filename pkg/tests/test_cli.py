import json

import pytest
from click.testing import CliRunner

import pggp.selftest
from pggp.cli import main


@pytest.fixture
def runner():
    return CliRunner()


def synth(runner, path, generator="blobs", n=40, noise=1.0, seed=7, dim=2):
    result = runner.invoke(main, [
        "synth", "--generator", generator, "--n", str(n), "--dim", str(dim),
        "--noise", str(noise), "--seed", str(seed), "--out", str(path),
    ])
    assert result.exit_code == 0, result.output
    return path


def train(runner, data, model, extra=()):
    result = runner.invoke(main, [
        "train", "--data", str(data), "--out", str(model), "--seed", "11",
        "--chains", "3", "--steps", "2", *extra,
    ])
    assert result.exit_code == 0, result.output
    return model


class TestSynth:
    def test_writes_requested_number_of_lines(self, runner, tmp_path):
        path = synth(runner, tmp_path / "d.jsonl", n=200)
        assert len(path.read_text().strip().split("\n")) == 200

    def test_missing_out_is_usage_error(self, runner):
        result = runner.invoke(main, ["synth", "--generator", "blobs",
                                      "--n", "10", "--seed", "1"])
        assert result.exit_code == 2

    def test_rerun_identical_bytes(self, runner, tmp_path):
        p1 = synth(runner, tmp_path / "a.jsonl")
        p2 = synth(runner, tmp_path / "b.jsonl")
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_n_exits_1(self, runner, tmp_path):
        result = runner.invoke(main, [
            "synth", "--generator", "blobs", "--n", "1", "--seed", "1",
            "--out", str(tmp_path / "d.jsonl"),
        ])
        assert result.exit_code == 1


class TestTrain:
    def test_defaults_applied_and_kernel_frozen(self, runner, tmp_path):
        data = synth(runner, tmp_path / "d.jsonl")
        model_path = tmp_path / "m.json"
        result = runner.invoke(main, [
            "train", "--data", str(data), "--out", str(model_path), "--seed", "3",
        ])
        assert result.exit_code == 0, result.output
        doc = json.loads(model_path.read_text())
        # paper-style defaults when flags/config omit them
        assert doc["kernel"] == {"family": "rbf", "length_scale": 1.0,
                                 "output_scale": 8.0, "jitter": 6.4e-05}
        assert doc["provenance"]["train_config"]["gibbs"]["n_chains"] == 30
        assert doc["provenance"]["train_config"]["gibbs"]["n_steps"] == 10
        assert doc["provenance"]["train_config"]["batch_size"] == 16
        assert doc["provenance"]["train_config"]["learning_rate"] == 3e-3
        assert doc["provenance"]["train_config"]["trainable"] == "none"

    def test_seed_required(self, runner, tmp_path):
        data = synth(runner, tmp_path / "d.jsonl")
        result = runner.invoke(main, [
            "train", "--data", str(data), "--out", str(tmp_path / "m.json"),
        ])
        assert result.exit_code == 2

    def test_rerun_byte_identical_model(self, runner, tmp_path):
        data = synth(runner, tmp_path / "d.jsonl")
        m1 = train(runner, data, tmp_path / "m1.json")
        m2 = train(runner, data, tmp_path / "m2.json")
        assert m1.read_bytes() == m2.read_bytes()

    def test_config_file_with_flag_overrides(self, runner, tmp_path):
        data = synth(runner, tmp_path / "d.jsonl")
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({
            "seed": 5,
            "data": str(data),
            "out": str(tmp_path / "m.json"),
            "kernel": {"length_scale": 2.0},
            "gibbs": {"n_chains": 2, "n_steps": 1},
        }))
        result = runner.invoke(main, ["train", "--config", str(config),
                                      "--length-scale", "3.0"])
        assert result.exit_code == 0, result.output
        doc = json.loads((tmp_path / "m.json").read_text())
        assert doc["kernel"]["length_scale"] == 3.0  # flag beats config

    def test_training_log_written(self, runner, tmp_path):
        data = synth(runner, tmp_path / "d.jsonl")
        log = tmp_path / "log.jsonl"
        train(runner, data, tmp_path / "m.json", extra=["--log", str(log)])
        lines = [json.loads(l) for l in log.read_text().strip().split("\n")]
        assert len(lines) == 3  # 40 points / batch 16
        assert all("log_marginal" in rec for rec in lines)

    def test_missing_data_file_exits_1(self, runner, tmp_path):
        result = runner.invoke(main, [
            "train", "--data", str(tmp_path / "nope.jsonl"),
            "--out", str(tmp_path / "m.json"), "--seed", "1",
        ])
        assert result.exit_code == 1


class TestEval:
    def make_model(self, runner, tmp_path):
        data = synth(runner, tmp_path / "train.jsonl", generator="ranking_groups",
                     n=12, noise=0.1, dim=3)
        model = train(runner, data, tmp_path / "m.json")
        return data, model

    def test_metrics_and_reliability_outputs(self, runner, tmp_path):
        data, model = self.make_model(runner, tmp_path)
        metrics = tmp_path / "metrics.json"
        rel = tmp_path / "rel.csv"
        preds = tmp_path / "preds.jsonl"
        result = runner.invoke(main, [
            "eval", "--model", str(model), "--data", str(data),
            "--out-metrics", str(metrics), "--out-reliability", str(rel),
            "--out-predictions", str(preds),
        ])
        assert result.exit_code == 0, result.output
        summary = json.loads(result.output.strip().split("\n")[-1])
        assert set(summary) == {"r_at_1", "map", "ece", "n_groups", "n_items"}
        assert 0.0 <= summary["r_at_1"] <= 1.0
        assert 0.0 <= summary["ece"] <= 1.0
        assert summary["n_groups"] == 12
        assert summary["n_items"] == 120
        assert json.loads(metrics.read_text()) == summary
        assert rel.read_text().startswith("bin_low,bin_high,count")
        pred_rows = [json.loads(l) for l in preds.read_text().strip().split("\n")]
        assert len(pred_rows) == 120
        assert set(pred_rows[0]) == {"id", "group_id", "label", "mu_star",
                                     "sigma_star", "probability"}

    def test_rerun_metrics_byte_identical(self, runner, tmp_path):
        data, model = self.make_model(runner, tmp_path)
        outs = []
        for name in ("m1.json", "m2.json"):
            path = tmp_path / name
            result = runner.invoke(main, [
                "eval", "--model", str(model), "--data", str(data),
                "--out-metrics", str(path),
            ])
            assert result.exit_code == 0
            outs.append(path.read_bytes())
        assert outs[0] == outs[1]

    def test_restrict_rank1_changes_pool(self, runner, tmp_path):
        data, model = self.make_model(runner, tmp_path)
        r_all = runner.invoke(main, ["eval", "--model", str(model), "--data", str(data)])
        r_top = runner.invoke(main, ["eval", "--model", str(model), "--data", str(data),
                                     "--restrict-rank1"])
        assert r_all.exit_code == 0 and r_top.exit_code == 0
        # same ranking metrics, generally different calibration pool
        a = json.loads(r_all.output.strip().split("\n")[-1])
        b = json.loads(r_top.output.strip().split("\n")[-1])
        assert a["r_at_1"] == b["r_at_1"]

    def test_dim_mismatch_exits_1(self, runner, tmp_path):
        data, model = self.make_model(runner, tmp_path)
        other = synth(runner, tmp_path / "other.jsonl", dim=5)
        result = runner.invoke(main, ["eval", "--model", str(model),
                                      "--data", str(other)])
        assert result.exit_code == 1
        assert "dimension" in result.output

    def test_cross_dataset_same_dim_supported(self, runner, tmp_path):
        data, model = self.make_model(runner, tmp_path)
        shifted = synth(runner, tmp_path / "shifted.jsonl",
                        generator="ranking_groups", n=6, noise=0.3, seed=99, dim=3)
        result = runner.invoke(main, ["eval", "--model", str(model),
                                      "--data", str(shifted)])
        assert result.exit_code == 0, result.output

    def test_group_without_positive_exits_1_with_group_id(self, runner, tmp_path):
        data, model = self.make_model(runner, tmp_path)
        bad = tmp_path / "bad.jsonl"
        bad.write_text(json.dumps({
            "id": "x", "group_id": "lonely", "label": 0,
            "embedding": [0.0, 0.0, 0.0],
        }) + "\n")
        result = runner.invoke(main, ["eval", "--model", str(model), "--data", str(bad)])
        assert result.exit_code == 1
        assert "lonely" in result.output


class TestSelftest:
    def test_quick_run_passes(self, runner):
        result = runner.invoke(main, ["selftest", "--quick", "--seed", "0"])
        assert result.exit_code == 0, result.output
        report = json.loads(result.output)
        assert report["pass"] is True
        names = [c["name"] for c in report["checks"]]
        assert names == ["pg_moments", "augmentation_identity", "gradient_fidelity"]

    def test_biased_sampler_fails_moment_check(self, runner, monkeypatch):
        monkeypatch.setattr(pggp.selftest, "_PG_DRAW_BIAS", 0.1)
        result = runner.invoke(main, ["selftest", "--quick", "--seed", "0"])
        assert result.exit_code == 1
        report = json.loads(result.output)
        moments = next(c for c in report["checks"] if c["name"] == "pg_moments")
        assert moments["pass"] is False


def test_pg_selftest_entry_point(capsys, monkeypatch):
    from pggp.cli import pg_selftest_main
    monkeypatch.setattr("sys.argv", ["pg-selftest"])
    with pytest.raises(SystemExit) as exc:
        pg_selftest_main()
    assert exc.value.code == 0
    report = json.loads(capsys.readouterr().out)
    assert [c["name"] for c in report["checks"]] == ["pg_moments", "augmentation_identity"]
