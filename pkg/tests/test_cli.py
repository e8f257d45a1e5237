"""CLI workflows: artifacts, manifests, determinism, error reporting."""
import json
import os
from pathlib import Path

import pytest

from quicktap.cli import run
from quicktap.store import read_model, read_trace


def run_ok(argv):
    assert run(argv) == 0


def tree_bytes(root: Path) -> dict:
    return {
        str(p.relative_to(root)): p.read_bytes()
        for p in sorted(root.rglob("*"))
        if p.is_file()
    }


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


class TestGen:
    def test_writes_traces_and_manifest(self, workdir):
        run_ok(["gen", "--out-dir", "traces", "--users", "2", "--taps", "30",
                "--seed", "3"])
        files = sorted(os.listdir("traces"))
        assert files == ["manifest.json", "user_00.trace.jsonl", "user_01.trace.jsonl"]
        header, samples = read_trace("traces/user_00.trace.jsonl")
        assert header.device_profile.value == "laptop"
        assert samples
        manifest = json.loads(Path("traces/manifest.json").read_text())
        assert manifest["subcommand"] == "gen"
        assert manifest["options"]["seed"] == 3


class TestTrainEval:
    def test_train_writes_model_and_report(self, workdir):
        run_ok(["gen", "--out-dir", "traces", "--users", "1", "--taps", "120",
                "--seed", "5"])
        run_ok(["train", "--traces", "traces", "--out-dir", "model",
                "--seed", "9", "--rounds", "2", "--cv-folds", "4"])
        model, meta = read_model("model/model.json")
        assert model.profile.value == "laptop"
        assert meta["rounds"] == 2
        assert len(meta["dataset_digest"]) == 64
        report = json.loads(Path("model/train_report.json").read_text())
        assert len(report["rounds"]) == 2

    def test_eval_writes_curves(self, workdir):
        run_ok(["gen", "--out-dir", "traces", "--users", "2", "--taps", "100",
                "--seed", "5"])
        run_ok(["eval", "--traces", "traces", "--out-dir", "eval",
                "--seed", "2", "--rounds", "1", "--cv-folds", "4",
                "--n-grid", "50,100"])
        lines = Path("eval/curves.csv").read_text().splitlines()
        assert lines[0] == "model_id,n_percent,subset_size,accuracy,precision,recall"
        ids = {ln.split(",")[0] for ln in lines[1:]}
        assert ids == {"user_00", "user_01", "general"}

    def test_eval_planted_data_is_perfect_at_top_10(self, workdir):
        run_ok(["gen", "--out-dir", "traces", "--users", "1", "--taps", "200",
                "--seed", "5"])
        run_ok(["eval", "--traces", "traces", "--out-dir", "eval",
                "--seed", "2", "--n-grid", "10,50,100"])
        lines = Path("eval/curves.csv").read_text().splitlines()
        top10 = next(ln for ln in lines[1:] if ln.split(",")[1] == "10.0")
        assert float(top10.split(",")[3]) == 1.0


class TestReplayCmd:
    def test_replay_and_degenerate_pat(self, workdir):
        # separation 0: scores hover near 0.5, so pat 0.99 waits on everything
        run_ok(["gen", "--out-dir", "traces", "--users", "1", "--taps", "100",
                "--seed", "5", "--separation", "0"])
        run_ok(["train", "--traces", "traces", "--out-dir", "model",
                "--seed", "9", "--rounds", "1", "--cv-folds", "4"])
        run_ok(["replay", "--traces", "traces", "--model", "model/model.json",
                "--out-dir", "replay", "--pat", "0.99"])
        model_doc = json.loads(Path("replay/user_00.model.json").read_text())
        base_doc = json.loads(Path("replay/user_00.baseline.json").read_text())
        assert model_doc["mean_single_latency_predictive_us"] == 500000.0
        assert base_doc["mean_single_latency_predictive_us"] == 500000.0
        comparison = json.loads(Path("replay/user_00.comparison.json").read_text())
        assert comparison["per_tap_delta_mean_us"] == 0.0

    def test_replay_with_planted_data_reduces_latency(self, workdir):
        run_ok(["gen", "--out-dir", "traces", "--users", "1", "--taps", "100",
                "--seed", "5"])
        run_ok(["train", "--traces", "traces", "--out-dir", "model",
                "--seed", "9", "--rounds", "1", "--cv-folds", "4"])
        run_ok(["replay", "--traces", "traces", "--model", "model/model.json",
                "--out-dir", "replay"])
        model_doc = json.loads(Path("replay/user_00.model.json").read_text())
        assert model_doc["mean_single_latency_predictive_us"] < 500000.0
        assert model_doc["mean_reduction_us"] > 0.0


class TestCurveCmd:
    def test_roc_tables(self, workdir):
        run_ok(["gen", "--out-dir", "traces", "--users", "1", "--taps", "100",
                "--seed", "5"])
        run_ok(["train", "--traces", "traces", "--out-dir", "model",
                "--seed", "9", "--rounds", "1", "--cv-folds", "4"])
        run_ok(["curve", "--traces", "traces", "--model", "model/model.json",
                "--out-dir", "curve", "--n-grid", "50,100"])
        lines = Path("curve/roc.csv").read_text().splitlines()
        assert lines[0] == "n_percent,threshold,fpr,tpr"
        summary = json.loads(Path("curve/roc_summary.json").read_text())
        assert set(summary["auc_by_n_percent"]) == {"50", "100"}
        assert "top-n%" in summary["note"]


class TestExportModel:
    def test_fixture_scores_match_model(self, workdir):
        run_ok(["gen", "--out-dir", "traces", "--users", "1", "--taps", "100",
                "--seed", "5"])
        run_ok(["train", "--traces", "traces", "--out-dir", "model",
                "--seed", "9", "--rounds", "1", "--cv-folds", "4"])
        run_ok(["export-model", "--model", "model/model.json",
                "--out-dir", "export", "--seed", "11", "--count", "20"])
        import numpy as np
        from quicktap.classifier import score_matrix

        model, _ = read_model("export/model.json")
        fixture = json.loads(Path("export/score_fixture.json").read_text())
        assert len(fixture["entries"]) == 20
        for entry in fixture["entries"]:
            s = float(score_matrix(model, np.array([entry["values"]]))[0])
            assert s == pytest.approx(entry["score"], abs=1e-12)


class TestStatsCmd:
    def test_pairwise_table(self, workdir):
        Path("data.csv").write_text(
            "group,value\n" +
            "".join(f"a,{v}\n" for v in [1, 2, 3, 4, 5]) +
            "".join(f"b,{v}\n" for v in [6, 7, 8, 9, 10]) +
            "".join(f"c,{v}\n" for v in [1, 1, 2, 2, 3])
        )
        run_ok(["stats", "--csv", "data.csv", "--group-col", "group",
                "--value-col", "value", "--out-dir", "stats"])
        lines = Path("stats/stats.csv").read_text().splitlines()
        assert lines[0].startswith("group_a,group_b")
        assert len(lines) == 4  # header + 3 pairs


class TestDeterminismAndErrors:
    def test_pipeline_is_byte_identical(self, tmp_path, monkeypatch):
        results = []
        for name in ("run1", "run2"):
            root = tmp_path / name
            root.mkdir()
            monkeypatch.chdir(root)
            run_ok(["gen", "--out-dir", "traces", "--users", "1", "--taps", "80",
                    "--seed", "5"])
            run_ok(["train", "--traces", "traces", "--out-dir", "model",
                    "--seed", "9", "--rounds", "1", "--cv-folds", "4"])
            run_ok(["eval", "--traces", "traces", "--out-dir", "eval",
                    "--seed", "2", "--rounds", "1", "--cv-folds", "4",
                    "--n-grid", "50,100"])
            run_ok(["replay", "--traces", "traces", "--model", "model/model.json",
                    "--out-dir", "replay"])
            results.append(tree_bytes(root))
        assert results[0] == results[1]

    def test_missing_trace_is_machine_parseable_error(self, workdir, capsys):
        code = run(["train", "--traces", "nope", "--out-dir", "model", "--seed", "1"])
        assert code == 1
        err = capsys.readouterr().err.strip()
        doc = json.loads(err)
        assert doc["error"] == "ConfigError"
        assert "nope" in doc["message"]

    def test_bad_model_file_error(self, workdir, capsys):
        Path("bad.json").write_text("{}")
        Path("t").mkdir()
        code = run(["curve", "--traces", "t", "--model", "bad.json",
                    "--out-dir", "c"])
        assert code == 1
        doc = json.loads(capsys.readouterr().err.strip())
        assert doc["error"] in ("SchemaError", "ConfigError")
