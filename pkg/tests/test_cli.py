import csv
import json
from pathlib import Path

import numpy as np
import pytest

from fairthresh.cli import DataError, UsageError, ingest, main
from fairthresh.core import FairnessSpec
from fairthresh.measures import empirical_report
from fairthresh.pipeline import classifier_from_record, synthetic_dataset


def write_csv(path: Path, header, rows):
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def synthetic_csv(path: Path, n=1600, seed=5):
    ds = synthetic_dataset(n, seed=seed)
    rows = [
        [ds.features[i, 0], ds.features[i, 1], "AB"[ds.sensitive[i, 0] - 1], ds.labels[i]]
        for i in range(ds.n_rows)
    ]
    write_csv(path, ["x1", "x2", "grp", "label"], rows)
    return ds


def base_config(tmp_path: Path, data_path: Path, **overrides):
    cfg = {
        "dataset": {"path": str(data_path), "target": "label", "sensitive": ["grp"]},
        "fairness": {"notion": "DP", "measure": "MD", "delta": 0.08},
        "pipeline": {"estimation": {"epochs": 80}, "grid": {"points_per_axis": 7}},
        "seed": 3,
        "output_dir": str(tmp_path / "out"),
    }
    for k, v in overrides.items():
        cfg[k] = v
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return path, cfg


class TestIngest:
    def test_three_row_file(self, tmp_path):
        p = tmp_path / "d.csv"
        write_csv(p, ["a", "s", "label"], [[1.0, "x", 0], [2.0, "y", 1], [3.0, "x", 1]])
        ds, meta = ingest({"path": str(p), "target": "label", "sensitive": ["s"]})
        assert ds.n_rows == 3
        assert ds.n_features == 1
        assert meta["sensitive_codes"]["s"] == {"x": 1, "y": 2}

    def test_non_binary_target_names_cell(self, tmp_path):
        p = tmp_path / "d.csv"
        write_csv(p, ["a", "s", "label"], [[1.0, "x", 0], [2.0, "y", 2]])
        with pytest.raises(DataError, match="row 2"):
            ingest({"path": str(p), "target": "label", "sensitive": ["s"]})

    def test_unparseable_numeric_names_coordinates(self, tmp_path):
        p = tmp_path / "d.csv"
        write_csv(p, ["a", "s", "label"], [[1.0, "x", 0], ["oops", "y", 1]])
        with pytest.raises(DataError, match="'a' at row 2"):
            ingest({"path": str(p), "target": "label", "sensitive": ["s"]})

    def test_missing_column(self, tmp_path):
        p = tmp_path / "d.csv"
        write_csv(p, ["a", "label"], [[1.0, 0]])
        with pytest.raises(DataError, match="'race'"):
            ingest({"path": str(p), "target": "label", "sensitive": ["race"]})

    def test_one_hot_reference_level_dropped(self, tmp_path):
        p = tmp_path / "d.csv"
        write_csv(
            p,
            ["age", "job", "s", "label"],
            [[30, "blue", "x", 0], [40, "green", "y", 1], [50, "red", "x", 1]],
        )
        ds, meta = ingest(
            {"path": str(p), "target": "label", "sensitive": ["s"], "categorical": ["job"]}
        )
        assert meta["feature_columns"] == ["age", "job=green", "job=red"]
        assert ds.features.shape == (3, 3)

    def test_two_sensitive_features_compose_four_groups(self, tmp_path):
        # same shape as a recidivism benchmark: race and gender give M = 4
        p = tmp_path / "d.csv"
        rng = np.random.default_rng(0)
        rows = []
        for i in range(40):
            rows.append(
                [*(rng.normal(size=7)), "ab"[i % 2], "cd"[(i // 2) % 2], int(rng.random() < 0.5)]
            )
        write_csv(p, [f"f{j}" for j in range(7)] + ["race", "gender", "label"], rows)
        ds, _ = ingest({"path": str(p), "target": "label", "sensitive": ["race", "gender"]})
        assert ds.spec.n_groups == 4
        assert ds.n_features == 7
        assert set(ds.groups.tolist()) == {1, 2, 3, 4}

    def test_empty_csv(self, tmp_path):
        p = tmp_path / "d.csv"
        p.write_text("a,s,label\n")
        with pytest.raises(DataError):
            ingest({"path": str(p), "target": "label", "sensitive": ["s"]})


class TestAudit:
    def test_matches_measures_module(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        ds = synthetic_csv(data, n=900)
        preds = (ds.features[:, 1] > 0).astype(float)
        pred_file = tmp_path / "preds.txt"
        pred_file.write_text("\n".join(str(v) for v in preds))
        cfg_path, _ = base_config(tmp_path, data)
        code = main(["audit", "--config", str(cfg_path), "--predictions", str(pred_file)])
        assert code == 0
        got = json.loads(capsys.readouterr().out)
        spec = FairnessSpec(notion="DP", measure="MD", delta=0.08)
        want = empirical_report(preds, ds, spec).to_dict()
        assert got["value"] == pytest.approx(want["value"], abs=1e-12)
        assert got["satisfied"] == want["satisfied"]

    def test_prediction_column(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        ds = synthetic_dataset(300, seed=8)
        rows = [
            [ds.features[i, 0], ds.features[i, 1], "AB"[ds.sensitive[i, 0] - 1], ds.labels[i], ds.labels[i]]
            for i in range(ds.n_rows)
        ]
        write_csv(data, ["x1", "x2", "grp", "label", "pred"], rows)
        cfg_path, _ = base_config(tmp_path, data)
        code = main(
            ["audit", "--config", str(cfg_path), "--prediction-column", "pred", "--notion", "AP"]
        )
        assert code == 0
        got = json.loads(capsys.readouterr().out)
        assert got["value"] == pytest.approx(0.0, abs=1e-12)  # predictions equal labels

    def test_independent_mode_reports_per_feature(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        rng = np.random.default_rng(4)
        rows = []
        for i in range(400):
            rows.append([rng.normal(), "ab"[i % 2], "cd"[(i // 3) % 2], int(rng.random() < 0.5)])
        write_csv(data, ["x", "s1", "s2", "label"], rows)
        cfg = {
            "dataset": {"path": str(data), "target": "label", "sensitive": ["s1", "s2"], "mode": "independent"},
            "fairness": {"notion": "DP", "measure": "MD", "delta": 0.05},
        }
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps(cfg))
        preds = tmp_path / "p.txt"
        preds.write_text("\n".join("1" for _ in range(400)))
        code = main(["audit", "--config", str(cfg_path), "--predictions", str(preds)])
        assert code == 0
        got = json.loads(capsys.readouterr().out)
        assert set(got["per_feature"]) == {"s1", "s2"}
        assert got["value"] == pytest.approx(0.0, abs=1e-12)

    def test_needs_exactly_one_prediction_source(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        synthetic_csv(data, n=200)
        cfg_path, _ = base_config(tmp_path, data)
        assert main(["audit", "--config", str(cfg_path)]) == 1


class TestTrainCommands:
    def test_postprocess_writes_and_round_trips(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        synthetic_csv(data, n=1600)
        cfg_path, cfg = base_config(tmp_path, data)
        code = main(["postprocess", "--config", str(cfg_path), "--lam", "0.2,-0.1"])
        assert code == 0
        out = Path(cfg["output_dir"])
        record = json.loads((out / "postprocess_classifier.json").read_text())
        clf = classifier_from_record(record)
        metrics = json.loads((out / "postprocess_metrics.json").read_text())
        assert metrics["lam"] == [0.2, -0.1]
        assert 0.0 <= metrics["test_accuracy"] <= 1.0
        probe = np.array([[0.5, -0.2], [-1.0, 1.0]])
        assert clf.classify(probe).shape == (2,)

    def test_fit_selects_when_lam_omitted(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        synthetic_csv(data, n=1600)
        cfg_path, cfg = base_config(tmp_path, data)
        code = main(["fit", "--config", str(cfg_path), "--delta", "0.2"])
        assert code == 0
        metrics = json.loads((Path(cfg["output_dir"]) / "inprocess_metrics.json").read_text())
        assert metrics["selection"]["tune_fairness"] <= 0.2

    def test_infeasible_delta_exits_three(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        synthetic_csv(data, n=1200)
        cfg_path, _ = base_config(tmp_path, data)
        code = main(["postprocess", "--config", str(cfg_path), "--delta", "0.0"])
        err = capsys.readouterr().err
        assert code == 3
        record = json.loads(err)
        assert record["error"]["type"] == "infeasible"
        assert "closest" in record["error"]


class TestFrontierCommand:
    def test_csv_deterministic_and_ordered(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        synthetic_csv(data, n=1200)
        cfg_path, cfg = base_config(tmp_path, data)
        assert main(["frontier", "--config", str(cfg_path), "--method", "postprocess"]) == 0
        out = Path(cfg["output_dir"]) / "frontier_postprocess.csv"
        first = out.read_bytes()
        header = first.decode().splitlines()[0].split(",")
        assert header == ["lambda_1", "lambda_2", "accuracy", "cs_risk", "fairness_value", "split"]
        assert main(["frontier", "--config", str(cfg_path), "--method", "postprocess"]) == 0
        assert out.read_bytes() == first

    def test_rows_cover_tune_and_test(self, tmp_path, capsys):
        data = tmp_path / "d.csv"
        synthetic_csv(data, n=1200)
        cfg_path, cfg = base_config(tmp_path, data)
        main(["frontier", "--config", str(cfg_path)])
        rows = list(csv.DictReader((Path(cfg["output_dir"]) / "frontier_postprocess.csv").open()))
        assert {r["split"] for r in rows} == {"tune", "test"}
        assert len(rows) == 2 * 7 * 7


class TestErrorPaths:
    def test_missing_config_file(self, capsys):
        assert main(["audit", "--config", "/nonexistent.json", "--predictions", "x"]) == 1

    def test_missing_data_file(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"dataset": {"path": "/nope.csv", "target": "y", "sensitive": ["s"]}}))
        preds = tmp_path / "p.txt"
        preds.write_text("1\n")
        assert main(["audit", "--config", str(cfg), "--predictions", str(preds)]) == 2

    def test_unknown_subcommand_is_usage_error(self, capsys):
        assert main(["explode"]) == 1


class TestOracleCheckCommand:
    def test_small_run_passes(self, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = main(["oracle-check", "--instances", "20", "--seed", "7", "--output", str(out)])
        assert code == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert all(l.startswith("PASS") for l in lines[:-1])
        report = json.loads(out.read_text())
        assert report["passed"] is True
        names = {p["name"] for p in report["properties"]}
        assert "ap_mr_sign_resolution" in names
        assert "eodds_normalization_resolution" in names


class TestOracleCheckDeterminism:
    def test_same_seed_same_report(self, tmp_path, capsys):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert main(["oracle-check", "--instances", "15", "--seed", "11", "--output", str(a)]) == 0
        assert main(["oracle-check", "--instances", "15", "--seed", "11", "--output", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
