"""The ``fairthresh`` command: ingest, audit, train, frontier, oracle-check.

Configuration is one JSON document passed via ``--config``; command-line
flags override individual fields.  Schema::

    {
      "dataset": {
        "path": "data.csv",          # UTF-8 CSV with a header row
        "target": "label",           # binary 0/1 column
        "sensitive": ["race", "gender"],   # ordered; values coded by sorted order
        "features": ["age", "hours"],      # optional; default: all other columns
        "categorical": ["workclass"]       # features to one-hot (reference level
      },                                   #   = first sorted value, dropped)
      "fairness": {"notion": "DP", "measure": "MD", "delta": 0.05,
                   "mode": "intersectional"},
      "pipeline": {"cost": 0.5, "attribute_mode": "blind", "alpha": 0.0,
                   "joint_strategy": "factored", "warm_start_inprocess": true,
                   "grid": {"points_per_axis": 21, "bound": 1.0,
                            "lhs_points": 2000, "eodds_points_per_axis": 11},
                   "estimation": {"learning_rate": 0.1, "epochs": 500,
                                  "l2": 1e-4, "clip": 1e-6}},
      "seed": 0,
      "output_dir": "out"
    }

Subcommands:

- ``audit``        disparity report for supplied predictions (JSON out)
- ``postprocess``  plug-in training; writes classifier record + test metrics
- ``fit``          in-processing training; same outputs
- ``frontier``     evaluates the multiplier grid; writes CSV + JSON
- ``oracle-check`` runs the verification suite; machine-readable report

The frontier CSV column order is fixed: lambda_1..lambda_M (or
lambda_eo_*/lambda_pe_* for the composite notion), accuracy, cs_risk,
fairness_value, split.

Exit codes: 0 success; 1 usage/config error; 2 data error; 3 infeasibility
(no multiplier met the tolerance); 4 oracle-check failure.  Failures print
a structured JSON error record to stderr.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .core import Dataset, FairnessDomainError, FairnessSpec, SensitiveSpec, project_feature, rowwise_distribution
from .estimation import FitConfig
from .measures import empirical_report, symmetrized
from .core import RandomizedClassifier
from .pipeline import (
    FrontierPoint,
    GridSpec,
    NoFeasibleLambda,
    PipelineConfig,
    classifier_to_record,
    derive_seeds,
    evaluate_predictions,
    fit_components,
    frontier,
    inprocess,
    lambda_labels,
    postprocess,
    predict_dataset,
    select_lambda,
    split_dataset,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INFEASIBLE = 3
EXIT_ORACLE = 4


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


# ---------------------------------------------------------------------------
# CSV ingestion
# ---------------------------------------------------------------------------


def _read_csv(path: str) -> tuple[list[str], list[list[str]]]:
    p = Path(path)
    if not p.exists():
        raise DataError(f"dataset file not found: {path}")
    with p.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"empty CSV: {path}") from None
        rows = [row for row in reader if row]
    if not rows:
        raise DataError(f"CSV has a header but no data rows: {path}")
    return header, rows


def ingest(dataset_cfg: dict) -> tuple[Dataset, dict]:
    """Load a CSV into a Dataset per the config's dataset block.

    Returns the dataset plus ingestion metadata: the sensitive value codes,
    the expanded feature column names, and the categorical encodings.
    Errors carry (1-based data) row and column coordinates.
    """
    path = dataset_cfg.get("path")
    target = dataset_cfg.get("target")
    sensitive_cols = dataset_cfg.get("sensitive") or []
    if not path or not target or not sensitive_cols:
        raise UsageError("dataset config needs 'path', 'target' and a nonempty 'sensitive' list")
    header, rows = _read_csv(path)
    col_index = {name: i for i, name in enumerate(header)}
    for name in [target, *sensitive_cols]:
        if name not in col_index:
            raise DataError(f"column {name!r} not found in {path} (header: {header})")
    feature_cols = dataset_cfg.get("features")
    if feature_cols is None:
        feature_cols = [c for c in header if c != target and c not in sensitive_cols]
    for name in feature_cols:
        if name not in col_index:
            raise DataError(f"feature column {name!r} not found in {path}")
    categorical = set(dataset_cfg.get("categorical") or [])
    unknown_cat = categorical - set(feature_cols)
    if unknown_cat:
        raise UsageError(f"categorical columns not among features: {sorted(unknown_cat)}")

    n = len(rows)
    labels = np.empty(n, dtype=int)
    for i, row in enumerate(rows):
        cell = row[col_index[target]].strip()
        if cell not in ("0", "1"):
            raise DataError(f"target column {target!r} must be 0/1; got {cell!r} at row {i + 1}")
        labels[i] = int(cell)

    sens_codes: dict[str, dict[str, int]] = {}
    sensitive = np.empty((n, len(sensitive_cols)), dtype=int)
    features_spec = []
    for k, name in enumerate(sensitive_cols):
        values = [row[col_index[name]].strip() for row in rows]
        levels = sorted(set(values))
        if len(levels) < 2:
            raise DataError(f"sensitive column {name!r} has fewer than 2 distinct values")
        code = {v: j + 1 for j, v in enumerate(levels)}
        sens_codes[name] = code
        sensitive[:, k] = [code[v] for v in values]
        features_spec.append((name, len(levels)))
    spec = SensitiveSpec(features=tuple(features_spec), mode=dataset_cfg.get("mode", "intersectional"))

    columns: list[str] = []
    blocks: list[np.ndarray] = []
    encodings: dict[str, list[str]] = {}
    for name in feature_cols:
        raw = [row[col_index[name]].strip() for row in rows]
        if name in categorical:
            levels = sorted(set(raw))
            encodings[name] = levels
            for level in levels[1:]:  # reference level = first sorted value
                columns.append(f"{name}={level}")
                blocks.append(np.array([1.0 if v == level else 0.0 for v in raw]))
        else:
            vals = np.empty(n)
            for i, v in enumerate(raw):
                try:
                    vals[i] = float(v)
                except ValueError:
                    raise DataError(
                        f"cannot parse numeric cell in column {name!r} at row {i + 1}: {v!r}"
                    ) from None
            columns.append(name)
            blocks.append(vals)
    if not blocks:
        raise UsageError("no feature columns left after excluding target and sensitive columns")
    x = np.stack(blocks, axis=1)
    dataset = Dataset(features=x, sensitive=sensitive, labels=labels, spec=spec)
    meta = {"feature_columns": columns, "sensitive_codes": sens_codes, "categorical_levels": encodings}
    return dataset, meta


# ---------------------------------------------------------------------------
# Config plumbing
# ---------------------------------------------------------------------------


def load_config(args: argparse.Namespace) -> dict:
    cfg: dict = {}
    if getattr(args, "config", None):
        p = Path(args.config)
        if not p.exists():
            raise UsageError(f"config file not found: {args.config}")
        try:
            cfg = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise UsageError(f"config is not valid JSON: {exc}") from None
    for flag, path in (
        ("data", ("dataset", "path")),
        ("target", ("dataset", "target")),
        ("notion", ("fairness", "notion")),
        ("measure", ("fairness", "measure")),
        ("delta", ("fairness", "delta")),
        ("cost", ("pipeline", "cost")),
        ("attribute_mode", ("pipeline", "attribute_mode")),
        ("seed", ("seed",)),
        ("output_dir", ("output_dir",)),
    ):
        val = getattr(args, flag, None)
        if val is not None:
            node = cfg
            for key in path[:-1]:
                node = node.setdefault(key, {})
            node[path[-1]] = val
    if getattr(args, "sensitive", None):
        cfg.setdefault("dataset", {})["sensitive"] = [s.strip() for s in args.sensitive.split(",")]
    return cfg


def pipeline_config(cfg: dict) -> PipelineConfig:
    fair = cfg.get("fairness", {})
    pipe = cfg.get("pipeline", {})
    grid = pipe.get("grid", {})
    est = pipe.get("estimation", {})
    try:
        return PipelineConfig(
            notion=fair.get("notion", "DP"),
            measure=fair.get("measure", "MD"),
            delta=float(fair.get("delta", 0.05)),
            cost=float(pipe.get("cost", 0.5)),
            attribute_mode=pipe.get("attribute_mode", "blind"),
            alpha=float(pipe.get("alpha", 0.0)),
            grid=GridSpec(
                points_per_axis=int(grid.get("points_per_axis", 21)),
                bound=float(grid.get("bound", 1.0)),
                dense_max_groups=int(grid.get("dense_max_groups", 3)),
                lhs_points=int(grid.get("lhs_points", 2000)),
                eodds_points_per_axis=int(grid.get("eodds_points_per_axis", 11)),
            ),
            estimation=FitConfig(
                learning_rate=float(est.get("learning_rate", 0.1)),
                epochs=int(est.get("epochs", 500)),
                l2=float(est.get("l2", 1e-4)),
                clip=float(est.get("clip", 1e-6)),
            ),
            joint_strategy=pipe.get("joint_strategy", "factored"),
            warm_start_inprocess=bool(pipe.get("warm_start_inprocess", True)),
            master_seed=int(cfg.get("seed", 0)),
        )
    except FairnessDomainError as exc:
        raise UsageError(str(exc)) from None


def fairness_spec(cfg: dict) -> FairnessSpec:
    fair = cfg.get("fairness", {})
    try:
        return FairnessSpec(
            notion=fair.get("notion", "DP"),
            measure=fair.get("measure", "MD"),
            delta=float(fair.get("delta", 0.05)),
            group_mode=cfg.get("dataset", {}).get("mode", "intersectional"),
        )
    except FairnessDomainError as exc:
        raise UsageError(str(exc)) from None


def _output_dir(cfg: dict) -> Path:
    out = Path(cfg.get("output_dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_audit(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    dataset, meta = ingest(cfg.get("dataset", {}))
    spec = fairness_spec(cfg)
    preds = _load_predictions(args, cfg, dataset)
    if spec.group_mode == "independent":
        payload = _independent_audit(preds, dataset, spec)
    else:
        payload = empirical_report(preds, dataset, spec).to_dict()
    payload["n_rows"] = dataset.n_rows
    payload["sensitive_codes"] = meta["sensitive_codes"]
    text = json.dumps(payload, indent=2, sort_keys=True)
    if getattr(args, "output", None):
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    print(text)
    return EXIT_OK


def _independent_audit(preds: np.ndarray, dataset: Dataset, spec: FairnessSpec) -> dict:
    """One symmetrized report per sensitive feature over its own groups."""
    dist = rowwise_distribution(dataset)
    clf = RandomizedClassifier(np.asarray(preds, dtype=float))
    per_feature = {}
    values = []
    for k, (name, _) in enumerate(dataset.spec.features):
        sub = project_feature(dist, dataset.spec, k)
        rep = symmetrized(clf, sub, FairnessSpec(notion=spec.notion, measure=spec.measure, delta=spec.delta))
        per_feature[name] = rep.to_dict()
        values.append(rep.value)
    worst = max(values) if spec.measure == "MD" else min(values)
    satisfied = all(per_feature[n]["satisfied"] for n in per_feature)
    return {
        "notion": spec.notion,
        "measure": spec.measure,
        "delta": spec.delta,
        "mode": "independent",
        "value": worst,
        "satisfied": satisfied,
        "per_feature": per_feature,
    }


def _load_predictions(args: argparse.Namespace, cfg: dict, dataset: Dataset) -> np.ndarray:
    column = getattr(args, "prediction_column", None)
    path = getattr(args, "predictions", None)
    if (column is None) == (path is None):
        raise UsageError("audit needs exactly one of --predictions or --prediction-column")
    if column is not None:
        header, rows = _read_csv(cfg["dataset"]["path"])
        if column not in header:
            raise DataError(f"prediction column {column!r} not found")
        j = header.index(column)
        raw = [row[j].strip() for row in rows]
    else:
        p = Path(path)
        if not p.exists():
            raise DataError(f"predictions file not found: {path}")
        raw = [line.strip() for line in p.read_text(encoding="utf-8").splitlines() if line.strip()]
        if raw and raw[0].lower() in ("prediction", "pred", "p"):
            raw = raw[1:]
    if len(raw) != dataset.n_rows:
        raise DataError(f"got {len(raw)} predictions for {dataset.n_rows} rows")
    out = np.empty(len(raw))
    for i, v in enumerate(raw):
        try:
            out[i] = float(v)
        except ValueError:
            raise DataError(f"cannot parse prediction at row {i + 1}: {v!r}") from None
    if (out < 0).any() or (out > 1).any():
        raise DataError("predictions must be probabilities or 0/1 labels")
    return out


def _parse_lam(text: str, want: int) -> np.ndarray:
    try:
        vals = np.array([float(v) for v in text.split(",")], dtype=float)
    except ValueError:
        raise UsageError(f"cannot parse --lam {text!r}") from None
    if vals.shape != (want,):
        raise UsageError(f"--lam needs {want} comma-separated values, got {vals.size}")
    return vals


def _train_command(args: argparse.Namespace, method: str) -> int:
    cfg = load_config(args)
    dataset, meta = ingest(cfg.get("dataset", {}))
    pcfg = pipeline_config(cfg)
    seeds = derive_seeds(pcfg.master_seed)
    train, tune, test = split_dataset(dataset, seed=seeds["split"])
    components = fit_components(train, pcfg)
    builder = postprocess if method == "postprocess" else inprocess
    want = len(lambda_labels(pcfg, components.n_groups))
    selected_from = None
    if getattr(args, "lam", None):
        lam = _parse_lam(args.lam, want)
    else:
        points = frontier(train, tune, pcfg, method, components=components)
        chosen = select_lambda(points, pcfg.delta, pcfg.measure)
        lam = np.array(chosen.lam)
        selected_from = {"tune_fairness": chosen.fairness_value, "tune_risk": chosen.cs_risk}
    clf = builder(train, lam, pcfg, components=components)
    preds = predict_dataset(clf, test, pcfg.attribute_mode, rng=np.random.default_rng(seeds["ties"]))
    acc, risk, report = evaluate_predictions(preds, test, pcfg)
    out = _output_dir(cfg)
    record = classifier_to_record(clf)
    _write_json(out / f"{method}_classifier.json", record)
    metrics = {
        "method": method,
        "lam": lam.tolist(),
        "test_accuracy": acc,
        "test_cs_risk": risk,
        "test_fairness": report.to_dict(),
        "selection": selected_from,
        "splits": {"train": train.n_rows, "tune": tune.n_rows, "test": test.n_rows},
        "feature_columns": meta["feature_columns"],
    }
    _write_json(out / f"{method}_metrics.json", metrics)
    print(json.dumps(metrics, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_postprocess(args: argparse.Namespace) -> int:
    return _train_command(args, "postprocess")


def cmd_fit(args: argparse.Namespace) -> int:
    return _train_command(args, "inprocess")


def frontier_csv_rows(points: list[FrontierPoint]) -> tuple[list[str], list[list[str]]]:
    """Fixed column order: lambda columns, accuracy, cs_risk, fairness_value, split."""
    if not points:
        raise FairnessDomainError("empty frontier")
    labels = list(points[0].lam_labels)
    header = labels + ["accuracy", "cs_risk", "fairness_value", "split"]
    rows = []
    for p in points:
        rows.append(
            [str(v) for v in p.lam]
            + [str(p.accuracy), str(p.cs_risk), str(p.fairness_value), p.split]
        )
    return header, rows


def cmd_frontier(args: argparse.Namespace) -> int:
    cfg = load_config(args)
    dataset, _ = ingest(cfg.get("dataset", {}))
    pcfg = pipeline_config(cfg)
    seeds = derive_seeds(pcfg.master_seed)
    train, tune, test = split_dataset(dataset, seed=seeds["split"])
    points = frontier(train, tune, pcfg, args.method, test=test)
    out = _output_dir(cfg)
    header, rows = frontier_csv_rows(points)
    csv_path = out / f"frontier_{args.method}.csv"
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    _write_json(out / f"frontier_{args.method}.json", {"points": [p.to_row() for p in points]})
    summary = {
        "method": args.method,
        "points": len(points),
        "csv": str(csv_path),
        "best_tune_fairness": min(
            (p.fairness_value for p in points if p.split == "tune"),
            default=None,
        )
        if pcfg.measure == "MD"
        else max((p.fairness_value for p in points if p.split == "tune"), default=None),
    }
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_oracle_check(args: argparse.Namespace) -> int:
    from .oracle import run_property_suite

    results = run_property_suite(instances=args.instances, seed=args.seed)
    payload = {"instances": args.instances, "seed": args.seed, "properties": [r.to_dict() for r in results]}
    payload["passed"] = all(r.passed for r in results)
    text = json.dumps(payload, indent=2, sort_keys=True)
    if getattr(args, "output", None):
        Path(args.output).write_text(text + "\n", encoding="utf-8")
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.name} (instances={r.instances}, failures={r.failures})")
    print(json.dumps({"passed": payload["passed"], "properties": len(results)}))
    if not payload["passed"]:
        return EXIT_ORACLE
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fairthresh", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--data", help="dataset CSV path (overrides config)")
        p.add_argument("--target", help="target column (overrides config)")
        p.add_argument("--sensitive", help="comma-separated sensitive columns (overrides config)")
        p.add_argument("--notion", choices=["DP", "EO", "PE", "AP", "EqualizedOdds"])
        p.add_argument("--measure", choices=["MD", "MR"])
        p.add_argument("--delta", type=float)
        p.add_argument("--cost", type=float)
        p.add_argument("--attribute-mode", dest="attribute_mode", choices=["blind", "aware"])
        p.add_argument("--seed", type=int)
        p.add_argument("--output-dir", dest="output_dir")

    p = sub.add_parser("audit", help="disparity report for supplied predictions")
    common(p)
    p.add_argument("--predictions", help="file with one prediction per row")
    p.add_argument("--prediction-column", dest="prediction_column", help="prediction column in the dataset CSV")
    p.add_argument("--output", help="also write the JSON report here")
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("postprocess", help="plug-in training (threshold correction)")
    common(p)
    p.add_argument("--lam", help="comma-separated multipliers; default: grid + selection")
    p.set_defaults(func=cmd_postprocess)

    p = sub.add_parser("fit", help="in-processing training (cost-sensitive reweighting)")
    common(p)
    p.add_argument("--lam", help="comma-separated multipliers; default: grid + selection")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("frontier", help="evaluate the multiplier grid")
    common(p)
    p.add_argument("--method", choices=["postprocess", "inprocess"], default="postprocess")
    p.set_defaults(func=cmd_frontier)

    p = sub.add_parser("oracle-check", help="run the verification suite")
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--output", help="write the JSON report here")
    p.set_defaults(func=cmd_oracle_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage problems
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        _emit_error("usage", exc)
        return EXIT_USAGE
    except NoFeasibleLambda as exc:
        _emit_error("infeasible", exc, closest=exc.closest.to_row())
        return EXIT_INFEASIBLE
    except DataError as exc:
        _emit_error("data", exc)
        return EXIT_DATA
    except FairnessDomainError as exc:
        _emit_error("domain", exc)
        return EXIT_DATA


def _emit_error(kind: str, exc: Exception, **extra: object) -> None:
    record = {"error": {"type": kind, "message": str(exc), **extra}}
    print(json.dumps(record, sort_keys=True), file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
