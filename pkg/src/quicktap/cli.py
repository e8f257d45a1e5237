"""Command-line workflows: gen, train, eval, replay, curve, export-model,
and stats.

Every subcommand writes its artifacts into --out-dir plus a
manifest.json echoing the fully resolved configuration, and is
deterministic under --seed: two runs with the same arguments produce
byte-identical files. Failures exit nonzero with one machine-parseable
JSON error line on stderr.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import store
from .classifier import ModelWeights, ScoredTap, TrainConfig, score_matrix, train
from .confidence import ClassifyRule, accuracy_curve, roc_auc, top_n_extract
from .errors import ConfigError, QuickTapError
from .features import DeviceProfile, feature_matrix
from .replay import LatencyConfig, compare_reports, conventional_replay, replay
from .stats import cohens_d, mann_whitney_u
from .synth import SynthConfig, generate
from .taps import LabeledTap, TapRole, label_taps, segment_taps

DEFAULT_N_GRID = "10,20,30,40,50,60,70,80,90,100"


def _parse_grid(text: str) -> list[float]:
    try:
        grid = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise ConfigError(f"bad n-grid {text!r}: {e}") from e
    if not grid or any(not (0 < v <= 100) for v in grid):
        raise ConfigError(f"n-grid values must lie in (0, 100]: {text!r}")
    return grid


def _write_manifest(out_dir: Path, subcommand: str, options: dict) -> None:
    doc = {"subcommand": subcommand, "options": dict(sorted(options.items()))}
    (out_dir / "manifest.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n", encoding="utf-8"
    )


def _load_labeled(
    trace_paths: list[Path], threshold_us: int
) -> tuple[DeviceProfile, list[tuple[str, list[LabeledTap]]]]:
    """Read traces, segment, and label; all must share one device profile."""
    per_trace = []
    profile = None
    for p in sorted(trace_paths):
        header, samples = store.read_trace(p)
        if profile is None:
            profile = header.device_profile
        elif header.device_profile is not profile:
            raise ConfigError(
                f"trace {p} has profile {header.device_profile.value}, "
                f"expected {profile.value}"
            )
        taps = segment_taps(samples)
        name = p.name.removesuffix(".jsonl").removesuffix(".trace")
        per_trace.append((name, label_taps(taps, threshold_us)))
    if profile is None:
        raise ConfigError("no trace files given")
    return profile, per_trace


def _resolve_traces(args_traces: list[str]) -> list[Path]:
    paths: list[Path] = []
    for t in args_traces:
        p = Path(t)
        if p.is_dir():
            paths.extend(sorted(p.glob("*.trace.jsonl")))
        elif p.exists():
            paths.append(p)
        else:
            raise ConfigError(f"trace path does not exist: {t}")
    if not paths:
        raise ConfigError("no trace files found")
    return paths


def _dataset_digest(paths: list[Path]) -> str:
    h = hashlib.sha256()
    for p in sorted(paths):
        h.update(p.read_bytes())
    return h.hexdigest()


def _train_config(args) -> TrainConfig:
    cfg = TrainConfig(seed=args.seed)
    if args.rounds is not None:
        cfg = replace(cfg, rounds=args.rounds)
    if args.cv_folds is not None:
        cfg = replace(cfg, cv_folds=args.cv_folds)
    if args.cost_grid is not None:
        cfg = replace(cfg, cost_grid=tuple(float(c) for c in args.cost_grid.split(",")))
    return cfg


def _cmd_gen(args) -> None:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cfg = SynthConfig(
        users=args.users,
        taps_per_user=args.taps,
        single_fraction=args.single_fraction,
        profile=DeviceProfile(args.profile),
        seed=args.seed,
        separation=args.separation,
    )
    traces = generate(cfg)
    for tr in traces:
        header = store.TraceHeader(
            device_profile=cfg.profile,
            sampling_hz=cfg.effective_sampling_hz,
            surface_id=f"synth-user-{tr.user_id:02d}",
        )
        store.write_trace(out / f"user_{tr.user_id:02d}.trace.jsonl", header, list(tr.samples))
    _write_manifest(
        out,
        "gen",
        {
            "users": args.users,
            "taps": args.taps,
            "single_fraction": args.single_fraction,
            "profile": args.profile,
            "seed": args.seed,
            "separation": args.separation,
        },
    )


def _cmd_train(args) -> None:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = _resolve_traces(args.traces)
    profile, per_trace = _load_labeled(paths, args.double_tap_threshold_us)
    labeled = [lt for _, group in per_trace for lt in group]
    cfg = _train_config(args)
    model, report = train(labeled, profile, cfg, pat=args.pat)
    meta = {
        "seed": cfg.seed,
        "rounds": cfg.rounds,
        "cost": report.rounds[-1].cost,
        "dataset_digest": _dataset_digest(paths),
    }
    store.write_model(out / "model.json", model, meta)
    report_doc = {
        "schema_version": 1,
        "mean_test_accuracy": report.mean_test_accuracy,
        "mean_test_precision": report.mean_test_precision,
        "mean_test_recall": report.mean_test_recall,
        "rounds": [
            {
                "index": r.index,
                "cost": r.cost,
                "weights": [float(v) for v in r.w],
                "intercept": r.b,
                "train_accuracy": r.train_accuracy,
                "test_accuracy": r.test_accuracy,
                "test_precision": r.test_precision,
                "test_recall": r.test_recall,
            }
            for r in report.rounds
        ],
    }
    (out / "train_report.json").write_text(
        json.dumps(report_doc, indent=2, allow_nan=False) + "\n", encoding="utf-8"
    )
    _write_manifest(
        out,
        "train",
        {
            "traces": [str(p) for p in paths],
            "profile": profile.value,
            "seed": args.seed,
            "pat": args.pat,
            "rounds": cfg.rounds,
            "cv_folds": cfg.cv_folds,
            "cost_grid": list(cfg.cost_grid),
            "double_tap_threshold_us": args.double_tap_threshold_us,
        },
    )


def _cmd_eval(args) -> None:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = _resolve_traces(args.traces)
    profile, per_trace = _load_labeled(paths, args.double_tap_threshold_us)
    n_grid = _parse_grid(args.n_grid)
    rule = ClassifyRule.BY_PAT if args.rule == "pat" else ClassifyRule.BY_HALF
    cfg = _train_config(args)
    curves = []
    for name, labeled in per_trace:
        _, report = train(labeled, profile, cfg, pat=args.pat)
        scored = report.pooled_scored_test()
        curves.append((name, accuracy_curve(scored, n_grid, rule, pat=args.pat)))
    if len(per_trace) > 1:
        pooled = [lt for _, group in per_trace for lt in group]
        _, report = train(pooled, profile, cfg, pat=args.pat)
        curves.append(
            ("general", accuracy_curve(report.pooled_scored_test(), n_grid, rule, pat=args.pat))
        )
    store.write_curve_csv(out / "curves.csv", curves)
    _write_manifest(
        out,
        "eval",
        {
            "traces": [str(p) for p in paths],
            "profile": profile.value,
            "seed": args.seed,
            "pat": args.pat,
            "rule": args.rule,
            "n_grid": n_grid,
            "double_tap_threshold_us": args.double_tap_threshold_us,
        },
    )


def _latency_config(args, profile: DeviceProfile) -> LatencyConfig:
    cfg = LatencyConfig.for_profile(profile, args.double_tap_threshold_us)
    if args.sensing_us is not None:
        cfg = replace(cfg, sensing_latency_us=args.sensing_us)
    if args.inference_us is not None:
        cfg = replace(cfg, inference_latency_us=args.inference_us)
    return cfg


def _cmd_replay(args) -> None:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model, _ = store.read_model(args.model)
    if args.pat is not None:
        model = ModelWeights(
            w=model.w, b=model.b, scaler=model.scaler, profile=model.profile, pat=args.pat
        )
    paths = _resolve_traces(args.traces)
    profile, per_trace = _load_labeled(paths, args.double_tap_threshold_us)
    lat = _latency_config(args, profile)
    for name, labeled in per_trace:
        model_report = replay(labeled, model, lat, trace_profile=profile)
        base_report = conventional_replay(labeled, lat)
        store.write_replay_report(
            out / f"{name}.model.csv", out / f"{name}.model.json", model_report
        )
        store.write_replay_report(
            out / f"{name}.baseline.csv", out / f"{name}.baseline.json", base_report
        )
        comparison = compare_reports(model_report, base_report)
        (out / f"{name}.comparison.json").write_text(
            json.dumps(comparison.to_dict(), indent=2, allow_nan=False) + "\n",
            encoding="utf-8",
        )
    _write_manifest(
        out,
        "replay",
        {
            "traces": [str(p) for p in paths],
            "model": args.model,
            "profile": profile.value,
            "pat": args.pat,
            "double_tap_threshold_us": lat.double_tap_threshold_us,
            "sensing_us": lat.sensing_latency_us,
            "inference_us": lat.inference_latency_us,
        },
    )


def _cmd_curve(args) -> None:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model, _ = store.read_model(args.model)
    paths = _resolve_traces(args.traces)
    profile, per_trace = _load_labeled(paths, args.double_tap_threshold_us)
    if profile is not model.profile:
        raise ConfigError(
            f"model profile {model.profile.value} != trace profile {profile.value}"
        )
    n_grid = _parse_grid(args.n_grid)
    primary = [
        lt for _, group in per_trace for lt in group if lt.role is TapRole.PRIMARY
    ]
    X = feature_matrix([lt.tap for lt in primary], profile)
    scores = score_matrix(model, X)
    scored = [
        ScoredTap(tap_id=i, s=float(s), truth=lt.label)
        for i, (lt, s) in enumerate(zip(primary, scores))
    ]
    tables = []
    aucs = {}
    for n in n_grid:
        subset = top_n_extract(scored, n)
        points, auc = roc_auc(subset)
        tables.append((n, points))
        aucs[f"{n:g}"] = auc
    store.write_roc_csv(out / "roc.csv", tables)
    summary = {
        "schema_version": 1,
        "auc_by_n_percent": aucs,
        "note": (
            "each ROC table is computed independently on the top-n% "
            "most-confident subset of the scored taps"
        ),
    }
    (out / "roc_summary.json").write_text(
        json.dumps(summary, indent=2, allow_nan=False) + "\n", encoding="utf-8"
    )
    _write_manifest(
        out,
        "curve",
        {
            "traces": [str(p) for p in paths],
            "model": args.model,
            "n_grid": n_grid,
            "double_tap_threshold_us": args.double_tap_threshold_us,
        },
    )


def _cmd_export_model(args) -> None:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    model, meta = store.read_model(args.model)
    store.write_model(out / "model.json", model, meta)
    rng = np.random.Generator(np.random.PCG64(args.seed))
    d = model.profile.feature_count
    entries = []
    for _ in range(args.count):
        z = rng.normal(size=d)
        raw = model.scaler.means + model.scaler.stds * z
        s = float(score_matrix(model, raw.reshape(1, -1))[0])
        entries.append({"values": [float(v) for v in raw], "score": s})
    fixture = {"schema_version": 1, "profile": model.profile.value, "entries": entries}
    (out / "score_fixture.json").write_text(
        json.dumps(fixture, indent=2, allow_nan=False) + "\n", encoding="utf-8"
    )
    _write_manifest(
        out,
        "export-model",
        {"model": args.model, "seed": args.seed, "count": args.count},
    )


def _cmd_stats(args) -> None:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    lines = Path(args.csv).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ConfigError(f"empty stats input {args.csv}")
    header = [h.strip() for h in lines[0].split(",")]
    try:
        g_idx = header.index(args.group_col)
        v_idx = header.index(args.value_col)
    except ValueError as e:
        raise ConfigError(f"column not found in {args.csv}: {e}") from e
    groups: dict[str, list[float]] = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        cells = raw.split(",")
        try:
            groups.setdefault(cells[g_idx].strip(), []).append(float(cells[v_idx]))
        except (IndexError, ValueError) as e:
            raise ConfigError(f"{args.csv} line {lineno}: {e}") from e
    names = sorted(groups)
    if len(names) < 2:
        raise ConfigError("need at least two groups to compare")
    rows = ["group_a,group_b,n1,n2,u,z,p_two_sided,exact,tie_corrected,d,descriptor"]
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            a, b = groups[names[i]], groups[names[j]]
            u = mann_whitney_u(a, b)
            eff = cohens_d(a, b)
            rows.append(
                f"{names[i]},{names[j]},{u.n1},{u.n2},{u.u!r},{u.z!r},"
                f"{u.p_two_sided!r},{u.exact},{u.tie_corrected},"
                f"{eff.d!r},{eff.descriptor}"
            )
    (out / "stats.csv").write_text("\n".join(rows) + "\n", encoding="utf-8")
    _write_manifest(
        out,
        "stats",
        {"csv": args.csv, "group_col": args.group_col, "value_col": args.value_col},
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="quicktap",
        description="Tap-type prediction workflows: synthesize, train, evaluate, replay.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, traces=False, model=False, train_opts=False):
        p.add_argument("--out-dir", required=True, help="directory for artifacts + manifest")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--double-tap-threshold-us", type=int, default=500_000)
        if traces:
            p.add_argument(
                "--traces", nargs="+", required=True,
                help="trace files or directories of *.trace.jsonl",
            )
        if model:
            p.add_argument("--model", required=True, help="model JSON file")
        if train_opts:
            p.add_argument("--pat", type=float, default=0.65)
            p.add_argument("--rounds", type=int, default=None)
            p.add_argument("--cv-folds", type=int, default=None)
            p.add_argument("--cost-grid", default=None, help="comma-separated costs")

    p = sub.add_parser("gen", help="generate synthetic labeled traces")
    common(p)
    p.add_argument("--users", type=int, default=1)
    p.add_argument("--taps", type=int, default=400)
    p.add_argument("--single-fraction", type=float, default=0.5)
    p.add_argument("--profile", choices=["laptop", "smartphone"], default="laptop")
    p.add_argument("--separation", type=float, default=1.0)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("train", help="train a model on traces")
    common(p, traces=True, train_opts=True)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="accuracy/precision/recall vs top-n% tables")
    common(p, traces=True, train_opts=True)
    p.add_argument("--n-grid", default=DEFAULT_N_GRID)
    p.add_argument("--rule", choices=["half", "pat"], default="half")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("replay", help="latency replay: model vs conventional detector")
    common(p, traces=True, model=True)
    p.add_argument("--pat", type=float, default=None, help="override the model's threshold")
    p.add_argument("--sensing-us", type=int, default=None)
    p.add_argument("--inference-us", type=int, default=None)
    p.set_defaults(func=_cmd_replay)

    p = sub.add_parser("curve", help="ROC tables over top-n% subsets")
    common(p, traces=True, model=True)
    p.add_argument("--n-grid", default=DEFAULT_N_GRID)
    p.set_defaults(func=_cmd_curve)

    p = sub.add_parser("export-model", help="re-export a model plus a scoring fixture")
    common(p, model=True)
    p.add_argument("--count", type=int, default=100)
    p.set_defaults(func=_cmd_export_model)

    p = sub.add_parser("stats", help="pairwise U tests and effect sizes over groups")
    common(p)
    p.add_argument("--csv", required=True, help="input CSV with group and value columns")
    p.add_argument("--group-col", required=True)
    p.add_argument("--value-col", required=True)
    p.set_defaults(func=_cmd_stats)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except QuickTapError as e:
        sys.stderr.write(
            json.dumps({"error": type(e).__name__, "message": str(e)}) + "\n"
        )
        return 1
    return 0


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
