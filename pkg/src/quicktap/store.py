"""Versioned on-disk formats: traces, models, and report tables.

Traces are JSON Lines (one header object, then one sample per line) so
loggers can append while the file streams. Models are a single JSON
document with a fixed field order; report tables are CSV. Every float is
rendered by Python's shortest round-trip repr, so serialization is
deterministic and numerically lossless.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifier import ModelWeights
from .confidence import CurvePoint, RocPoint
from .errors import ConfigError, SchemaError
from .features import DeviceProfile, Scaler
from .replay import OutcomeCell, ReplayReport
from .taps import Phase, PowerSource, TouchSample

TRACE_SCHEMA_VERSION = 1
MODEL_SCHEMA_VERSION = 1

_SAMPLE_FIELDS = ("t_us", "x", "y", "contact_size", "phase", "power")


@dataclass(frozen=True)
class TraceHeader:
    device_profile: DeviceProfile
    sampling_hz: float
    surface_id: str
    schema_version: int = TRACE_SCHEMA_VERSION


def _dump(obj: dict) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def serialize_trace(header: TraceHeader, samples: list[TouchSample]) -> str:
    lines = [
        _dump(
            {
                "schema_version": header.schema_version,
                "device_profile": header.device_profile.value,
                "sampling_hz": header.sampling_hz,
                "surface_id": header.surface_id,
            }
        )
    ]
    for s in samples:
        lines.append(
            _dump(
                {
                    "t_us": s.t_us,
                    "x": s.x,
                    "y": s.y,
                    "contact_size": s.contact_size,
                    "phase": s.phase.value,
                    "power": s.power.value,
                }
            )
        )
    return "\n".join(lines) + "\n"


def write_trace(path, header: TraceHeader, samples: list[TouchSample]) -> None:
    Path(path).write_text(serialize_trace(header, samples), encoding="utf-8")


def parse_trace(text: str) -> tuple[TraceHeader, list[TouchSample]]:
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise SchemaError("missing trace header", line=1)
    try:
        head = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise SchemaError(f"header is not valid JSON: {e.msg}", line=1) from e
    if not isinstance(head, dict) or head.get("schema_version") != TRACE_SCHEMA_VERSION:
        raise SchemaError(
            f"unsupported trace schema_version {head.get('schema_version')!r}", line=1
        )
    try:
        header = TraceHeader(
            device_profile=DeviceProfile(head["device_profile"]),
            sampling_hz=float(head["sampling_hz"]),
            surface_id=str(head["surface_id"]),
        )
    except (KeyError, ValueError) as e:
        raise SchemaError(f"bad trace header: {e}", line=1) from e
    if header.sampling_hz <= 0:
        raise SchemaError("sampling_hz must be positive", line=1)
    samples: list[TouchSample] = []
    prev_t = None
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        try:
            rec = json.loads(raw)
        except json.JSONDecodeError as e:
            raise SchemaError(f"sample is not valid JSON: {e.msg}", line=lineno) from e
        missing = [f for f in _SAMPLE_FIELDS if f not in rec]
        if missing:
            raise SchemaError(f"sample missing fields {missing}", line=lineno)
        try:
            sample = TouchSample(
                t_us=int(rec["t_us"]),
                x=float(rec["x"]),
                y=float(rec["y"]),
                contact_size=float(rec["contact_size"]),
                phase=Phase(rec["phase"]),
                power=PowerSource(rec["power"]),
            )
        except ValueError as e:
            raise SchemaError(str(e), line=lineno) from e
        if prev_t is not None and sample.t_us < prev_t:
            raise SchemaError(
                f"timestamp {sample.t_us} regresses below {prev_t}", line=lineno
            )
        prev_t = sample.t_us
        samples.append(sample)
    return header, samples


def read_trace(path) -> tuple[TraceHeader, list[TouchSample]]:
    """Parse and validate a trace file; errors carry 1-based line numbers."""
    return parse_trace(Path(path).read_text(encoding="utf-8"))


def serialize_model(model: ModelWeights, train_meta: dict | None = None) -> str:
    doc = {
        "schema_version": MODEL_SCHEMA_VERSION,
        "profile": model.profile.value,
        "feature_names": list(model.profile.feature_names),
        "means": [float(v) for v in model.scaler.means],
        "stds": [float(v) for v in model.scaler.stds],
        "weights": [float(v) for v in model.w],
        "intercept": float(model.b),
        "pat": float(model.pat),
        "train_meta": dict(sorted((train_meta or {}).items())),
    }
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def write_model(path, model: ModelWeights, train_meta: dict | None = None) -> None:
    Path(path).write_text(serialize_model(model, train_meta), encoding="utf-8")


def parse_model(text: str) -> tuple[ModelWeights, dict]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(f"model file is not valid JSON: {e.msg}") from e
    if not isinstance(doc, dict) or doc.get("schema_version") != MODEL_SCHEMA_VERSION:
        raise SchemaError(
            f"unsupported model schema_version {doc.get('schema_version')!r}"
        )
    required = ("profile", "feature_names", "means", "stds", "weights", "intercept", "pat")
    missing = [f for f in required if f not in doc]
    if missing:
        raise SchemaError(f"model file missing fields {missing}")
    try:
        profile = DeviceProfile(doc["profile"])
    except ValueError as e:
        raise SchemaError(f"unknown profile {doc['profile']!r}") from e
    names = tuple(doc["feature_names"])
    if names != profile.feature_names:
        raise SchemaError(
            f"feature_names do not match profile {profile.value}: {names}"
        )
    weights = np.array(doc["weights"], dtype=np.float64)
    means = np.array(doc["means"], dtype=np.float64)
    stds = np.array(doc["stds"], dtype=np.float64)
    if not (len(weights) == len(means) == len(stds) == len(names)):
        raise SchemaError("weights/means/stds lengths do not match feature_names")
    try:
        model = ModelWeights(
            w=weights,
            b=float(doc["intercept"]),
            scaler=Scaler(means=means, stds=stds),
            profile=profile,
            pat=float(doc["pat"]),
        )
    except ConfigError as e:
        raise SchemaError(str(e)) from e
    return model, dict(doc.get("train_meta") or {})


def read_model(path) -> tuple[ModelWeights, dict]:
    """Load a model file; any schema problem aborts with no partial result."""
    return parse_model(Path(path).read_text(encoding="utf-8"))


# --- report tables ---


def write_replay_report(csv_path, summary_path, report: ReplayReport) -> None:
    """Per-tap CSV plus a structured JSON summary, both deterministic."""
    rows = ["tap_id,truth,prediction,cell,fired_kind,emit_t_us,latency_us,score"]
    for o in sorted(report.outcomes, key=lambda o: o.tap_id):
        rows.append(
            f"{o.tap_id},{o.truth.value},{o.prediction.value},{o.cell.value},"
            f"{o.fired_kind.value},{o.emit_t_us},{o.latency_us},{o.score!r}"
        )
    Path(csv_path).write_text("\n".join(rows) + "\n", encoding="utf-8")
    summary = {
        "schema_version": 1,
        "n_primary": len(report.outcomes),
        "cell_counts": {c.value: report.cell_counts[c] for c in OutcomeCell},
        "mean_single_latency_predictive_us": report.mean_single_latency_predictive_us,
        "mean_single_latency_conventional_us": report.mean_single_latency_conventional_us,
        "mean_reduction_us": report.mean_reduction_us,
        "false_positive_single_rate": report.false_positive_single_rate,
    }
    Path(summary_path).write_text(
        json.dumps(summary, indent=2, allow_nan=False) + "\n", encoding="utf-8"
    )


def write_curve_csv(path, curves: list[tuple[str, list[CurvePoint]]]) -> None:
    """Accuracy-vs-n table: one block of rows per model id."""
    rows = ["model_id,n_percent,subset_size,accuracy,precision,recall"]
    for model_id, points in curves:
        for p in points:
            rows.append(
                f"{model_id},{p.n_percent!r},{p.subset_size},"
                f"{p.accuracy!r},{p.precision!r},{p.recall!r}"
            )
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def write_roc_csv(path, tables: list[tuple[float, list[RocPoint]]]) -> None:
    """ROC tables keyed by the top-n% subset they were computed on."""
    rows = ["n_percent,threshold,fpr,tpr"]
    for n_percent, points in tables:
        for p in points:
            thr = "inf" if p.threshold == float("inf") else repr(p.threshold)
            rows.append(f"{n_percent!r},{thr},{p.fpr!r},{p.tpr!r}")
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")
