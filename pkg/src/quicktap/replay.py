"""Deterministic trace replay: the predictive detector against the
conventional fixed-threshold detector, with per-tap latencies and the
2x2 prediction-vs-behavior outcome tally.

Outcome cells: A = predicted single / actual single (latency reduced),
B = predicted double / actual single (same as conventional), C =
predicted single / actual double (unintentional input), D = predicted
double / actual double (same as conventional).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .classifier import ModelWeights, score_matrix
from .errors import ConfigError, MismatchedReportsError, ProfileMismatchError
from .features import DeviceProfile, feature_matrix
from .taps import LabeledTap, TapEventKind, TapLabel, TapRole


@dataclass(frozen=True)
class LatencyConfig:
    """Timing constants for replay, all integer microseconds.

    Defaults follow the laptop-touchpad accounting (11 ms sensing + 1 ms
    prediction); use for_profile() to get the smartphone numbers
    (16.6 ms + 1.38 ms).
    """

    double_tap_threshold_us: int = 500_000
    sensing_latency_us: int = 11_000
    inference_latency_us: int = 1_000

    def __post_init__(self):
        if self.sensing_latency_us + self.inference_latency_us >= self.double_tap_threshold_us:
            raise ConfigError(
                "sensing + inference latency must stay below the double-tap threshold"
            )

    @classmethod
    def for_profile(
        cls, profile: DeviceProfile, double_tap_threshold_us: int = 500_000
    ) -> "LatencyConfig":
        if profile is DeviceProfile.LAPTOP:
            return cls(double_tap_threshold_us, 11_000, 1_000)
        return cls(double_tap_threshold_us, 16_600, 1_380)

    @property
    def early_fire_delay_us(self) -> int:
        return self.sensing_latency_us + self.inference_latency_us


class PredictedKind(enum.Enum):
    SINGLE = "single"
    DOUBLE = "double"


class OutcomeCell(enum.Enum):
    A_LATENCY_REDUCED = "A_latency_reduced"
    B_SAME_AS_CONVENTIONAL = "B_same_as_conventional"
    C_UNINTENTIONAL_INPUT = "C_unintentional_input"
    D_SAME_AS_CONVENTIONAL = "D_same_as_conventional"


def classify_outcome(prediction: PredictedKind, truth: TapLabel) -> OutcomeCell:
    """The 2x2 mapping from (prediction, actual behavior) to outcome cell."""
    if truth is TapLabel.SINGLE:
        if prediction is PredictedKind.SINGLE:
            return OutcomeCell.A_LATENCY_REDUCED
        return OutcomeCell.B_SAME_AS_CONVENTIONAL
    if prediction is PredictedKind.SINGLE:
        return OutcomeCell.C_UNINTENTIONAL_INPUT
    return OutcomeCell.D_SAME_AS_CONVENTIONAL


@dataclass(frozen=True)
class TapOutcome:
    tap_id: int
    prediction: PredictedKind
    truth: TapLabel
    cell: OutcomeCell
    fired_kind: TapEventKind
    emit_t_us: int
    #: emission time minus the truth-completing touch-up (own up for a
    #: single, the partner's up for a double); negative for cell C where
    #: the false single fires before the second contact.
    latency_us: int
    score: float


@dataclass(frozen=True)
class ReplayReport:
    outcomes: tuple[TapOutcome, ...]
    cell_counts: dict[OutcomeCell, int]
    mean_single_latency_predictive_us: float
    mean_single_latency_conventional_us: float
    mean_reduction_us: float
    false_positive_single_rate: float


def _iter_primary_with_partner(labeled: list[LabeledTap]):
    """Yield (primary tap, partner tap or None) pairs."""
    i = 0
    while i < len(labeled):
        lt = labeled[i]
        if lt.role is not TapRole.PRIMARY:
            raise ConfigError(
                f"unpaired trailing double tap at position {i}; labels are malformed"
            )
        if lt.label is TapLabel.DOUBLE_FIRST:
            if i + 1 >= len(labeled) or labeled[i + 1].role is not TapRole.DOUBLE_SECOND:
                raise ConfigError(
                    f"double-first tap {lt.tap.id} has no trailing partner"
                )
            yield lt, labeled[i + 1]
            i += 2
        else:
            yield lt, None
            i += 1


def _aggregate(outcomes: list[TapOutcome], cfg: LatencyConfig) -> ReplayReport:
    counts = {cell: 0 for cell in OutcomeCell}
    for o in outcomes:
        counts[o.cell] += 1
    single_lat = [o.latency_us for o in outcomes if o.truth is TapLabel.SINGLE]
    mean_pred = float(np.mean(single_lat)) if single_lat else 0.0
    mean_conv = float(cfg.double_tap_threshold_us) if single_lat else 0.0
    n_c = counts[OutcomeCell.C_UNINTENTIONAL_INPUT]
    n_d = counts[OutcomeCell.D_SAME_AS_CONVENTIONAL]
    return ReplayReport(
        outcomes=tuple(outcomes),
        cell_counts=counts,
        mean_single_latency_predictive_us=mean_pred,
        mean_single_latency_conventional_us=mean_conv,
        mean_reduction_us=mean_conv - mean_pred,
        false_positive_single_rate=n_c / (n_c + n_d) if n_c + n_d else 0.0,
    )


def replay(
    labeled: list[LabeledTap],
    model: ModelWeights,
    cfg: LatencyConfig,
    trace_profile: DeviceProfile | None = None,
) -> ReplayReport:
    """Replay labeled taps through the predictive detector.

    Per primary tap: score at touch-up and decide. Above the activation
    threshold a single fires at up + sensing + inference (cells A or C);
    below it the detector waits, firing the double at the partner's
    touch-up (cell D) or the single a full threshold later (cell B).
    Pass the trace's device profile to catch model/trace mismatches.
    """
    if trace_profile is not None and trace_profile is not model.profile:
        raise ProfileMismatchError(
            f"model profile {model.profile.value} != trace profile {trace_profile.value}"
        )
    pairs = list(_iter_primary_with_partner(labeled))
    if not pairs:
        return _aggregate([], cfg)
    X = feature_matrix([p.tap for p, _ in pairs], model.profile)
    scores = score_matrix(model, X)
    outcomes: list[TapOutcome] = []
    for (lt, partner), s in zip(pairs, scores):
        s = float(s)
        fire_now = s >= model.pat
        truth_up = lt.tap.up.t_us if partner is None else partner.tap.up.t_us
        if fire_now:
            prediction = PredictedKind.SINGLE
            emit = lt.tap.up.t_us + cfg.early_fire_delay_us
            fired = TapEventKind.SINGLE_TAP_FIRED
        elif lt.label is TapLabel.DOUBLE_FIRST:
            prediction = PredictedKind.DOUBLE
            emit = partner.tap.up.t_us
            fired = TapEventKind.DOUBLE_TAP_FIRED
        else:
            prediction = PredictedKind.DOUBLE
            emit = lt.tap.up.t_us + cfg.double_tap_threshold_us
            fired = TapEventKind.SINGLE_TAP_FIRED
        outcomes.append(
            TapOutcome(
                tap_id=lt.tap.id,
                prediction=prediction,
                truth=lt.label,
                cell=classify_outcome(prediction, lt.label),
                fired_kind=fired,
                emit_t_us=emit,
                latency_us=emit - truth_up,
                score=s,
            )
        )
    return _aggregate(outcomes, cfg)


def conventional_replay(labeled: list[LabeledTap], cfg: LatencyConfig) -> ReplayReport:
    """Baseline report: the fixed-threshold detector, which always waits."""
    outcomes: list[TapOutcome] = []
    for lt, partner in _iter_primary_with_partner(labeled):
        if lt.label is TapLabel.DOUBLE_FIRST:
            emit = partner.tap.up.t_us
            fired = TapEventKind.DOUBLE_TAP_FIRED
            truth_up = partner.tap.up.t_us
        else:
            emit = lt.tap.up.t_us + cfg.double_tap_threshold_us
            fired = TapEventKind.SINGLE_TAP_FIRED
            truth_up = lt.tap.up.t_us
        outcomes.append(
            TapOutcome(
                tap_id=lt.tap.id,
                prediction=PredictedKind.DOUBLE,
                truth=lt.label,
                cell=classify_outcome(PredictedKind.DOUBLE, lt.label),
                fired_kind=fired,
                emit_t_us=emit,
                latency_us=emit - truth_up,
                score=0.0,
            )
        )
    return _aggregate(outcomes, cfg)


@dataclass(frozen=True)
class ReplayComparison:
    cell_count_delta: dict[OutcomeCell, int]
    mean_single_latency_delta_us: float
    per_tap_delta_mean_us: float
    per_tap_delta_p50_us: float
    per_tap_delta_p90_us: float
    per_tap_delta_max_us: float

    def to_dict(self) -> dict:
        return {
            "cell_count_delta": {c.value: v for c, v in sorted(
                self.cell_count_delta.items(), key=lambda kv: kv[0].value
            )},
            "mean_single_latency_delta_us": self.mean_single_latency_delta_us,
            "per_tap_delta_mean_us": self.per_tap_delta_mean_us,
            "per_tap_delta_p50_us": self.per_tap_delta_p50_us,
            "per_tap_delta_p90_us": self.per_tap_delta_p90_us,
            "per_tap_delta_max_us": self.per_tap_delta_max_us,
        }

    def render_text(self) -> str:
        lines = ["cell count deltas (model - baseline):"]
        for cell, v in sorted(self.cell_count_delta.items(), key=lambda kv: kv[0].value):
            lines.append(f"  {cell.value:<26} {v:+d}")
        lines.append(
            f"mean single-tap latency delta: {self.mean_single_latency_delta_us:+.1f} us"
        )
        lines.append(
            "per-tap emission delta us (baseline - model): "
            f"mean {self.per_tap_delta_mean_us:.1f}, p50 {self.per_tap_delta_p50_us:.1f}, "
            f"p90 {self.per_tap_delta_p90_us:.1f}, max {self.per_tap_delta_max_us:.1f}"
        )
        return "\n".join(lines)


def compare_reports(with_model: ReplayReport, baseline: ReplayReport) -> ReplayComparison:
    """Summarize a model replay against the conventional baseline.

    Both reports must cover exactly the same taps. Per-tap deltas are
    baseline emission minus model emission, so positive means the model
    fired earlier.
    """
    ids_a = [o.tap_id for o in with_model.outcomes]
    ids_b = [o.tap_id for o in baseline.outcomes]
    if ids_a != ids_b:
        raise MismatchedReportsError(
            f"reports cover different taps ({len(ids_a)} vs {len(ids_b)})"
        )
    deltas = np.array(
        [b.emit_t_us - a.emit_t_us for a, b in zip(with_model.outcomes, baseline.outcomes)],
        dtype=np.float64,
    )
    if len(deltas) == 0:
        deltas = np.zeros(1)
    return ReplayComparison(
        cell_count_delta={
            cell: with_model.cell_counts[cell] - baseline.cell_counts[cell]
            for cell in OutcomeCell
        },
        mean_single_latency_delta_us=(
            with_model.mean_single_latency_predictive_us
            - baseline.mean_single_latency_predictive_us
        ),
        per_tap_delta_mean_us=float(deltas.mean()),
        per_tap_delta_p50_us=float(np.percentile(deltas, 50)),
        per_tap_delta_p90_us=float(np.percentile(deltas, 90)),
        per_tap_delta_max_us=float(deltas.max()),
    )
