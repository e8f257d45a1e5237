"""quicktap: fire single-tap events at touch-up instead of after the
double-tap wait, by classifying each detected tap as a single or the
first half of a double.

The package covers the full loop: raw touch streams -> segmented and
labeled taps -> per-tap features -> an L1-regularized logistic model with
a confidence activation threshold -> deterministic latency replay against
the conventional fixed-threshold detector, plus the statistics used to
compare groups.
"""

from .classifier import (
    Decision,
    ModelWeights,
    ScoredTap,
    TrainConfig,
    TrainReport,
    balance,
    cross_validate_cost,
    decide,
    score,
    score_matrix,
    solve_l1,
    train,
    tune_pat,
)
from .confidence import (
    ClassifyRule,
    CurvePoint,
    RocPoint,
    accuracy_curve,
    confidence_distance,
    roc_auc,
    top_n_extract,
)
from .errors import QuickTapError
from .features import (
    DeviceProfile,
    FeatureVector,
    Scaler,
    extract,
    feature_matrix,
    standardize_apply,
    standardize_fit,
)
from .replay import (
    LatencyConfig,
    OutcomeCell,
    PredictedKind,
    ReplayReport,
    TapOutcome,
    classify_outcome,
    compare_reports,
    conventional_replay,
    replay,
)
from .stats import EffectSize, UTestResult, cohens_d, magnitude_descriptor, mann_whitney_u
from .store import (
    TraceHeader,
    read_model,
    read_trace,
    write_model,
    write_trace,
)
from .synth import SynthConfig, UserTrace, generate
from .taps import (
    DOUBLE_TAP_THRESHOLD_US,
    DetectorEvent,
    LabeledTap,
    Phase,
    PowerSource,
    TapLabel,
    TapRecord,
    TapRole,
    TouchSample,
    conventional_detect,
    label_taps,
    segment_taps,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
