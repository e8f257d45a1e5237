"""Confidence-ranked subset extraction plus accuracy-vs-n and ROC curves.

A score's distance from 0.5 measures how confident the classifier is
either way; the top-n% extraction keeps the n% most confident taps and
is how the accuracy/ROC curves sweep from "only the surest calls" down
to "everything".
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .classifier import ScoredTap
from .errors import ClassBalanceError, ConfigError, TruthMissingError
from .taps import TapLabel


@dataclass(frozen=True)
class CurvePoint:
    n_percent: float
    subset_size: int
    accuracy: float
    precision: float
    recall: float


@dataclass(frozen=True)
class RocPoint:
    threshold: float
    tpr: float
    fpr: float


class ClassifyRule(enum.Enum):
    #: plain logistic rule: predict single iff s >= 0.5
    BY_HALF = "by_half"
    #: deployment rule: predict single iff s >= pat, else treat as double
    BY_PAT = "by_pat"


def confidence_distance(s: float) -> float:
    """Absolute distance of a score from 0.5; larger means more confident."""
    return abs(s - 0.5)


def top_n_extract(scored: list[ScoredTap], n_percent: float) -> list[ScoredTap]:
    """Keep the ceil(n% * len) most confident taps.

    Ties in confidence break toward the earlier original index, and the
    output preserves the input's relative order.
    """
    if not (0.0 < n_percent <= 100.0):
        raise ConfigError(f"n_percent must lie in (0, 100], got {n_percent}")
    if not scored:
        return []
    dist = np.array([confidence_distance(st.s) for st in scored])
    order = np.argsort(-dist, kind="stable")
    k = math.ceil(n_percent / 100.0 * len(scored))
    keep = np.sort(order[:k])
    return [scored[i] for i in keep]


def accuracy_curve(
    scored: list[ScoredTap],
    n_grid: list[float],
    rule: ClassifyRule = ClassifyRule.BY_HALF,
    pat: float | None = None,
) -> list[CurvePoint]:
    """Accuracy/precision/recall over the top-n% subset for each n.

    Single tap is the positive class. Under BY_PAT a below-threshold score
    counts as a double prediction (the detector would wait). Empty
    precision/recall denominators report 0.
    """
    if any(st.truth is None for st in scored):
        raise TruthMissingError("accuracy_curve needs ground truth on every tap")
    if rule is ClassifyRule.BY_PAT:
        if pat is None:
            raise ConfigError("BY_PAT rule needs a pat value")
        cut = pat
    else:
        cut = 0.5
    points = []
    for n in n_grid:
        subset = top_n_extract(scored, n)
        pred = np.array([st.s >= cut for st in subset])
        truth = np.array([st.truth is TapLabel.SINGLE for st in subset])
        tp = int(np.sum(pred & truth))
        fp = int(np.sum(pred & ~truth))
        fn = int(np.sum(~pred & truth))
        acc = float((pred == truth).mean()) if len(subset) else 0.0
        points.append(
            CurvePoint(
                n_percent=float(n),
                subset_size=len(subset),
                accuracy=acc,
                precision=tp / (tp + fp) if tp + fp else 0.0,
                recall=tp / (tp + fn) if tp + fn else 0.0,
            )
        )
    return points


def roc_auc(scored: list[ScoredTap]) -> tuple[list[RocPoint], float]:
    """ROC sweep over unique score thresholds plus trapezoidal AUC.

    Predict single iff s >= threshold; the sweep starts above the largest
    score (0 rate corner) and ends at the smallest (1,1 corner). The AUC
    equals the rank-sum statistic of the two score samples divided by
    n1*n2, which the stats module cross-checks.
    """
    if any(st.truth is None for st in scored):
        raise TruthMissingError("roc_auc needs ground truth on every tap")
    truth = np.array([st.truth is TapLabel.SINGLE for st in scored])
    s = np.array([st.s for st in scored])
    n_pos = int(truth.sum())
    n_neg = len(truth) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ClassBalanceError("ROC needs both truth classes present")
    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    truth_sorted = truth[order]
    points = [RocPoint(threshold=math.inf, tpr=0.0, fpr=0.0)]
    tp = fp = 0
    i = 0
    n = len(s_sorted)
    while i < n:
        j = i
        while j < n and s_sorted[j] == s_sorted[i]:
            tp += int(truth_sorted[j])
            fp += int(not truth_sorted[j])
            j += 1
        points.append(
            RocPoint(threshold=float(s_sorted[i]), tpr=tp / n_pos, fpr=fp / n_neg)
        )
        i = j
    fprs = np.array([p.fpr for p in points])
    tprs = np.array([p.tpr for p in points])
    auc = float(np.trapezoid(tprs, fprs))
    return points, auc
