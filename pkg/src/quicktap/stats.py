"""Nonparametric comparison machinery: Mann-Whitney U and Cohen's d.

The U statistic returned for (a, b) counts pairs where a beats b, with
ties counted half (midranks). Small pooled samples (n1 + n2 <= 12) get an
exact two-sided p by full enumeration of label assignments; larger ones
use the normal approximation with tie and continuity corrections.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInputError, InsufficientDataError, ZeroVarianceError

#: pooled-size cutoff below which the exact permutation p-value is used
EXACT_LIMIT = 12

_DESCRIPTOR_BANDS = (
    (0.2, "Very Small"),
    (0.5, "Small"),
    (0.8, "Medium"),
    (1.2, "Large"),
    (2.0, "Very Large"),
)


@dataclass(frozen=True)
class UTestResult:
    u: float
    z: float
    p_two_sided: float
    n1: int
    n2: int
    tie_corrected: bool
    exact: bool


@dataclass(frozen=True)
class EffectSize:
    d: float
    descriptor: str


def midranks(values: np.ndarray) -> np.ndarray:
    """Ranks starting at 1; tied values share the mean of their ranks."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    n = len(values)
    sorted_vals = values[order]
    while i < n:
        j = i
        while j < n and sorted_vals[j] == sorted_vals[i]:
            j += 1
        ranks[order[i:j]] = 0.5 * (i + j - 1) + 1.0
        i = j
    return ranks


def _norm_sf(x: float) -> float:
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def _u_statistic(a: np.ndarray, b: np.ndarray) -> float:
    pooled = np.concatenate([a, b])
    ranks = midranks(pooled)
    r1 = float(ranks[: len(a)].sum())
    return r1 - len(a) * (len(a) + 1) / 2.0


def _exact_p(pooled: np.ndarray, n1: int, u_obs: float) -> float:
    """Two-sided p by enumerating every size-n1 subset of the pooled values.

    Uses sum of both tails around the symmetric center n1*n2/2, clamped
    to 1.
    """
    n = len(pooled)
    n2 = n - n1
    hi = max(u_obs, n1 * n2 - u_obs)
    lo = n1 * n2 - hi
    total = 0
    extreme = 0
    for combo in itertools.combinations(range(n), n1):
        in_a = np.zeros(n, dtype=bool)
        in_a[list(combo)] = True
        a_vals = pooled[in_a]
        b_vals = pooled[~in_a]
        u = 0.0
        for av in a_vals:
            u += float(np.sum(av > b_vals)) + 0.5 * float(np.sum(av == b_vals))
        total += 1
        if u >= hi or u <= lo:
            extreme += 1
    return min(1.0, extreme / total)


def mann_whitney_u(a, b) -> UTestResult:
    """Two-sided Mann-Whitney U test.

    Returns U for the first sample (pairs where a > b plus half the
    ties). z always comes from the tie-corrected normal approximation
    with continuity correction; p is exact when n1 + n2 <= EXACT_LIMIT.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n1, n2 = len(a), len(b)
    if n1 == 0 or n2 == 0:
        raise EmptyInputError("both samples must be non-empty")
    pooled = np.concatenate([a, b])
    u = _u_statistic(a, b)
    # tie correction factor
    _, counts = np.unique(pooled, return_counts=True)
    n = n1 + n2
    has_ties = bool((counts > 1).any())
    if n > 1:
        tie_factor = 1.0 - float(((counts**3 - counts).sum())) / (n**3 - n)
    else:
        tie_factor = 1.0
    mu = n1 * n2 / 2.0
    sigma = math.sqrt(tie_factor * n1 * n2 * (n + 1) / 12.0)
    if sigma == 0.0:
        z = 0.0
        p_norm = 1.0
    else:
        cc = 0.5 if u > mu else (-0.5 if u < mu else 0.0)
        z = (u - mu - cc) / sigma
        p_norm = min(1.0, 2.0 * _norm_sf(abs(z)))
    if n <= EXACT_LIMIT:
        p = _exact_p(pooled, n1, u)
        exact = True
    else:
        p = p_norm
        exact = False
    return UTestResult(
        u=u, z=z, p_two_sided=p, n1=n1, n2=n2, tie_corrected=has_ties, exact=exact
    )


def magnitude_descriptor(d: float) -> str:
    """Describe |d| using the conventional magnitude bands."""
    absd = abs(d)
    for cutoff, name in _DESCRIPTOR_BANDS:
        if absd < cutoff:
            return name
    return "Huge"


def cohens_d(a, b) -> EffectSize:
    """Cohen's d with pooled sample variance; positive when mean(a) > mean(b)."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n1, n2 = len(a), len(b)
    if n1 < 2 or n2 < 2:
        raise InsufficientDataError("Cohen's d needs at least 2 values per sample")
    v1 = float(a.var(ddof=1))
    v2 = float(b.var(ddof=1))
    pooled_var = ((n1 - 1) * v1 + (n2 - 1) * v2) / (n1 + n2 - 2)
    if pooled_var == 0.0:
        raise ZeroVarianceError("pooled variance is zero; d is undefined")
    d = (float(a.mean()) - float(b.mean())) / math.sqrt(pooled_var)
    return EffectSize(d=d, descriptor=magnitude_descriptor(d))
