"""L1-regularized logistic regression for single-vs-double-first tap
classification, plus the confidence-thresholded decision rule.

The positive class (label 1) is a single tap; label 0 is the first tap of
a double. The trained model fires a single-tap event immediately only
when its confidence score clears the activation threshold ``pat``; below
it, the detector falls back to waiting for a possible second tap.

Objective convention (matching the classic linear-solver parameterization):

    minimize_{w,b}  (1/cost) * ||w||_1  +  sum_i log(1 + exp(-y_i (x_i.w + b)))

with y in {-1,+1} and an unpenalized intercept. The solver is an outer
Newton loop over a quadratic model of the loss with an inner cyclic
coordinate descent using soft-thresholding, safeguarded by an Armijo line
search; it stops when the KKT subgradient violation drops below ``tol``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numba
import numpy as np

from .errors import (
    ClassBalanceError,
    ConfigError,
    InsufficientDataError,
    SolverError,
    TruthMissingError,
)
from .features import DeviceProfile, FeatureVector, Scaler, feature_matrix, standardize_fit
from .taps import LabeledTap, TapLabel, TapRole

TEST_FRACTION = 0.1  # held-out share per training round


class Decision(enum.Enum):
    SINGLE_TAP_NOW = "single_tap_now"
    WAIT_FOR_SECOND_TAP = "wait_for_second_tap"


@dataclass(frozen=True)
class ModelWeights:
    """Trained classifier: weights in standardized space plus its scaler."""

    w: np.ndarray
    b: float
    scaler: Scaler
    profile: DeviceProfile
    pat: float = 0.65

    def __post_init__(self):
        if len(self.w) != self.profile.feature_count:
            raise ConfigError(
                f"profile {self.profile.value} has {self.profile.feature_count} "
                f"features, got {len(self.w)} weights"
            )
        if not (0.5 <= self.pat < 1.0):
            raise ConfigError(f"pat must lie in [0.5, 1), got {self.pat}")


@dataclass(frozen=True)
class TrainConfig:
    cost_grid: tuple[float, ...] = (0.01, 0.1, 1.0, 10.0, 100.0)
    cv_folds: int = 10
    rounds: int = 10
    balance: bool = True
    seed: int = 0
    solver_tol: float = 1e-6
    max_iter: int = 200

    def __post_init__(self):
        if self.cv_folds < 2:
            raise ConfigError(f"cv_folds must be >= 2, got {self.cv_folds}")
        if self.rounds < 1:
            raise ConfigError(f"rounds must be >= 1, got {self.rounds}")
        if any(c <= 0 for c in self.cost_grid):
            raise ConfigError("cost grid values must be positive")
        if self.solver_tol <= 0 or self.max_iter < 1:
            raise ConfigError("solver_tol must be positive and max_iter >= 1")


@dataclass(frozen=True)
class ScoredTap:
    tap_id: int
    s: float
    truth: TapLabel | None = None

    def __post_init__(self):
        if not (0.0 <= self.s <= 1.0):
            raise ConfigError(f"score must lie in [0,1], got {self.s}")


@dataclass(frozen=True)
class RoundResult:
    index: int
    cost: float
    w: np.ndarray
    b: float
    scaler: Scaler
    train_accuracy: float
    test_accuracy: float
    test_precision: float
    test_recall: float
    scored_test: tuple[ScoredTap, ...]


@dataclass(frozen=True)
class TrainReport:
    rounds: tuple[RoundResult, ...]
    mean_test_accuracy: float
    mean_test_precision: float
    mean_test_recall: float

    def pooled_scored_test(self) -> list[ScoredTap]:
        """All rounds' held-out scored taps in round order."""
        out: list[ScoredTap] = []
        for r in self.rounds:
            out.extend(r.scored_test)
        return out


def sigmoid(z):
    """Numerically stable logistic function for scalars or arrays."""
    z = np.asarray(z, dtype=np.float64)
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out if out.ndim else float(out)


# --- smooth part of the objective, in plain numpy (used by tests too) ---

def smooth_loss(X, y, w, b) -> float:
    ypm = 2.0 * np.asarray(y, dtype=np.float64) - 1.0
    m = ypm * (X @ w + b)
    return float(np.logaddexp(0.0, -m).sum())


def smooth_grad(X, y, w, b) -> tuple[np.ndarray, float]:
    """Gradient of the unpenalized log-loss w.r.t. (w, b)."""
    ypm = 2.0 * np.asarray(y, dtype=np.float64) - 1.0
    p = sigmoid(-ypm * (X @ w + b))
    r = -ypm * p
    return X.T @ r, float(r.sum())


def l1_objective(X, y, w, b, cost: float) -> float:
    return smooth_loss(X, y, w, b) + (1.0 / cost) * float(np.abs(w).sum())


def kkt_violation(X, y, w, b, cost: float) -> float:
    """Max subgradient-optimality violation over all coordinates.

    0 at an exact optimum: |grad_b| = 0; for w_j = 0, |grad_j| <= 1/cost;
    for w_j != 0, grad_j = -sign(w_j)/cost.
    """
    lam = 1.0 / cost
    gw, gb = smooth_grad(X, y, w, b)
    viol = abs(gb)
    for j in range(len(w)):
        if w[j] > 0.0:
            v = abs(gw[j] + lam)
        elif w[j] < 0.0:
            v = abs(gw[j] - lam)
        else:
            v = max(0.0, abs(gw[j]) - lam)
        viol = max(viol, v)
    return viol


# --- solver core (numba) ---

@numba.njit(cache=True)
def _softplus(t):
    if t > 0.0:
        return t + math.log1p(math.exp(-t))
    return math.log1p(math.exp(t))


@numba.njit(cache=True)
def _gauss_solve(H, rhs, k):
    """In-place Gaussian elimination with partial pivoting; returns success."""
    for col in range(k):
        piv = col
        best = abs(H[col, col])
        for row in range(col + 1, k):
            if abs(H[row, col]) > best:
                best = abs(H[row, col])
                piv = row
        if best < 1e-12:
            return False
        if piv != col:
            for c in range(k):
                tmp = H[col, c]
                H[col, c] = H[piv, c]
                H[piv, c] = tmp
            tmp = rhs[col]
            rhs[col] = rhs[piv]
            rhs[piv] = tmp
        for row in range(col + 1, k):
            f = H[row, col] / H[col, col]
            if f != 0.0:
                for c in range(col, k):
                    H[row, c] -= f * H[col, c]
                rhs[row] -= f * rhs[col]
    for col in range(k - 1, -1, -1):
        s = rhs[col]
        for c in range(col + 1, k):
            s -= H[col, c] * rhs[c]
        rhs[col] = s / H[col, col]
    return True


@numba.njit(cache=True)
def _subproblem_phi(X, r, q, w, dw, db, lam, e_out):
    """Quadratic-model objective at (dw, db); also rebuilds e_out = X dw + db."""
    n, d = X.shape
    phi = 0.0
    for j in range(d):
        phi += lam * abs(w[j] + dw[j])
    for i in range(n):
        e = db
        for j in range(d):
            e += X[i, j] * dw[j]
        e_out[i] = e
        phi += r[i] * e + 0.5 * q[i] * e * e
    return phi


@numba.njit(cache=True)
def _solve_core(X, ypm, lam, tol, max_outer, max_inner):
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    u = np.zeros(n)
    r = np.empty(n)
    q = np.empty(n)
    e = np.empty(n)
    e_trial = np.empty(n)
    xsq = np.empty(d)
    dw = np.empty(d)
    dw_trial = np.empty(d)
    active = np.empty(d, dtype=np.int64)
    H = np.empty((d + 1, d + 1))
    Hw = np.empty((d + 1, d + 1))
    rhs = np.empty(d + 1)
    rhw = np.empty(d + 1)
    loss = n * math.log(2.0)
    viol = np.inf
    for _outer in range(max_outer):
        gb = 0.0
        for i in range(n):
            m = ypm[i] * u[i]
            p = 1.0 / (1.0 + math.exp(m))
            r[i] = -ypm[i] * p
            qq = p * (1.0 - p)
            q[i] = qq if qq > 1e-10 else 1e-10
            gb += r[i]
        viol = abs(gb)
        for j in range(d):
            g = 0.0
            for i in range(n):
                g += X[i, j] * r[i]
            if w[j] > 0.0:
                v = abs(g + lam)
            elif w[j] < 0.0:
                v = abs(g - lam)
            else:
                v = abs(g) - lam
                if v < 0.0:
                    v = 0.0
            if v > viol:
                viol = v
        if viol <= tol:
            return w, b, viol, 1
        qsum = 0.0
        for i in range(n):
            qsum += q[i]
        for j in range(d):
            s = 0.0
            for i in range(n):
                s += q[i] * X[i, j] * X[i, j]
            xsq[j] = s if s > 1e-12 else 1e-12
        # quadratic subproblem in (dw, db): lam*||w+dw||_1 + r.e + q.e^2/2,
        # e = X dw + db. Cyclic CD alternating with exact Newton solves on
        # the active set; plain CD alone crawls when columns are collinear.
        for i in range(n):
            e[i] = 0.0
        for j in range(d):
            dw[j] = 0.0
        db = 0.0
        inner_tol = 0.1 * viol
        if inner_tol < 0.1 * tol:
            inner_tol = 0.1 * tol
        for _round in range(max_inner):
            # one CD sweep, tracking the subproblem KKT violation
            max_v = 0.0
            g = 0.0
            for i in range(n):
                g += r[i] + q[i] * e[i]
            if abs(g) > max_v:
                max_v = abs(g)
            step = -g / qsum
            if step != 0.0:
                db += step
                for i in range(n):
                    e[i] += step
            for j in range(d):
                g = 0.0
                for i in range(n):
                    g += X[i, j] * (r[i] + q[i] * e[i])
                wj = w[j] + dw[j]
                if wj > 0.0:
                    v = abs(g + lam)
                elif wj < 0.0:
                    v = abs(g - lam)
                else:
                    v = abs(g) - lam
                    if v < 0.0:
                        v = 0.0
                if v > max_v:
                    max_v = v
                z = xsq[j] * wj - g
                if z > lam:
                    nj = (z - lam) / xsq[j]
                elif z < -lam:
                    nj = (z + lam) / xsq[j]
                else:
                    nj = 0.0
                delta = nj - wj
                if delta != 0.0:
                    dw[j] += delta
                    for i in range(n):
                        e[i] += X[i, j] * delta
            if max_v <= inner_tol:
                break
            # Newton step on the nonzero coordinates + intercept, with a
            # Levenberg damping ladder: the active-set Hessian goes
            # singular on near-separable data, where plain CD crawls.
            k = 0
            for j in range(d):
                if w[j] + dw[j] != 0.0:
                    active[k] = j
                    k += 1
            if k == 0:
                continue
            for a in range(k):
                ja = active[a]
                ga = 0.0
                for i in range(n):
                    ga += X[i, ja] * (r[i] + q[i] * e[i])
                sigma = 1.0 if w[ja] + dw[ja] > 0.0 else -1.0
                rhs[a] = -(ga + lam * sigma)
                for c in range(a, k):
                    jc = active[c]
                    s = 0.0
                    for i in range(n):
                        s += q[i] * X[i, ja] * X[i, jc]
                    H[a, c] = s
                    H[c, a] = s
                s = 0.0
                for i in range(n):
                    s += q[i] * X[i, ja]
                H[a, k] = s
                H[k, a] = s
            gb_in = 0.0
            for i in range(n):
                gb_in += r[i] + q[i] * e[i]
            rhs[k] = -gb_in
            H[k, k] = qsum
            dmax = 1e-12
            for a in range(k + 1):
                if H[a, a] > dmax:
                    dmax = H[a, a]
            phi_cur = _subproblem_phi(X, r, q, w, dw, db, lam, e_trial)
            mu = 0.0
            for _attempt in range(5):
                for a in range(k + 1):
                    for c in range(k + 1):
                        Hw[a, c] = H[a, c]
                    Hw[a, a] += mu
                    rhw[a] = rhs[a]
                mu = dmax * 1e-9 if mu == 0.0 else mu * 1e3
                if not _gauss_solve(Hw[: k + 1, : k + 1], rhw[: k + 1], k + 1):
                    continue
                # cap the step at the first orthant boundary crossing
                alpha = 1.0
                crossing = -1
                for a in range(k):
                    ja = active[a]
                    t_cur = w[ja] + dw[ja]
                    t_new = t_cur + rhw[a]
                    if t_cur * t_new < 0.0:
                        frac = -t_cur / rhw[a]
                        if frac < alpha:
                            alpha = frac
                            crossing = ja
                for j in range(d):
                    dw_trial[j] = dw[j]
                for a in range(k):
                    ja = active[a]
                    dw_trial[ja] = dw[ja] + alpha * rhw[a]
                if crossing >= 0:
                    dw_trial[crossing] = -w[crossing]  # land exactly on zero
                db_trial = db + alpha * rhw[k]
                phi_new = _subproblem_phi(X, r, q, w, dw_trial, db_trial, lam, e_trial)
                if phi_new <= phi_cur:
                    for j in range(d):
                        dw[j] = dw_trial[j]
                    db = db_trial
                    for i in range(n):
                        e[i] = e_trial[i]
                    break
        # Armijo line search on the penalized objective along (dw, db)
        pen_old = 0.0
        pen_full = 0.0
        for j in range(d):
            pen_old += abs(w[j])
            pen_full += abs(w[j] + dw[j])
        descent = lam * (pen_full - pen_old)
        for i in range(n):
            descent += r[i] * e[i]
        if descent >= -1e-16:
            return w, b, viol, 0  # no usable direction: numerically stuck
        f_old = loss + lam * pen_old
        # Near the optimum the true decrease drops below what float64 can
        # measure on the summed objective; accept within that noise floor
        # and let the KKT criterion stop the outer loop.
        noise = 1e-13 * (1.0 + abs(f_old))
        t = 1.0
        accepted = False
        for _ls in range(40):
            new_loss = 0.0
            for i in range(n):
                new_loss += _softplus(-ypm[i] * (u[i] + t * e[i]))
            pen_t = 0.0
            for j in range(d):
                pen_t += abs(w[j] + t * dw[j])
            if new_loss + lam * pen_t <= f_old + 0.01 * t * descent + noise:
                for j in range(d):
                    w[j] += t * dw[j]
                b += t * db
                for i in range(n):
                    u[i] += t * e[i]
                loss = new_loss
                accepted = True
                break
            t *= 0.5
        if not accepted:
            return w, b, viol, 0
    # out of outer iterations: report the violation at the final point
    gb = 0.0
    for i in range(n):
        m = ypm[i] * u[i]
        p = 1.0 / (1.0 + math.exp(m))
        r[i] = -ypm[i] * p
        gb += r[i]
    viol = abs(gb)
    for j in range(d):
        g = 0.0
        for i in range(n):
            g += X[i, j] * r[i]
        if w[j] > 0.0:
            v = abs(g + lam)
        elif w[j] < 0.0:
            v = abs(g - lam)
        else:
            v = abs(g) - lam
            if v < 0.0:
                v = 0.0
        if v > viol:
            viol = v
    return w, b, viol, 1 if viol <= tol else 0


def solve_l1(
    X: np.ndarray,
    y: np.ndarray,
    cost: float,
    tol: float = 1e-6,
    max_iter: int = 200,
) -> tuple[np.ndarray, float]:
    """Fit (w, b) for the L1-penalized logistic objective.

    ``X`` holds standardized rows, ``y`` labels in {0, 1} (1 = single tap),
    ``cost`` the inverse penalty strength. Raises SolverError carrying the
    final optimality gap when the KKT tolerance is not reached within
    ``max_iter`` outer iterations.
    """
    if cost <= 0:
        raise ConfigError(f"cost must be positive, got {cost}")
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.asarray(y)
    ypm = np.ascontiguousarray(2.0 * y - 1.0, dtype=np.float64)
    w, b, gap, ok = _solve_core(X, ypm, 1.0 / cost, tol, max_iter, 1000)
    if not ok:
        raise SolverError(
            f"solver did not reach tolerance {tol} within {max_iter} iterations", gap
        )
    return w, float(b)


def balance(X: np.ndarray, y: np.ndarray, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Randomly undersample the majority class down to the minority count.

    Deterministic under ``seed``; kept rows keep their original relative
    order. Only ever feed training rows here, never test folds.
    """
    y = np.asarray(y)
    idx0 = np.flatnonzero(y == 0)
    idx1 = np.flatnonzero(y == 1)
    if len(idx0) == 0 or len(idx1) == 0:
        raise ClassBalanceError("both classes must be present to balance")
    if len(idx0) == len(idx1):
        return X, y
    minority, majority = (idx0, idx1) if len(idx0) < len(idx1) else (idx1, idx0)
    rng = np.random.Generator(np.random.PCG64(seed))
    chosen = rng.choice(majority, size=len(minority), replace=False)
    keep = np.sort(np.concatenate([minority, chosen]))
    return X[keep], y[keep]


def cross_validate_cost(X: np.ndarray, y: np.ndarray, config: TrainConfig) -> float:
    """Pick the cost with highest mean held-out accuracy over seeded folds.

    Fold derivation (part of the contract so it can be reproduced
    independently): indices 0..n-1 are shuffled once by
    Generator(PCG64(config.seed)) and split with np.array_split into
    ``cv_folds`` folds. Ties go to the smaller cost.
    """
    y = np.asarray(y)
    n = len(y)
    for cls in (0, 1):
        if int((y == cls).sum()) < config.cv_folds:
            raise InsufficientDataError(
                f"need at least cv_folds={config.cv_folds} rows per class, "
                f"class {cls} has {int((y == cls).sum())}"
            )
    rng = np.random.Generator(np.random.PCG64(config.seed))
    idx = np.arange(n)
    rng.shuffle(idx)
    folds = np.array_split(idx, config.cv_folds)
    best_cost = None
    best_acc = -1.0
    for cost in sorted(config.cost_grid):
        accs = []
        for fold in folds:
            mask = np.ones(n, dtype=bool)
            mask[fold] = False
            w, b = solve_l1(X[mask], y[mask], cost, config.solver_tol, config.max_iter)
            pred = (X[fold] @ w + b) >= 0.0
            accs.append(float((pred == (y[fold] == 1)).mean()))
        mean_acc = float(np.mean(accs))
        if mean_acc > best_acc:
            best_acc = mean_acc
            best_cost = cost
    return best_cost


def _binary_metrics(pred: np.ndarray, truth: np.ndarray) -> tuple[float, float, float]:
    tp = int(np.sum(pred & truth))
    fp = int(np.sum(pred & ~truth))
    fn = int(np.sum(~pred & truth))
    acc = float((pred == truth).mean())
    prec = tp / (tp + fp) if tp + fp else 0.0
    rec = tp / (tp + fn) if tp + fn else 0.0
    return acc, prec, rec


def train_rows(
    X: np.ndarray,
    y: np.ndarray,
    tap_ids: np.ndarray,
    profile: DeviceProfile,
    config: TrainConfig,
    pat: float = 0.65,
) -> tuple[ModelWeights, TrainReport]:
    """Training pipeline over a prepared feature matrix.

    Per round (seeds derived from config.seed and the round index):
    stratified 90/10 split, scaler fitted on the training rows, optional
    class balancing of the training rows only, cost chosen by CV, final
    fit, metrics on the untouched held-out rows. Reported metrics are
    means over rounds; the returned weights come from the final round.
    """
    y = np.asarray(y)
    if len(np.unique(y)) < 2:
        raise ClassBalanceError("training data must contain both classes")
    rounds: list[RoundResult] = []
    for r in range(config.rounds):
        ss = np.random.SeedSequence(entropy=config.seed, spawn_key=(r,))
        s_split, s_balance, s_cv = (int(v) for v in ss.generate_state(3, dtype=np.uint64))
        rng = np.random.Generator(np.random.PCG64(s_split))
        test_mask = np.zeros(len(y), dtype=bool)
        for cls in (0, 1):
            ci = np.flatnonzero(y == cls)
            if len(ci) < 2:
                raise InsufficientDataError(
                    f"need at least 2 rows of class {cls} to split, have {len(ci)}"
                )
            perm = rng.permutation(ci)
            n_test = max(1, round(TEST_FRACTION * len(ci)))
            test_mask[perm[:n_test]] = True
        scaler = standardize_fit(X[~test_mask])
        Xtr = scaler.transform(X[~test_mask])
        ytr = y[~test_mask]
        Xte = scaler.transform(X[test_mask])
        yte = y[test_mask]
        if config.balance:
            Xb, yb = balance(Xtr, ytr, s_balance)
        else:
            Xb, yb = Xtr, ytr
        cost = cross_validate_cost(Xb, yb, replace(config, seed=s_cv))
        w, b = solve_l1(Xb, yb, cost, config.solver_tol, config.max_iter)
        train_pred = (Xb @ w + b) >= 0.0
        train_acc = float((train_pred == (yb == 1)).mean())
        s_te = sigmoid(Xte @ w + b)
        acc, prec, rec = _binary_metrics(s_te >= 0.5, yte == 1)
        scored = tuple(
            ScoredTap(
                tap_id=int(tid),
                s=float(sv),
                truth=TapLabel.SINGLE if t == 1 else TapLabel.DOUBLE_FIRST,
            )
            for tid, sv, t in zip(tap_ids[test_mask], s_te, yte)
        )
        rounds.append(
            RoundResult(
                index=r,
                cost=cost,
                w=w,
                b=b,
                scaler=scaler,
                train_accuracy=train_acc,
                test_accuracy=acc,
                test_precision=prec,
                test_recall=rec,
                scored_test=scored,
            )
        )
    final = rounds[-1]
    model = ModelWeights(w=final.w, b=final.b, scaler=final.scaler, profile=profile, pat=pat)
    report = TrainReport(
        rounds=tuple(rounds),
        mean_test_accuracy=float(np.mean([r.test_accuracy for r in rounds])),
        mean_test_precision=float(np.mean([r.test_precision for r in rounds])),
        mean_test_recall=float(np.mean([r.test_recall for r in rounds])),
    )
    return model, report


def train(
    labeled: list[LabeledTap],
    profile: DeviceProfile,
    config: TrainConfig,
    pat: float = 0.65,
) -> tuple[ModelWeights, TrainReport]:
    """Train on labeled taps; trailing double taps are excluded first."""
    primary = [lt for lt in labeled if lt.role is TapRole.PRIMARY]
    if not primary:
        raise ClassBalanceError("no primary taps to train on")
    X = feature_matrix([lt.tap for lt in primary], profile)
    y = np.array([1 if lt.label is TapLabel.SINGLE else 0 for lt in primary])
    tap_ids = np.array([lt.tap.id for lt in primary])
    return train_rows(X, y, tap_ids, profile, config, pat)


def score(model: ModelWeights, fv: FeatureVector) -> float:
    """Confidence that a raw (unstandardized) feature vector is a single tap."""
    z = model.scaler.transform(fv.values)
    return float(sigmoid(float(z @ model.w) + model.b))


def score_matrix(model: ModelWeights, X_raw: np.ndarray) -> np.ndarray:
    """Vectorized ``score`` over raw feature rows."""
    Z = model.scaler.transform(X_raw)
    return sigmoid(Z @ model.w + model.b)


def decide(model: ModelWeights, s: float) -> Decision:
    """Fire a single tap immediately iff the score clears the threshold.

    The boundary s == pat counts as a single tap.
    """
    return Decision.SINGLE_TAP_NOW if s >= model.pat else Decision.WAIT_FOR_SECOND_TAP


def tune_pat(scored: list[ScoredTap]) -> float:
    """Smallest activation threshold with zero false-positive singles.

    Scans held-out scored taps with ground truth: the threshold must
    exceed every true double-first's score, clamped into [0.5, 1).
    """
    if any(st.truth is None for st in scored):
        raise TruthMissingError("tune_pat needs ground-truth labels on every tap")
    doubles = [st.s for st in scored if st.truth is TapLabel.DOUBLE_FIRST]
    if not doubles:
        return 0.5
    pat = max(0.5, float(np.nextafter(max(doubles), 1.0)))
    return min(pat, float(np.nextafter(1.0, 0.0)))
