"""Acceptance gate: every criterion at its stated tolerance.

Each test prints one [PASS]/[FAIL] line (use -s to see them inline).
Oracles are built independently of the code paths they check: a literal
grid scan validates the collapsed grid oracle, permutation enumeration
rebuilds the U distribution, and the sort-and-slice extractor is a
separate formulation of the top-n% rule.
"""
import itertools
import math
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from quicktap.classifier import (
    ModelWeights,
    ScoredTap,
    TrainConfig,
    kkt_violation,
    l1_objective,
    smooth_grad,
    smooth_loss,
    solve_l1,
    train,
)
from quicktap.cli import run as cli_run
from quicktap.confidence import accuracy_curve, roc_auc, top_n_extract
from quicktap.features import DeviceProfile
from quicktap.replay import (
    LatencyConfig,
    OutcomeCell,
    conventional_replay,
    replay,
)
from quicktap.stats import magnitude_descriptor, mann_whitney_u
from quicktap.synth import SynthConfig, generate
from quicktap.taps import TapLabel

from conftest import constant_model


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"[FAIL] {name}")
        raise
    print(f"[PASS] {name}")


def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


# ---------------------------------------------------------------- solver ---


def test_l1_solver_optimality():
    """KKT subgradient check at 1e-4 on 50 random datasets, gradients
    verified against central finite differences."""
    with criterion("L1 solver optimality (50 datasets, KKT tol 1e-4, FD 1e-5)"):
        t0 = time.monotonic()
        rng = np.random.default_rng(2024)
        for _ in range(50):
            n = int(rng.integers(10, 201))
            d = int(rng.integers(1, 12))
            X = rng.normal(size=(n, d)) * rng.uniform(0.3, 3.0, size=d)
            y = (rng.random(n) > rng.uniform(0.25, 0.75)).astype(int)
            y[0], y[1] = 0, 1
            cost = float(10 ** rng.uniform(-2, 2))
            w, b = solve_l1(X, y, cost, tol=1e-5, max_iter=300)
            assert kkt_violation(X, y, w, b, cost) <= 1e-4
            # analytic gradient of the smooth part vs central differences
            gw, gb = smooth_grad(X, y, w, b)
            eps = 1e-6
            for j in range(d):
                wp, wm = w.copy(), w.copy()
                wp[j] += eps
                wm[j] -= eps
                fd = (smooth_loss(X, y, wp, b) - smooth_loss(X, y, wm, b)) / (2 * eps)
                assert abs(gw[j] - fd) <= 1e-5
            fd_b = (smooth_loss(X, y, w, b + eps) - smooth_loss(X, y, w, b - eps)) / (2 * eps)
            assert abs(gb - fd_b) <= 1e-5
        elapsed = time.monotonic() - t0
        assert elapsed < 30.0, f"took {elapsed:.1f}s"


def _grid_min_literal(X, y, cost, step):
    """Brute force over the full (w1, w2, b) grid, no shortcuts."""
    grid = np.round(np.arange(-5.0, 5.0 + step / 2, step), 10)
    ypm = (2.0 * y - 1.0).astype(np.float64)
    lam = 1.0 / cost
    best = math.inf
    for w1 in grid:
        for w2 in grid:
            m = ypm * (X[:, 0] * w1 + X[:, 1] * w2)
            mm = m[None, :] + ypm[None, :] * grid[:, None]
            obj = np.logaddexp(0.0, -mm).sum(axis=1) + lam * (abs(w1) + abs(w2))
            v = float(obj.min())
            if v < best:
                best = v
    return best


def _grid_min_collapsed(X, y, cost, step):
    """Exact minimum over the same grid, collapsing the intercept axis.

    For fixed (w1, w2) the objective is strictly convex in b, so its
    minimum over the b-grid sits at a grid point adjacent to the
    continuous argmin, located here by bisection on the derivative. A
    one-point guard band each side covers bisection rounding.
    """
    grid = np.round(np.arange(-5.0, 5.0 + step / 2, step), 10)
    g = len(grid)
    ypm = (2.0 * y - 1.0).astype(np.float64)
    lam = 1.0 / cost
    # margins without b for every (w1, w2) pair: (g*g, n)
    m12 = (grid[:, None, None] * X[:, 0][None, None, :]
           + grid[None, :, None] * X[:, 1][None, None, :]).reshape(g * g, -1)
    # bisection only needs to localize the continuous argmin to within one
    # grid step (the +-1 guard band below absorbs the rest), so 12 rounds
    # in float32 are plenty; objective values stay float64 throughout
    m32 = m12.astype(np.float32)
    y32 = ypm.astype(np.float32)
    lo = np.full(g * g, -5.0, dtype=np.float32)
    hi = np.full(g * g, 5.0, dtype=np.float32)
    for _ in range(12):
        mid = 0.5 * (lo + hi)
        deriv = (-y32[None, :] * _sigmoid(-y32[None, :] * (m32 + mid[:, None]))).sum(axis=1)
        going_up = deriv > 0.0
        hi = np.where(going_up, mid, hi)
        lo = np.where(going_up, lo, mid)
    bstar = (0.5 * (lo + hi)).astype(np.float64)
    k = np.clip(np.floor((bstar + 5.0) / step).astype(int), 0, g - 1)
    pen = lam * (np.abs(grid)[:, None] + np.abs(grid)[None, :]).reshape(g * g)
    best = np.full(g * g, math.inf)
    for kk in (np.clip(k - 1, 0, g - 1), k, np.clip(k + 1, 0, g - 1)):
        bv = grid[kk]
        obj = np.logaddexp(0.0, -ypm[None, :] * (m12 + bv[:, None])).sum(axis=1)
        best = np.minimum(best, obj)
    return float((best + pen).min())


def test_solver_oracle_equivalence():
    """Solver objective within 1e-2 of the exhaustive grid minimum
    (grid [-5,5], step 0.01, over w1, w2, b) on 20 tiny datasets."""
    with criterion("solver vs brute-force grid oracle (20 datasets, +1e-2)"):
        t0 = time.monotonic()
        rng = np.random.default_rng(77)
        # first prove the collapsed oracle equals a literal full scan
        for _ in range(3):
            n = int(rng.integers(3, 7))
            X = rng.uniform(-2, 2, size=(n, 2))
            y = (rng.random(n) > 0.5).astype(int)
            y[0], y[-1] = 0, 1
            cost = float(10 ** rng.uniform(-1, 1))
            lit = _grid_min_literal(X, y, cost, step=0.05)
            col = _grid_min_collapsed(X, y, cost, step=0.05)
            assert abs(lit - col) <= 1e-9, (lit, col)
        # now the real check at step 0.01
        for _ in range(20):
            n = int(rng.integers(3, 7))
            X = rng.uniform(-2, 2, size=(n, 2))
            y = (rng.random(n) > 0.5).astype(int)
            y[0], y[-1] = 0, 1
            cost = float(10 ** rng.uniform(-1, 1))
            w, b = solve_l1(X, y, cost, tol=1e-8, max_iter=300)
            ours = l1_objective(X, y, w, b, cost)
            oracle = _grid_min_collapsed(X, y, cost, step=0.01)
            assert ours <= oracle + 1e-2, (ours, oracle)
        elapsed = time.monotonic() - t0
        assert elapsed < 120.0, f"took {elapsed:.1f}s"


# ------------------------------------------------------------ confidence ---


def _oracle_top_n(items, n_percent):
    k = math.ceil(n_percent / 100.0 * len(items))
    ranked = sorted(range(len(items)), key=lambda i: (-abs(items[i].s - 0.5), i))
    chosen = set(ranked[:k])
    return [st for i, st in enumerate(items) if i in chosen]


def test_top_n_extraction_conformance():
    """1000 random scored sets match the independent sort-and-slice oracle
    exactly, ties included; subsets are nested across n."""
    with criterion("top-n% extraction conformance (1000 sets + nestedness)"):
        rng = np.random.default_rng(31)
        grid = [5, 10, 20, 25, 33, 50, 75, 90, 100]
        for _ in range(1000):
            n = int(rng.integers(1, 25))
            decimals = int(rng.integers(1, 3))  # coarse rounding forces ties
            items = [
                ScoredTap(i, float(v), None)
                for i, v in enumerate(np.round(rng.random(n), decimals))
            ]
            pct = float(rng.uniform(0.5, 100.0))
            assert top_n_extract(items, pct) == _oracle_top_n(items, pct)
            prev = set()
            for n_pct in grid:
                ids = {st.tap_id for st in top_n_extract(items, n_pct)}
                assert prev <= ids
                prev = ids


# -------------------------------------------------------- accuracy trend ---

N_GRID = [10, 20, 30, 40, 50, 60, 70, 80, 90, 100]
SYNTH_SEED = 1234


def _train_17_users():
    traces = generate(SynthConfig(users=17, taps_per_user=400, seed=SYNTH_SEED))
    curves = []
    scored_sets = []
    for tr in traces:
        _, report = train(
            list(tr.labeled), DeviceProfile.LAPTOP, TrainConfig(seed=1000 + tr.user_id)
        )
        scored = report.pooled_scored_test()
        scored_sets.append(scored)
        curves.append([p.accuracy for p in accuracy_curve(scored, N_GRID)])
    return np.array(curves), scored_sets


def test_accuracy_vs_n_trend():
    """Within-user models on planted data: accuracy 1.0 at n=10% for every
    user, mean >= 0.95 at n=50%, and a near-monotone curve."""
    with criterion(
        "accuracy-vs-n trend (17 users x 400 taps: 1.0 @ n=10, >=0.95 @ n=50)"
    ):
        t0 = time.monotonic()
        curves, scored_sets = _train_17_users()
        assert np.all(curves[:, N_GRID.index(10)] == 1.0)
        mean_curve = curves.mean(axis=0)
        assert mean_curve[N_GRID.index(50)] >= 0.95
        for a, b in zip(mean_curve, mean_curve[1:]):
            assert b <= a + 0.02
        elapsed = time.monotonic() - t0
        assert elapsed < 60.0, f"took {elapsed:.1f}s"


def test_roc_sanity():
    """AUC high on planted data, chance-level without separation, and equal
    to the rank-sum statistic over n1*n2."""
    with criterion("ROC sanity (planted >= 0.95, null in [0.45, 0.55], AUC = U/n1n2)"):
        tr = generate(SynthConfig(users=1, taps_per_user=400, seed=SYNTH_SEED))[0]
        _, report = train(list(tr.labeled), DeviceProfile.LAPTOP, TrainConfig(seed=5))
        scored = report.pooled_scored_test()
        _, auc = roc_auc(scored)
        assert auc >= 0.95

        tr0 = generate(
            SynthConfig(users=1, taps_per_user=2000, seed=99, separation=0.0)
        )[0]
        _, report0 = train(list(tr0.labeled), DeviceProfile.LAPTOP, TrainConfig(seed=5))
        _, auc0 = roc_auc(report0.pooled_scored_test())
        assert 0.45 <= auc0 <= 0.55

        rng = np.random.default_rng(8)
        for scored_set in (scored, report0.pooled_scored_test()):
            pos = np.array([st.s for st in scored_set if st.truth is TapLabel.SINGLE])
            neg = np.array([st.s for st in scored_set if st.truth is TapLabel.DOUBLE_FIRST])
            _, auc_v = roc_auc(scored_set)
            u = mann_whitney_u(pos, neg).u
            assert abs(auc_v - u / (len(pos) * len(neg))) <= 1e-9
        for _ in range(30):
            n1 = int(rng.integers(2, 40))
            n2 = int(rng.integers(2, 40))
            sp = np.round(rng.random(n1), 1)
            sn = np.round(rng.random(n2), 1)
            items = [ScoredTap(i, float(v), TapLabel.SINGLE) for i, v in enumerate(sp)]
            items += [
                ScoredTap(n1 + i, float(v), TapLabel.DOUBLE_FIRST)
                for i, v in enumerate(sn)
            ]
            _, auc_v = roc_auc(items)
            u = mann_whitney_u(sp, sn).u
            assert abs(auc_v - u / (n1 * n2)) <= 1e-9


# ----------------------------------------------------------------- replay ---


def _one_single_one_double():
    from conftest import make_tap
    from quicktap.taps import label_taps

    taps = [
        make_tap(0, 0, 100_000),
        make_tap(1, 2_000_000, 2_080_000),
        make_tap(2, 2_300_000, 2_360_000),
    ]
    return label_taps(taps, 500_000)


def test_latency_accounting_exact():
    """Cell-A latency and reduction are exact integers per profile."""
    with criterion(
        "latency accounting (17980/482020 us smartphone, 12000 us touchpad, "
        "500000 us conventional; zero tolerance)"
    ):
        for profile, expect in (
            (DeviceProfile.SMARTPHONE, 17_980),
            (DeviceProfile.LAPTOP, 12_000),
        ):
            labeled = _one_single_one_double()
            cfg = LatencyConfig.for_profile(profile)
            model = constant_model(profile, logit=40.0)  # always fires
            rep = replay(labeled, model, cfg)
            single = next(o for o in rep.outcomes if o.truth is TapLabel.SINGLE)
            assert single.cell is OutcomeCell.A_LATENCY_REDUCED
            assert single.latency_us == expect
            assert cfg.double_tap_threshold_us - single.latency_us == 500_000 - expect
            base = conventional_replay(labeled, cfg)
            base_single = next(o for o in base.outcomes if o.truth is TapLabel.SINGLE)
            assert base_single.latency_us == 500_000
            assert base.mean_single_latency_conventional_us == 500_000.0
        # the quoted smartphone reduction
        labeled = _one_single_one_double()
        cfg = LatencyConfig.for_profile(DeviceProfile.SMARTPHONE)
        rep = replay(labeled, constant_model(DeviceProfile.SMARTPHONE, 40.0), cfg)
        single = next(o for o in rep.outcomes if o.truth is TapLabel.SINGLE)
        assert 500_000 - single.latency_us == 482_020


def test_outcome_cell_semantics():
    """Cells B and D emit at exactly the conventional times; raising the
    activation threshold monotonically shrinks the fired cells A+C."""
    with criterion("outcome-cell semantics (B/D parity, A+C monotone in PAT)"):
        tr = generate(SynthConfig(users=1, taps_per_user=300, seed=41))[0]
        labeled = list(tr.labeled)
        cfg = LatencyConfig.for_profile(DeviceProfile.LAPTOP)
        model, _ = train(labeled, DeviceProfile.LAPTOP, TrainConfig(rounds=1, seed=3))
        base = conventional_replay(labeled, cfg)
        base_by_id = {o.tap_id: o for o in base.outcomes}
        prev_fired = None
        for pat in (0.5, 0.55, 0.65, 0.75, 0.85, 0.95, 0.999):
            m = ModelWeights(
                w=model.w, b=model.b, scaler=model.scaler,
                profile=model.profile, pat=min(pat, np.nextafter(1.0, 0.0)),
            )
            rep = replay(labeled, m, cfg)
            for o in rep.outcomes:
                if o.cell in (
                    OutcomeCell.B_SAME_AS_CONVENTIONAL,
                    OutcomeCell.D_SAME_AS_CONVENTIONAL,
                ):
                    assert o.emit_t_us == base_by_id[o.tap_id].emit_t_us
                    assert o.fired_kind is base_by_id[o.tap_id].fired_kind
            fired = (
                rep.cell_counts[OutcomeCell.A_LATENCY_REDUCED]
                + rep.cell_counts[OutcomeCell.C_UNINTENTIONAL_INPUT]
            )
            if prev_fired is not None:
                assert fired <= prev_fired
            prev_fired = fired


# ------------------------------------------------------------------ stats ---


def _oracle_u_and_p(a, b):
    pooled = list(a) + list(b)
    n1, n2 = len(a), len(b)
    n = n1 + n2

    def u_of(subset):
        u = 0.0
        for i in subset:
            for j in range(n):
                if j in subset:
                    continue
                if pooled[i] > pooled[j]:
                    u += 1.0
                elif pooled[i] == pooled[j]:
                    u += 0.5
        return u

    u_obs = u_of(set(range(n1)))
    hi = max(u_obs, n1 * n2 - u_obs)
    lo = n1 * n2 - hi
    total = extreme = 0
    for combo in itertools.combinations(range(n), n1):
        u = u_of(set(combo))
        total += 1
        if u >= hi or u <= lo:
            extreme += 1
    return u_obs, min(1.0, extreme / total)


def test_mann_whitney_exactness():
    """U and exact p reproduce full permutation enumeration for all sample
    sizes with n1+n2 <= 10; the 0.607 effect size reads Medium."""
    with criterion("Mann-Whitney exactness (200 samples, n1+n2 <= 10) + d=0.607 Medium"):
        rng = np.random.default_rng(55)
        done = 0
        while done < 200:
            n1 = int(rng.integers(1, 10))
            n2 = int(rng.integers(1, 11 - n1))
            a = list(rng.integers(0, 6, size=n1))
            b = list(rng.integers(0, 6, size=n2))
            r = mann_whitney_u(a, b)
            assert r.exact
            u_oracle, p_oracle = _oracle_u_and_p(a, b)
            assert r.u == u_oracle
            assert abs(r.p_two_sided - p_oracle) <= 1e-12
            done += 1
        assert magnitude_descriptor(0.607) == "Medium"
        assert magnitude_descriptor(-0.607) == "Medium"


# ----------------------------------------------------------- determinism ---


def test_end_to_end_determinism(tmp_path, monkeypatch):
    """gen -> train -> eval -> replay twice under one seed: byte-identical."""
    with criterion("end-to-end determinism (byte-identical artifact trees)"):
        trees = []
        for name in ("a", "b"):
            root = tmp_path / name
            root.mkdir()
            monkeypatch.chdir(root)
            for argv in (
                ["gen", "--out-dir", "traces", "--users", "2", "--taps", "120",
                 "--seed", "7"],
                ["train", "--traces", "traces", "--out-dir", "model",
                 "--seed", "11", "--rounds", "2", "--cv-folds", "5"],
                ["eval", "--traces", "traces", "--out-dir", "eval",
                 "--seed", "13", "--rounds", "1", "--cv-folds", "5",
                 "--n-grid", "10,50,100"],
                ["replay", "--traces", "traces", "--model", "model/model.json",
                 "--out-dir", "replay"],
            ):
                assert cli_run(argv) == 0
            trees.append({
                str(p.relative_to(root)): p.read_bytes()
                for p in sorted(root.rglob("*")) if p.is_file()
            })
        assert trees[0].keys() == trees[1].keys()
        for key in trees[0]:
            assert trees[0][key] == trees[1][key], f"{key} differs between runs"


def test_demo_exported_trace_parses():
    """[SECONDARY support] a trace exported by the webdemo's recorder parses
    cleanly with read_trace."""
    fixture = Path(__file__).resolve().parents[1] / "frontend" / "fixtures" / \
        "demo_export.trace.jsonl"
    if not fixture.exists():
        pytest.skip("webdemo export fixture not built yet (run npm test in frontend/)")
    with criterion("webdemo-exported trace parses with read_trace"):
        from quicktap.store import read_trace

        header, samples = read_trace(fixture)
        assert samples, "exported trace should contain samples"
        assert header.device_profile is DeviceProfile.SMARTPHONE
