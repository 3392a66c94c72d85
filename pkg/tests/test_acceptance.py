"""Acceptance checks, one test per criterion.

Each test prints a single ``[criterion N] PASS|FAIL ...`` line with the
measured numbers; the lines are repeated in the pytest terminal summary.
Tolerances are exactly the stated ones.  Slow criteria cache their
imputation runs so shared configurations are computed once.
"""
import functools
import os
import subprocess
import sys
import time

import numpy as np
import pytest
from hypothesis import HealthCheck, assume, given, settings, strategies as st

from fsimpute.amputation import AmputationConfig, ampute
from fsimpute.baselines import BaselineConfig, impute_knn, impute_mean, impute_mice, impute_svd
from fsimpute.data import UnimputableColumnError, encode
from fsimpute.harness import impute_matrix
from fsimpute.imputer import IfganConfig, delta, impute
from fsimpute.metrics import auroc, cv_auroc, rmse
from fsimpute.nn import MlpSpec, TrainConfig, mlp_init, gradient_check
from fsimpute.numerics import RngStream
from fsimpute.synthetic import as_dataset, linear_blend, logistic_labeled, low_rank

from conftest import ACCEPTANCE_LINES, random_mask
from oracles import auroc_pairs, delta_oracle, knn_oracle, mean_oracle, rmse_oracle

ROOT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..")
SEEDS = range(5)


def report(n, ok, detail):
    line = f"[criterion {n:2d}] {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


# shared fixtures for criteria 5-8: the linear-blend dataset (N=1000, d=8, sigma=0.05)

@functools.lru_cache(maxsize=None)
def blend():
    return linear_blend(n=1000, d=8, noise=0.05, seed=0)


@functools.lru_cache(maxsize=None)
def blend_run(mechanism, t, seed, method):
    x = blend()
    rng = RngStream(seed)
    amp = ampute(x, AmputationConfig(mechanism, t, rng.child("ampute")))
    start = time.perf_counter()
    out, _ = impute_matrix(method, amp.x_hat, amp.mask, rng=rng.child("impute"))
    return rmse(x, out, amp.mask), time.perf_counter() - start


def test_criterion_01_gradient_correctness():
    start = time.perf_counter()
    worst, checks = 0.0, 0
    for s in range(20):
        g = RngStream(100).child("mlp", s)
        d_in = int(g.integers(1, 7))
        hidden = tuple(int(h) for h in g.integers(1, 9, size=int(g.integers(1, 3))))
        d_out = int(g.integers(1, 3))
        net = mlp_init(MlpSpec(d_in, hidden, d_out), g.child("init"))
        assert net.n_params <= 500
        batch = g.uniform(size=(int(g.integers(2, 12)), d_in))
        for kind in ("continuous", "binary", "discriminator"):
            cols = 1 if kind == "discriminator" else d_out
            if kind == "discriminator" and d_out != 1:
                net_k = mlp_init(MlpSpec(d_in, hidden, 1), g.child("init-d"))
            else:
                net_k = net
            target = g.uniform(size=(batch.shape[0], cols))
            if kind != "continuous":
                target = (target > 0.5).astype(float)
            for lam in (0.0, 0.5):
                worst = max(worst, gradient_check(net_k, batch, target, kind, lam))
                checks += 1
    elapsed = time.perf_counter() - start
    report(1, worst < 1e-5 and elapsed < 10,
           f"gradient check: {checks} checks on 20 MLPs, max rel err {worst:.2e} (< 1e-5), {elapsed:.2f}s (< 10s)")


def test_criterion_02_amputation_statistics():
    start = time.perf_counter()
    x = RngStream(2).uniform(size=(10000, 10))
    mcar = ampute(x, AmputationConfig("MCAR", 0.3, RngStream(3))).raw_missing.mean()
    bands = []
    for mech in ("MAR", "MNAR"):
        res = ampute(x, AmputationConfig(mech, 0.5, RngStream(4).child(mech)))
        frac = res.raw_missing.mean(axis=0)
        gated = list(res.provenance["gated"])
        ungated = [j for j in range(10) if j not in gated]
        bands.append((mech, frac[gated].min(), frac[gated].max(), frac[ungated].min(), frac[ungated].max()))
    elapsed = time.perf_counter() - start
    ok = 0.29 <= mcar <= 0.31 and elapsed < 5
    ok = ok and all(0.23 <= glo and ghi <= 0.27 and 0.48 <= ulo and uhi <= 0.52 for _, glo, ghi, ulo, uhi in bands)
    detail = f"MCAR t=0.3 fraction {mcar:.4f} in [0.29,0.31]; " + "; ".join(
        f"{m} gated [{a:.3f},{b:.3f}] ungated [{c:.3f},{d:.3f}]" for m, a, b, c, d in bands)
    report(2, ok, detail + f"; {elapsed:.2f}s (< 5s)")


def test_criterion_03_oracle_equivalence():
    errs = {"mean": 0.0, "delta": 0.0, "rmse": 0.0}
    knn_exact = auroc_exact = 0
    for s in range(50):
        g = np.random.default_rng(3000 + s)
        n, d = int(g.integers(6, 16)), int(g.integers(2, 6))
        x = g.uniform(size=(n, d))
        m = random_mask(g, n, d)
        errs["mean"] = max(errs["mean"], np.abs(impute_mean(x, m) - mean_oracle(x, m)).max())
        k = int(g.integers(1, 4))
        knn_exact += np.array_equal(impute_knn(x, m, BaselineConfig(knn_k=k)), knn_oracle(x, m, k))
        y = g.uniform(size=(n, d))
        errs["delta"] = max(errs["delta"], abs(delta(y, x) - delta_oracle(y, x)))
        errs["rmse"] = max(errs["rmse"], abs(rmse(x, y, m) - rmse_oracle(x, y, m)) if (~m).any() else 0.0)
        scores = g.integers(0, 5, size=n) / 4.0
        labels = np.r_[0, 1, g.integers(0, 2, size=n - 2)]
        auroc_exact += auroc(scores, labels) == auroc_pairs(scores, labels)
    ok = max(errs.values()) < 1e-12 and knn_exact == 50 and auroc_exact == 50
    report(3, ok, f"50 instances: mean {errs['mean']:.1e}, delta {errs['delta']:.1e}, rmse {errs['rmse']:.1e} "
                  f"(< 1e-12); KNN exact {knn_exact}/50; AUROC exact {auroc_exact}/50")


def test_criterion_04_svd_recovery():
    scores = []
    for s in SEEDS:
        x = low_rank(200, 20, 2, seed=s)
        amp = ampute(x, AmputationConfig("MCAR", 0.2, RngStream(s).child("ampute")))
        out = impute_svd(amp.x_hat, amp.mask, BaselineConfig(svd_rank=2))
        scores.append(rmse(x, out, amp.mask))
    report(4, max(scores) < 0.05, f"rank-2 200x20, 20% MCAR: SVD RMSE per seed {np.round(scores, 4).tolist()} (< 0.05)")


@pytest.mark.slow
def test_criterion_05_linear_structure_recovery():
    start = time.perf_counter()
    mean_r, _ = blend_run("MCAR", 0.3, 0, "mean")
    mice_r, _ = blend_run("MCAR", 0.3, 0, "mice")
    ifgan_r, _ = blend_run("MCAR", 0.3, 0, "ifgan")
    elapsed = time.perf_counter() - start
    ok = mice_r < 0.5 * mean_r and ifgan_r < 0.5 * mean_r and elapsed < 600
    report(5, ok, f"30% MCAR: mean {mean_r:.4f}, MICE {mice_r:.4f} ({mice_r / mean_r:.2f}x), "
                  f"IFGAN {ifgan_r:.4f} ({ifgan_r / mean_r:.2f}x) (< 0.5x); {elapsed:.1f}s (< 600s)")


@pytest.mark.slow
def test_criterion_06_discriminator_ablation():
    full = [blend_run("MCAR", 0.3, s, "ifgan")[0] for s in SEEDS]
    nod = [blend_run("MCAR", 0.3, s, "ifgan-nodisc")[0] for s in SEEDS]
    report(6, np.mean(full) <= np.mean(nod),
           f"5 seeds: mean RMSE full {np.mean(full):.6f} vs without D {np.mean(nod):.6f} (full <= without D); "
           f"per-seed diff {np.round(np.subtract(full, nod), 6).tolist()}")


@pytest.mark.slow
def test_criterion_07_mechanism_robustness():
    parts, ok = [], True
    for mech in ("MAR", "MNAR"):
        m, _ = blend_run(mech, 0.5, 0, "mean")
        f, _ = blend_run(mech, 0.5, 0, "ifgan")
        ok = ok and f <= 0.7 * m
        parts.append(f"{mech} IFGAN {f:.4f} vs mean {m:.4f} ({f / m:.2f}x)")
    report(7, ok, "t=0.5: " + "; ".join(parts) + " (<= 0.7x)")


@pytest.mark.slow
def test_criterion_08_missing_rate_monotonicity():
    rates = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7)
    ifg = [blend_run("MCAR", t, 0, "ifgan")[0] for t in rates]
    mean = [blend_run("MCAR", t, 0, "mean")[0] for t in rates]
    ok = ifg[-1] > ifg[0] and all(f <= m for f, m in zip(ifg, mean))
    report(8, ok, f"IFGAN {np.round(ifg, 4).tolist()} vs mean {np.round(mean, 4).tolist()} "
                  f"(t=0.7 > t=0.1 and IFGAN <= mean at every t)")


@pytest.mark.slow
def test_criterion_09_post_imputation_ordering():
    gaps = []
    for s in SEEDS:
        x, y = logistic_labeled(n=2000, d=8, seed=s)
        rng = RngStream(s)
        amp = ampute(x, AmputationConfig("MCAR", 0.3, rng.child("ampute")))
        scores = {}
        for method in ("ifgan", "mean"):
            out, _ = impute_matrix(method, amp.x_hat, amp.mask, rng=rng.child("impute"))
            scores[method] = cv_auroc(out, y, 5, rng.child("folds"))
        gaps.append(scores["ifgan"] - scores["mean"])
    report(9, min(gaps) >= -0.01,
           f"5 seeds, 5 folds: AUROC(IFGAN) - AUROC(mean) per seed {np.round(gaps, 4).tolist()} (>= -0.01)")


@pytest.mark.slow
def test_criterion_10_determinism(tmp_path):
    config = os.path.join(ROOT, "configs", "benchmark_example.yaml")
    outs = []
    for run in ("a", "b"):
        report_path, summary_path = tmp_path / f"{run}.jsonl", tmp_path / f"{run}.csv"
        r = subprocess.run([sys.executable, "-m", "fsimpute.cli", "benchmark", "--config", config,
                            "--out", str(report_path), "--summary", str(summary_path)],
                           capture_output=True, text=True)
        assert r.returncode == 0, r.stderr
        outs.append((report_path.read_bytes(), summary_path.read_bytes()))
    same = outs[0] == outs[1] and len(outs[0][0]) > 0
    report(10, same, f"benchmark CLI run twice: report {len(outs[0][0])} bytes, summary {len(outs[0][1])} bytes, "
                     f"byte-identical {same}")


# criterion 11: property tests

N_CASES = 1000
TINY = IfganConfig(train=TrainConfig(generator_steps=3, discriminator_steps=1, batch_size=8,
                                     learning_rate=0.05, hidden_width=4),
                   max_sweeps=2, record_batches=True)
counts = {"preservation": 0, "range": 0, "anti-leakage": 0, "mask": 0}


@settings(max_examples=N_CASES, deadline=None, derandomize=True, suppress_health_check=list(HealthCheck))
@given(st.integers(4, 16), st.integers(2, 4), st.floats(0.1, 0.6), st.integers(0, 2**32 - 1))
def _imputer_invariants(n, d, rate, seed):
    g = np.random.default_rng(seed)
    x = g.uniform(size=(n, d))
    m = random_mask(g, n, d, rate)
    res = impute(np.where(m, x, 0.0), m, TINY, RngStream(seed))
    outs = [res.x, impute_mean(x, m), impute_knn(x, m, BaselineConfig(knn_k=3)),
            impute_svd(x, m, BaselineConfig(svd_rank=1)), impute_mice(x, m)]
    assert all(np.array_equal(o[m], x[m]) for o in outs)
    counts["preservation"] += 1
    filled = res.x[~m]
    assert ((filled > 0) & (filled < 1)).all()
    counts["range"] += 1
    for kind, k, rows, target in res.batch_log:
        if kind == "G":
            assert m[rows, k].all()
        elif kind == "A":
            assert not m[rows, k].any()
        else:
            assert np.array_equal(target, 1.0 - m[rows, k])
    counts["anti-leakage"] += 1


@settings(max_examples=N_CASES, deadline=None, derandomize=True, suppress_health_check=list(HealthCheck))
@given(st.sampled_from(["MCAR", "MAR", "MNAR"]), st.integers(3, 20), st.floats(0.05, 0.7),
       st.integers(0, 2**32 - 1))
def _mask_consistency(mech, n, t, seed):
    g = np.random.default_rng(seed)
    raw = np.column_stack([g.uniform(size=n), g.integers(0, 3, n), g.uniform(size=n), g.integers(0, 2, n)])
    enc = encode(as_dataset(raw, categorical={1: ("a", "b", "c"), 3: ("n", "y")}))
    try:
        res = ampute(enc.x, AmputationConfig(mech, t, RngStream(seed)), enc.map)
    except UnimputableColumnError:
        # retries can run out on tiny tables; draw another case instead
        assume(False)
    for k, c in enumerate(enc.map.columns):
        block = res.mask[:, c.span]
        assert (block == ~res.raw_missing[:, [k]]).all()
    assert res.mask.any(axis=0).all()
    assert (res.x_hat[~res.mask] == 0).all()
    assert np.array_equal(res.x_hat[res.mask], enc.x[res.mask])
    counts["mask"] += 1


def test_criterion_11_invariant_suite():
    _imputer_invariants()
    _mask_consistency()
    ok = all(v >= N_CASES for v in counts.values())
    report(11, ok, "randomized cases: " + ", ".join(f"{k} {v}" for k, v in counts.items()) + f" (each >= {N_CASES})")
