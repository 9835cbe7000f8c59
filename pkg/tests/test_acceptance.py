"""End-to-end acceptance gate.

One test per acceptance criterion, in order; each prints a single
summary line on success. Criteria 6 and 7 are qualitative shape checks
on synthetic data; the rest are oracle or calibration checks with hard
tolerances. Criterion 8 runs the full pipeline twice at scale and is by
far the slowest item in the suite.
"""

import json
import time
from dataclasses import replace
from functools import lru_cache

import numpy as np
import pytest

from compnet.community import modularity, modularity_zscore, optimize_modularity, project
from compnet.matrices import CountMatrix, default_ids
from compnet.nestedness import nodf, temperature
from compnet.nullmodels import derive_seed, ensemble_stats, fit_bicm, fit_er, sample
from compnet.pipeline import PipelineConfig, _dump_json, run_year

from conftest import brute_nodf, make_bipartite, planted_blocks, staircase


def test_criterion_1_nodf_bruteforce_equivalence():
    start = time.perf_counter()
    worst = 0.0
    for bits in range(512):
        M = ((bits >> np.arange(9)) & 1).astype(np.int8).reshape(3, 3)
        worst = max(worst, abs(nodf(make_bipartite(M)).nodf_total - brute_nodf(M)))
    rng = np.random.default_rng(1)
    for _ in range(200):
        M = (rng.random((6, 6)) < rng.uniform(0.15, 0.85)).astype(np.int8)
        worst = max(worst, abs(nodf(make_bipartite(M)).nodf_total - brute_nodf(M)))
    elapsed = time.perf_counter() - start
    assert worst <= 1e-12
    assert elapsed < 10.0
    print(f"criterion 1 PASS: 712 matrices, max |diff| {worst:.2e}, {elapsed:.1f}s")


def test_criterion_2_perfect_nestedness_fixed_points():
    for n in range(3, 11):
        res = nodf(make_bipartite(staircase(n)))
        assert res.nodf_total == 100.0
        t = temperature(make_bipartite(staircase(n)))
        assert t.temperature < 1.0
    for n in range(3, 7):
        assert nodf(make_bipartite(np.eye(n, dtype=np.int8))).nodf_total == 0.0
    print("criterion 2 PASS: staircases NODF=100, T<1; identities NODF=0")


def test_criterion_3_bicm_constraint_satisfaction():
    rng = np.random.default_rng(3)
    start = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        n_r = int(rng.integers(8, 51))
        n_c = int(rng.integers(8, 81))
        M = (rng.random((n_r, n_c)) < rng.uniform(0.15, 0.7)).astype(np.int8)
        model = fit_bicm(make_bipartite(M))
        worst = max(
            worst,
            np.abs(model.P.sum(axis=1) - M.sum(axis=1)).max(),
            np.abs(model.P.sum(axis=0) - M.sum(axis=0)).max(),
        )
    elapsed = time.perf_counter() - start
    assert worst <= 1e-8
    assert elapsed < 30.0

    # degree-regular input: every cell probability equals the density
    reg = np.zeros((12, 12), dtype=np.int8)
    for shift in range(4):
        reg[np.arange(12), (np.arange(12) + shift) % 12] = 1
    model = fit_bicm(make_bipartite(reg), tol=1e-12)
    dev = np.abs(model.P - 4.0 / 12.0).max()
    assert dev <= 1e-10
    print(
        f"criterion 3 PASS: 50 fits max degree error {worst:.2e} in {elapsed:.1f}s; "
        f"regular P-density deviation {dev:.2e}"
    )


def test_criterion_4_sampling_calibration():
    M = np.zeros(100, dtype=np.int8)
    M[:30] = 1
    er = fit_er(make_bipartite(M.reshape(10, 10)))
    assert er.p == 0.3
    n = 10000
    dens = np.empty(n)
    for i in range(n):
        dens[i] = sample(er, derive_seed(4, i)).M.mean()
    se = np.sqrt(0.3 * 0.7 / (100 * n))
    er_dev = abs(dens.mean() - 0.3)
    assert er_dev <= 4 * se

    rng = np.random.default_rng(44)
    B = (rng.random((10, 15)) < 0.5).astype(np.int8)
    B[0] = 1
    B[:, 0] = 1
    bicm = fit_bicm(make_bipartite(B))
    var = bicm.P * (1.0 - bicm.P)
    row_sum = np.zeros(10)
    col_sum = np.zeros(15)
    for i in range(n):
        d = sample(bicm, derive_seed(5, i)).M
        row_sum += d.sum(axis=1)
        col_sum += d.sum(axis=0)
    row_se = np.sqrt(var.sum(axis=1) / n)
    col_se = np.sqrt(var.sum(axis=0) / n)
    row_dev = np.abs(row_sum / n - bicm.P.sum(axis=1))
    col_dev = np.abs(col_sum / n - bicm.P.sum(axis=0))
    assert (row_dev <= 4 * row_se + 1e-12).all()
    assert (col_dev <= 4 * col_se + 1e-12).all()
    print(
        f"criterion 4 PASS: ER density dev {er_dev:.2e} (4SE={4*se:.2e}); "
        f"BiCM worst degree dev {max(row_dev.max(), col_dev.max()):.3f}"
    )


@lru_cache(maxsize=None)
def _all_partitions(n):
    out = []

    def rec(i, labels, width):
        if i == n:
            out.append(np.array(labels))
            return
        for c in range(width + 1):
            labels.append(c)
            rec(i + 1, labels, max(width, c + 1))
            labels.pop()

    rec(0, [], 0)
    return out


def _acceptance_graphs():
    tri2 = np.zeros((6, 6))
    for a, b in [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)]:
        tri2[a, b] = tri2[b, a] = 1.0
    graphs = {"two_triangles": tri2}
    k5 = np.ones((5, 5)) - np.eye(5)
    graphs["complete_5"] = k5
    star = np.zeros((8, 8))
    star[0, 1:] = star[1:, 0] = 1.0
    graphs["star_8"] = star
    path = np.zeros((8, 8))
    path[np.arange(7), np.arange(1, 8)] = 1.0
    graphs["path_8"] = path + path.T
    cyc = np.zeros((7, 7))
    cyc[np.arange(7), (np.arange(7) + 1) % 7] = 1.0
    graphs["cycle_7"] = cyc + cyc.T
    for n in range(4, 9):
        for idx, p in enumerate((0.3, 0.5, 0.7)):
            g = np.random.default_rng(10 * n + idx)
            A = np.triu((g.random((n, n)) < p).astype(np.float64), 1)
            graphs[f"gnp_{n}_{idx}"] = A + A.T
    return graphs


def test_criterion_5_modularity_exhaustive_oracle():
    checked = 0
    for name, A in _acceptance_graphs().items():
        if A.sum() == 0:
            continue
        best = max(modularity(A, labels) for labels in _all_partitions(len(A)))
        found = optimize_modularity(A, restarts=20, seed=0)
        assert found.modularity == pytest.approx(best, abs=1e-12), name
        checked += 1
        if name == "two_triangles":
            assert found.modularity == 0.5
            assert found.n_communities == 2
    print(f"criterion 5 PASS: optimizer matched exhaustive optimum on {checked} graphs")


def _smooth_nested(n_rows, n_cols, fill, sharpness, gen):
    # staircase frontier blurred by Bernoulli noise; offset tuned to the fill
    from scipy.optimize import brentq

    a = np.linspace(1.0, -1.0, n_rows)[:, None]
    b = np.linspace(1.0, -1.0, n_cols)[None, :]
    logit = sharpness * (a + b)
    c = brentq(lambda t: (1.0 / (1.0 + np.exp(-(logit + t)))).mean() - fill, -40, 40)
    P = 1.0 / (1.0 + np.exp(-(logit + c)))
    return (gen.random((n_rows, n_cols)) < P).astype(np.int8)


def test_criterion_6_nested_series_zscore_pattern():
    fills = (0.18, 0.27, 0.36)
    metrics = {
        "nodf": lambda b: nodf(b).nodf_total,
        "temperature": lambda b: temperature(b).temperature,
    }
    z_er_all, z_bicm_all = [], []
    for master in range(10):
        densities = []
        for yi, fill in enumerate(fills):
            gen = np.random.default_rng((master, yi))
            M = _smooth_nested(30, 45, fill, 3.0, gen)
            b = make_bipartite(M)
            densities.append(M.mean())
            seed = derive_seed(master, yi)
            s_er = ensemble_stats(b, fit_er(b), metrics, n_samples=60, seed=seed)
            s_bicm = ensemble_stats(b, fit_bicm(b), metrics, n_samples=60, seed=seed)
            z = {
                "er_nodf": s_er["nodf"].z_score,
                "er_temp": s_er["temperature"].z_score,
                "bicm_nodf": s_bicm["nodf"].z_score,
                "bicm_temp": s_bicm["temperature"].z_score,
            }
            assert None not in z.values(), (master, yi)
            # sign pattern: strongly nested vs density-only randomization
            assert z["er_nodf"] > 3.0, (master, yi, z)
            assert z["er_temp"] < -3.0, (master, yi, z)
            # the degree-preserving null explains most of the excess
            assert abs(z["bicm_nodf"]) < 0.5 * abs(z["er_nodf"]), (master, yi, z)
            assert abs(z["bicm_temp"]) < 0.5 * abs(z["er_temp"]), (master, yi, z)
            z_er_all.append((z["er_nodf"], z["er_temp"]))
            z_bicm_all.append((z["bicm_nodf"], z["bicm_temp"]))
        diffs = np.diff(densities)
        assert (diffs > 0).all(), densities
        assert abs(diffs[1] - diffs[0]) < 0.08, densities
    mean_er = np.mean(np.abs(z_er_all), axis=0)
    mean_bicm = np.mean(np.abs(z_bicm_all), axis=0)
    print(
        "criterion 6 PASS: 10/10 seeds; mean |z| ER "
        f"(nodf {mean_er[0]:.1f}, T {mean_er[1]:.1f}) vs BiCM "
        f"(nodf {mean_bicm[0]:.1f}, T {mean_bicm[1]:.1f})"
    )


def test_criterion_7_planted_blocks_recovered():
    gen = np.random.default_rng(7)
    b = make_bipartite(planted_blocks(3, 8, 10, gen))
    partition = optimize_modularity(project(b), restarts=10, seed=0)
    assert partition.n_communities == 3
    stats = modularity_zscore(b, fit_bicm(b), n_samples=200, seed=0, restarts=5)
    assert stats.z_score is not None and stats.z_score > 0.0
    print(
        f"criterion 7 PASS: 3 planted blocks recovered, "
        f"modularity z vs BiCM = {stats.z_score:.1f}"
    )


def test_criterion_8_scale_and_determinism(tmp_path):
    gen = np.random.default_rng(20260819)
    x = np.linspace(0.0, 1.0, 1000)
    y = np.linspace(0.0, 1.0, 200)
    support = ((y[:, None] + x[None, :]) < np.sqrt(2 * 0.18)) ^ (
        gen.random((200, 1000)) < 0.02
    )
    W = support * gen.lognormal(3.0, 1.0, support.shape)
    rows, cols = default_ids(200, 1000)
    counts = CountMatrix(rows, cols, W, layer="trade", year=2020)
    config = PipelineConfig()  # defaults: 1000 samples, both models, all metrics

    start = time.perf_counter()
    first = run_year(counts, config)
    elapsed = time.perf_counter() - start
    second = run_year(counts, replace(config, n_jobs=2))
    _dump_json(first, tmp_path / "first.json")
    _dump_json(second, tmp_path / "second.json")
    identical = (tmp_path / "first.json").read_bytes() == (
        tmp_path / "second.json"
    ).read_bytes()
    assert identical
    assert elapsed < 300.0
    print(
        f"criterion 8 PASS: 200x1000 run in {elapsed:.0f}s, "
        f"byte-identical across runs and worker counts"
    )
