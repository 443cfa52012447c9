"""Acceptance gate: one test per criterion, each logging a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v -s``; the log is also printed in the terminal
summary. All seeds are fixed so every number below is reproducible.
"""
import random
import time

import numpy as np
import pytest

from conftest import random_graph
from richardson.bounds import coexistence_lower_bound, moments_T1, moments_T2
from richardson.engine import naive_run, run, sample_weights, stream_seed
from richardson.events import eval_D1, eval_D2
from richardson.families import BridgeRule, LadderSpec, SequenceSpec, build_ladder
from richardson.graph import GraphBuilder
from richardson.harness import SweepPlan, monotonicity_test, sweep, verdicts_to_csv, wilson_interval
from richardson.specdoc import load_document

CRITERIA_LOG: list[str] = []
MASTER_SEED = 1


def log(num: int, ok: bool, detail: str):
    line = f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
    CRITERIA_LOG.append(line)
    print(line)


_SWEEPS: dict = {}


def preset_sweep(name: str, lambdas, threads: int = 1):
    key = (name, tuple(lambdas), threads)
    if key not in _SWEEPS:
        doc = load_document(name)
        plan = SweepPlan(doc.family_spec(), lambdas, 2000, MASTER_SEED, [3], threads)
        _SWEEPS[key] = sweep(plan)
    return _SWEEPS[key]


GRID5 = [1.0, 1.5, 2.0, 2.5, 3.0]
GRID6 = [1.2, 2.0, 3.5, 5.0, 6.0]
GRID7 = [1.3, 2.0, 3.0, 4.0]


def _disjoint(a, b) -> bool:
    return a.ci_lo > b.ci_hi or b.ci_lo > a.ci_hi


def test_c01_engine_matches_naive():
    rng = random.Random(2024)
    t0 = time.perf_counter()
    bad = []
    for case in range(1000):
        g = random_graph(rng, n_max=12)
        lam = rng.choice([1.0, 1.7, 3.0])
        seed = rng.randrange(1 << 62)
        w = sample_weights(g, seed)
        u, v = rng.sample(range(g.num_vertices), 2)
        a, b = run(g, w, lam, {u: 1, v: 2}), naive_run(g, w, lam, {u: 1, v: 2})
        same = (np.array_equal(a.vtype, b.vtype) and np.array_equal(a.parent, b.parent)
                and np.allclose(a.claim_time, b.claim_time, rtol=0, atol=1e-9, equal_nan=True))
        if not same:
            bad.append((case, seed))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 30
    log(1, ok, f"1000 cases, mismatches={len(bad)} {bad[:5]}, {dt:.1f}s (< 30s)")
    assert ok


def test_c02_race_law():
    t0 = time.perf_counter()
    R = 100_000
    b = GraphBuilder()
    for _ in range(R):
        b.add_path(b.add_vertex(), 2)
    g = b.freeze()
    # component r is 3r -e- 3r+1 -e- 3r+2
    init = {3 * r: 1 for r in range(R)}
    init.update({3 * r + 2: 2 for r in range(R)})
    parts = []
    ok = True
    for i, lam in enumerate([1.0, 2.0, 5.0]):
        out = run(g, sample_weights(g, stream_seed(MASTER_SEED, i, 0)), lam, init)
        p = float(np.mean(out.vtype[1::3] == 2))
        target = lam / (1 + lam)
        ok &= abs(p - target) <= 0.01
        parts.append(f"lam={lam:g}: {p:.4f} vs {target:.4f}")
    dt = time.perf_counter() - t0
    ok &= dt < 10
    log(2, ok, "; ".join(parts) + f" (tol 0.01), {dt:.1f}s (< 10s)")
    assert ok


def _moment_check(x: np.ndarray, mean: float, var: float):
    n = len(x)
    m, v = x.mean(), x.var(ddof=1)
    se_m = np.sqrt(v / n)
    m4 = np.mean((x - m) ** 4)
    se_v = np.sqrt((m4 - v * v) / n)
    return abs(m - mean) / se_m, abs(v - var) / se_v, m, v


def test_c03_moment_formulas():
    t0 = time.perf_counter()
    N, batch = 1_000_000, 10_000
    spec = LadderSpec(SequenceSpec.geometric(256, 4, 3), BridgeRule())
    rng = np.random.Generator(np.random.PCG64(MASTER_SEED))
    lams = [1.0, 2.0, 3.0]
    ok, worst, parts = True, 0.0, []
    for n, (a, attach, length) in enumerate(spec.geometry(), start=1):
        if n == 1:
            # literal edge clocks, summed column by column
            chunks = []
            for _ in range(N // batch):
                chunks.append([rng.standard_exponential((batch, k)).sum(axis=1) for k in (a, attach, length)])
            s1, s2, sb = (np.concatenate([c[j] for c in chunks]) for j in range(3))
        else:
            # a sum of k unit exponentials is Gamma(k, 1)
            s1, s2, sb = (rng.standard_gamma(k, N) for k in (a, attach, length))
        for lam in lams:
            for name, x, mp in (("T1", s2 / lam + sb / lam - s1, moments_T1(lam, a, attach, length)),
                                ("T2", s1 + sb - s2 / lam, moments_T2(lam, a, attach, length))):
                zm, zv, m, v = _moment_check(x, mp.mean, mp.variance)
                worst = max(worst, zm, zv)
                ok &= zm <= 5 and zv <= 5
                if n == 1 and lam == 2.0:
                    parts.append(f"{name}: mean {m:.2f} ({mp.mean:g}) var {v:.1f} ({mp.variance:g})")
    dt = time.perf_counter() - t0
    ok &= dt < 60
    log(3, ok, f"3 levels x lam {{1,2,3}}, worst z={worst:.2f} (<= 5); level 1 lam=2 " + "; ".join(parts)
        + f"; {dt:.1f}s (< 60s)")
    assert ok


def test_c04_chebyshev_domination():
    t0 = time.perf_counter()
    R = 100_000
    g, lm = build_ladder(LadderSpec(SequenceSpec.explicit([256]), BridgeRule(), tail=0))
    d1 = d2 = 0
    for r in range(R):
        w = sample_weights(g, stream_seed(MASTER_SEED, 0, r))
        d1 += eval_D1(w, lm, 1, 2.0)
        d2 += eval_D2(w, lm, 1, 2.0)
    rep = coexistence_lower_bound(LadderSpec(SequenceSpec.explicit([256]), BridgeRule()), 2.0)
    b1, b2 = rep.bound_D1[0], rep.bound_D2[0]
    lo1, _ = wilson_interval(d1, R, z=3.29)
    lo2, _ = wilson_interval(d2, R, z=3.29)
    dt = time.perf_counter() - t0
    ok = lo1 <= b1 and lo2 <= b2 and dt < 60
    log(4, ok, f"P(D1)={d1 / R:.5f} (99.9% lo {lo1:.5f}) <= {b1:.7g}; P(D2)={d2 / R:.5f} "
               f"(99.9% lo {lo2:.5f}) <= {b2:.5g}; {dt:.1f}s (< 60s)")
    assert ok


def test_c05_nonmonotone_coexistence():
    res = preset_sweep("prop21", GRID5)
    rows = {lam: res.curve.row(lam, 3) for lam in GRID5}
    bound = coexistence_lower_bound(load_document("prop21").family_spec(), 2.0).lower_bound
    p = {lam: r.p_hat for lam, r in rows.items()}
    ok = (rows[2.0].ci_hi >= bound and p[1.0] <= 0.05 and p[3.0] <= 0.05
          and max(p, key=p.get) == 2.0)
    log(5, ok, "level 3, R=2000: " + ", ".join(f"p({lam:g})={v:.4f}" for lam, v in p.items())
        + f"; CI_hi(2)={rows[2.0].ci_hi:.4f} >= bound {bound:.4f}")
    assert ok


def test_c06_interval_region():
    res = preset_sweep("prop22", GRID6)
    rows = {lam: res.curve.row(lam, 3) for lam in GRID6}
    ok = all(rows[i].p_hat > rows[o].p_hat and _disjoint(rows[i], rows[o])
             for i in (2.0, 3.5, 5.0) for o in (1.2, 6.0))
    log(6, ok, "level 3, R=2000: " + ", ".join(
        f"p({lam:g})={r.p_hat:.4f} [{r.ci_lo:.3f},{r.ci_hi:.3f}]" for lam, r in rows.items()))
    assert ok


def test_c07_disconnected_region():
    res = preset_sweep("points:2,4", GRID7)
    rows = {lam: res.curve.row(lam, 3) for lam in GRID7}
    ok = all(rows[i].p_hat > rows[o].p_hat and _disjoint(rows[i], rows[o])
             for i in (2.0, 4.0) for o in (3.0, 1.3))
    log(7, ok, "level 3, R=2000: " + ", ".join(
        f"p({lam:g})={r.p_hat:.4f} [{r.ci_lo:.3f},{r.ci_hi:.3f}]" for lam, r in rows.items()))
    assert ok


def test_c08_ladder_iff():
    res = preset_sweep("prop21", GRID5)
    clear: dict = {}
    bad = []
    for v in res.verdicts:
        key = (v.rep, v.lam)
        clear[key] = clear.get(key, True) and not v.D1 and not v.D2
        if v.coex != clear[key]:
            bad.append((MASTER_SEED, v.rep, v.lam, v.level))
    ok = not bad
    log(8, ok, f"{len(res.verdicts)} (rep, lambda, level) verdicts, mismatches={len(bad)}"
        + (f", first (seed, rep, lambda, level): {bad[:5]}" if bad else ""))
    assert ok


def test_c09_coupling_monotonicity():
    t0 = time.perf_counter()
    rng = random.Random(909)
    grid = [1.0, 1.5, 2.0, 4.0]
    total = None
    for i in range(200):
        g = random_graph(rng, n_max=30, p=0.12, connected=True)
        u, v = rng.sample(range(g.num_vertices), 2)
        rep = monotonicity_test(g, {u: 1, v: 2}, grid, 5, seed=MASTER_SEED * 1000 + i)
        total = rep if total is None else total + rep
    dt = time.perf_counter() - t0
    th2 = [t.theta2 for t in total.thetas()]
    ok = total.violations == 0 and not total.decreases(2) and dt < 60
    log(9, ok, f"200 graphs x 5 reps, superset violations={total.violations} {total.violation_seeds[:5]}, "
               f"theta2 over {grid}: " + ", ".join(f"{x:.3f}" for x in th2) + f"; {dt:.1f}s (< 60s)")
    assert ok


def test_c10_thread_determinism():
    parts, ok = [], True
    for name, grid in (("prop21", GRID5), ("prop22", GRID6), ("points:2,4", GRID7)):
        a = preset_sweep(name, grid, 1)
        b = preset_sweep(name, grid, 8)
        same = (a.curve.to_csv().encode() == b.curve.to_csv().encode()
                and verdicts_to_csv(a.verdicts).encode() == verdicts_to_csv(b.verdicts).encode())
        ok &= same
        parts.append(f"{name}: {'identical' if same else 'DIFFERENT'}")
    log(10, ok, "threads 1 vs 8: " + ", ".join(parts))
    assert ok
