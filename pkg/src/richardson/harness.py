"""Replicated experiments with order-independent, reproducible seeding.

Replication ``r`` draws its clocks from ``stream_seed(master, 0, r)`` and reuses them for
every rate on the grid (coupled mode); uncoupled mode uses ``stream_seed(master, i, r)``
for grid index ``i``. Results are reduced by (rate index, replication) so the output does
not depend on the thread count.
"""
from __future__ import annotations

import hashlib
import json
import math
import sys
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .engine import StopRule, run, run_coupled, sample_weights, stream_seed
from .events import (coexistence_indicator, eval_D1, eval_D2, scenario_classify, strangulation_check,
                     survived_to_level)
from .families import FamilySpec, LandmarkMap, build
from .graph import Graph


class HarnessError(ValueError):
    pass


def wilson_interval(successes: int, trials: int, z: float = 1.96) -> tuple[float, float]:
    if trials < 1:
        raise HarnessError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise HarnessError("successes must lie in [0, trials]")
    p = successes / trials
    denom = 1 + z * z / trials
    center = (p + z * z / (2 * trials)) / denom
    half = z / denom * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == trials else min(1.0, center + half)
    return lo, hi


def spec_hash(spec: FamilySpec) -> str:
    doc = {"family": spec.family, **asdict(spec)}
    return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Scenario:
    name: str
    init: dict
    start_level: int = 0


def canonical_scenarios(lm: LandmarkMap) -> list[Scenario]:
    """Initial configurations whose union stands in for "some finite initial condition"."""
    if lm.family == "ladder":
        r1, r2 = lm.levels[0]
        return [Scenario("canonical", {r1: 1, r2: 2})]
    if lm.family == "multispine":
        x0 = lm.levels[0]
        return [Scenario(f"spine{i}", {v: (2 if j == i else 1) for j, v in enumerate(x0)})
                for i in range(1, len(x0))]
    if lm.family == "countable":
        if lm.n_max < 2:
            raise HarnessError("countable sweeps need at least two levels")
        out = []
        for i in range(1, lm.n_max):
            xs = lm.levels[i]
            out.append(Scenario(f"spine{i}", {v: (2 if j == i else 1) for j, v in enumerate(xs)}, i))
        return out
    raise HarnessError(f"unknown family {lm.family!r}")


@dataclass
class SweepPlan:
    spec: FamilySpec
    lambdas: Sequence[float]
    reps: int
    seed: int = 0
    levels: Optional[Sequence[int]] = None
    threads: int = 1
    coupled: bool = True

    def validate(self, n_max: int):
        if self.reps < 1:
            raise HarnessError("reps must be >= 1")
        lams = list(self.lambdas)
        if not lams or any(not x > 0 for x in lams):
            raise HarnessError("lambda grid must be nonempty and positive")
        if any(y <= x for x, y in zip(lams, lams[1:])):
            raise HarnessError("lambda grid must be strictly ascending")
        for n in self.report_levels(n_max):
            if not 1 <= n <= n_max:
                raise HarnessError(f"level {n} outside 1..{n_max}")
        if self.threads < 1:
            raise HarnessError("threads must be >= 1")

    def report_levels(self, n_max: int) -> list[int]:
        return list(self.levels) if self.levels else list(range(1, n_max + 1))


@dataclass(frozen=True)
class CurveRow:
    lam: float
    level: int
    successes: int
    reps: int
    p_hat: float
    ci_lo: float
    ci_hi: float


@dataclass
class CoexistenceCurve:
    family: str
    spec_hash: str
    seed: int
    rows: list[CurveRow]

    def row(self, lam: float, level: int) -> CurveRow:
        for r in self.rows:
            if r.level == level and abs(r.lam - lam) < 1e-12:
                return r
        raise KeyError((lam, level))

    def to_csv(self) -> str:
        lines = ["family,spec_hash,seed,lambda,level,reps,successes,p_hat,ci_lo,ci_hi"]
        for r in self.rows:
            lines.append(f"{self.family},{self.spec_hash},{self.seed},{r.lam!r},{r.level},{r.reps},"
                         f"{r.successes},{r.p_hat!r},{r.ci_lo!r},{r.ci_hi!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class VerdictRow:
    rep: int
    lam: float
    level: int
    D1: Optional[bool]
    D2: Optional[bool]
    coex: bool
    strangled: str
    scenario: str


def verdicts_to_csv(rows: Sequence[VerdictRow]) -> str:
    def b(x):
        return "" if x is None else str(int(x))
    lines = ["rep,lambda,level,D1,D2,coex,strangled,scenario"]
    for r in rows:
        lines.append(f"{r.rep},{r.lam!r},{r.level},{b(r.D1)},{b(r.D2)},{int(r.coex)},{r.strangled},{r.scenario}")
    return "\n".join(lines) + "\n"


@dataclass
class SweepResult:
    curve: CoexistenceCurve
    verdicts: list[VerdictRow]
    survived: np.ndarray  # (len(lambdas), reps)


def _sweep_one(g: Graph, lm: LandmarkMap, scenarios, stop, plan: SweepPlan, rep: int):
    lams = [float(x) for x in plan.lambdas]
    w = sample_weights(g, stream_seed(plan.seed, 0, rep)) if plan.coupled else None
    survived, rows = [], []
    for li, lam in enumerate(lams):
        if not plan.coupled:
            w = sample_weights(g, stream_seed(plan.seed, li, rep))
        best, best_out = -1, None
        raw = [False] * (lm.n_max + 1)
        for sc in scenarios:
            out = run(g, w, lam, sc.init, stop)
            s = survived_to_level(out, lm, sc.start_level)
            for n in range(max(1, sc.start_level + 1), lm.n_max + 1):
                raw[n] = raw[n] or coexistence_indicator(out, lm, n)
            if s > best:
                best, best_out = s, out
        survived.append(best)
        strangled = strangulation_check(best_out)
        scen = scenario_classify(best_out, lm)
        for n in range(1, lm.n_max + 1):
            d1 = eval_D1(w, lm, n, lam) if lm.family == "ladder" else None
            d2 = eval_D2(w, lm, n, lam) if lm.family == "ladder" else None
            rows.append(VerdictRow(rep, lam, n, d1, d2, raw[n], strangled, scen))
    return survived, rows


def sweep(plan: SweepPlan, progress: Optional[Callable[[int, int], None]] = None,
          built: Optional[tuple[Graph, LandmarkMap]] = None) -> SweepResult:
    g, lm = built if built is not None else build(plan.spec)
    plan.validate(lm.n_max)
    scenarios = canonical_scenarios(lm)
    stop = StopRule.landmarks({1: lm.targets()})
    lams = [float(x) for x in plan.lambdas]

    def task(rep):
        return _sweep_one(g, lm, scenarios, stop, plan, rep)

    results = [None] * plan.reps
    if plan.threads == 1:
        it = map(task, range(plan.reps))
        pool = None
    else:
        pool = ThreadPoolExecutor(max_workers=plan.threads)
        it = pool.map(task, range(plan.reps))
    try:
        for rep, res in enumerate(it):
            results[rep] = res
            if progress is not None:
                progress(rep + 1, plan.reps)
    finally:
        if pool is not None:
            pool.shutdown()

    survived = np.array([r[0] for r in results], dtype=np.int64).T
    verdicts = [row for r in results for row in r[1]]
    rows = []
    for li, lam in enumerate(lams):
        for n in plan.report_levels(lm.n_max):
            k = int(np.sum(survived[li] >= n))
            lo, hi = wilson_interval(k, plan.reps)
            rows.append(CurveRow(lam, n, k, plan.reps, k / plan.reps, lo, hi))
    curve = CoexistenceCurve(plan.spec.family, spec_hash(plan.spec), plan.seed, rows)
    return SweepResult(curve, verdicts, survived)


def stderr_progress(done: int, total: int):
    step = max(1, total // 20)
    if done % step == 0 or done == total:
        print(f"replication {done}/{total}", file=sys.stderr)


@dataclass(frozen=True)
class ThetaEstimate:
    lam: float
    reps: int
    type1_finite: int
    type2_infinite: int

    @property
    def theta1(self) -> float:
        return self.type1_finite / self.reps

    @property
    def theta2(self) -> float:
        return self.type2_infinite / self.reps

    @property
    def ci1(self) -> tuple[float, float]:
        return wilson_interval(self.type1_finite, self.reps)

    @property
    def ci2(self) -> tuple[float, float]:
        return wilson_interval(self.type2_infinite, self.reps)


def _boundary_flags(vtype: np.ndarray, boundary: np.ndarray) -> tuple[bool, bool]:
    """(type 1 missed the boundary, type 2 reached the boundary)."""
    bt = vtype[boundary]
    return not bool(np.any(bt == 1)), bool(np.any(bt == 2))


def estimate_theta(g: Graph, lm: LandmarkMap, init: dict, lam: float, reps: int, seed: int) -> ThetaEstimate:
    """Truncation estimates of P(type 1 finite) and P(type 2 infinite).

    "Infinite" means claiming at least one vertex of the final tail segments (``lm.boundary``).
    """
    if reps < 1:
        raise HarnessError("reps must be >= 1")
    boundary = np.asarray(lm.boundary, dtype=np.int64)
    if len(boundary) == 0:
        raise HarnessError("landmark map has no truncation boundary")
    stop = StopRule.landmarks({2: boundary.tolist()})
    t1 = t2 = 0
    for r in range(reps):
        out = run(g, sample_weights(g, stream_seed(seed, 0, r)), lam, init, stop)
        f1, f2 = _boundary_flags(out.vtype, boundary)
        t1 += f1
        t2 += f2
    return ThetaEstimate(float(lam), reps, t1, t2)


def farthest_vertices(g: Graph, sources) -> list[int]:
    """Vertices at maximal hop distance from ``sources`` (a default truncation boundary)."""
    dist = [-1] * g.num_vertices
    queue = deque()
    for s in sources:
        dist[s] = 0
        queue.append(s)
    indptr, adj = g.indptr.tolist(), g.adj_vertex.tolist()
    while queue:
        v = queue.popleft()
        for w in adj[indptr[v]:indptr[v + 1]]:
            if dist[w] < 0:
                dist[w] = dist[v] + 1
                queue.append(w)
    far = max(dist)
    return [v for v, d in enumerate(dist) if d == far and far > 0]


@dataclass
class MonotonicityReport:
    lambdas: list[float]
    reps: int
    violations: int
    type1_finite: list[int]
    type2_infinite: list[int]
    violation_seeds: list[tuple[int, int]] = field(default_factory=list)

    def thetas(self) -> list[ThetaEstimate]:
        return [ThetaEstimate(l, self.reps, a, b)
                for l, a, b in zip(self.lambdas, self.type1_finite, self.type2_infinite)]

    def decreases(self, which: int) -> list[int]:
        """Grid positions where the chosen theta drops by more than twice the CI half-width."""
        th = self.thetas()
        bad = []
        for j in range(1, len(th)):
            prev, cur = th[j - 1], th[j]
            ci_p, ci_c = (prev.ci1, cur.ci1) if which == 1 else (prev.ci2, cur.ci2)
            v_p, v_c = (prev.theta1, cur.theta1) if which == 1 else (prev.theta2, cur.theta2)
            slack = 2 * max((ci_p[1] - ci_p[0]) / 2, (ci_c[1] - ci_c[0]) / 2)
            if v_c < v_p - slack:
                bad.append(j)
        return bad

    @property
    def passed(self) -> bool:
        return self.violations == 0 and not self.decreases(1) and not self.decreases(2)

    def __add__(self, other: "MonotonicityReport") -> "MonotonicityReport":
        if self.lambdas != other.lambdas:
            raise HarnessError("cannot pool reports over different grids")
        return MonotonicityReport(self.lambdas, self.reps + other.reps, self.violations + other.violations,
                                  [a + b for a, b in zip(self.type1_finite, other.type1_finite)],
                                  [a + b for a, b in zip(self.type2_infinite, other.type2_infinite)],
                                  self.violation_seeds + other.violation_seeds)


def monotonicity_test(g: Graph, init: dict, lambda_grid: Sequence[float], reps: int, seed: int,
                      boundary: Optional[Sequence[int]] = None) -> MonotonicityReport:
    """Coupled runs over the grid: count type-2 superset violations and tabulate theta counts."""
    lams = list(lambda_grid)
    bnd = np.asarray(boundary if boundary is not None else farthest_vertices(g, init), dtype=np.int64)
    t1 = [0] * len(lams)
    t2 = [0] * len(lams)
    violations = 0
    bad = []
    for r in range(reps):
        s = stream_seed(seed, 0, r)
        outs = run_coupled(g, sample_weights(g, s), lams, init)
        for j, out in enumerate(outs):
            f1, f2 = _boundary_flags(out.vtype, bnd) if len(bnd) else (False, False)
            t1[j] += f1
            t2[j] += f2
        for a, b in zip(outs, outs[1:]):
            if np.any((a.vtype == 2) & (b.vtype != 2)):
                violations += 1
                bad.append((seed, r))
    return MonotonicityReport(lams, reps, violations, t1, t2, bad)
