"""Two-type Richardson competition as an event-driven first-passage race.

Type 1 spreads at rate 1 and type 2 at rate ``lam``: a claim through edge ``e`` from a
vertex claimed at time ``t`` arrives at ``t + X(e) / rate``. Each edge carries one
exponential clock shared by both types and transmits at most once. Simultaneous
arrivals are ordered by (time, edge id, type).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
from numba import njit
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .graph import Graph

REASON_EXHAUSTED = "queue_exhausted"
REASON_TARGETS = "targets_claimed"
REASON_MAX_EVENTS = "max_events"
_REASONS = (REASON_EXHAUSTED, REASON_TARGETS, REASON_MAX_EVENTS)


class EngineError(ValueError):
    pass


def stream_seed(master: int, lam_index: int, rep_index: int) -> int:
    """64-bit stream seed for one replication (numpy ``SeedSequence`` hashing)."""
    ss = np.random.SeedSequence([master & 0xFFFFFFFFFFFFFFFF, lam_index, rep_index])
    return int(ss.generate_state(1, np.uint64)[0])


def sample_weights(g: Graph, seed: int) -> np.ndarray:
    """i.i.d. mean-1 exponential clock per edge, ``X = -ln U`` with ``U`` in (0, 1]."""
    rng = np.random.Generator(np.random.PCG64(seed))
    u = 1.0 - rng.random(g.num_edges)
    return -np.log(u)


@dataclass(frozen=True)
class StopRule:
    kind: str = "full_claim"
    targets: Mapping[int, frozenset] = field(default_factory=dict)
    max_events: Optional[int] = None

    @classmethod
    def full_claim(cls) -> "StopRule":
        return cls()

    @classmethod
    def landmarks(cls, targets: Mapping[int, Sequence[int]]) -> "StopRule":
        """Stop once every target vertex (of either type's set) has been claimed."""
        return cls("landmarks", {t: frozenset(int(v) for v in vs) for t, vs in targets.items()})

    @classmethod
    def events(cls, n: int) -> "StopRule":
        if n < 0:
            raise EngineError("max_events must be >= 0")
        return cls("max_events", max_events=n)

    def target_array(self) -> np.ndarray:
        vs = set()
        for s in self.targets.values():
            vs |= s
        return np.array(sorted(vs), dtype=np.int64)


@dataclass
class CompetitionOutcome:
    """Per-vertex claim record: ``claim_time`` is NaN, ``vtype`` 0 and ``parent`` -1 when unclaimed."""

    lam: float
    claim_time: np.ndarray
    vtype: np.ndarray
    parent: np.ndarray
    reason: str
    events: int
    frontier_exhausted: tuple[bool, bool]

    def claimed(self, t: int) -> np.ndarray:
        return np.flatnonzero(self.vtype == t)

    def to_csv(self, g: Graph) -> str:
        lines = ["vertex_id,label,type,claim_time,parent_edge"]
        times = self.claim_time.tolist()
        types = self.vtype.tolist()
        parents = self.parent.tolist()
        for v in range(g.num_vertices):
            t = types[v]
            ct = "" if t == 0 else repr(times[v])
            pe = "" if parents[v] < 0 else str(parents[v])
            lines.append(f"{v},{g.label(v)},{t},{ct},{pe}")
        return "\n".join(lines) + "\n"


# binary heap over parallel arrays keyed by (time, edge, type)

@njit(inline="always")
def _less(ht, he, hy, i, j):
    if ht[i] != ht[j]:
        return ht[i] < ht[j]
    if he[i] != he[j]:
        return he[i] < he[j]
    return hy[i] < hy[j]


@njit(inline="always")
def _swap(ht, he, hy, hv, i, j):
    ht[i], ht[j] = ht[j], ht[i]
    he[i], he[j] = he[j], he[i]
    hy[i], hy[j] = hy[j], hy[i]
    hv[i], hv[j] = hv[j], hv[i]


@njit(inline="always")
def _push(ht, he, hy, hv, size, t, e, y, v):
    i = size
    ht[i] = t
    he[i] = e
    hy[i] = y
    hv[i] = v
    while i > 0:
        p = (i - 1) >> 1
        if _less(ht, he, hy, i, p):
            _swap(ht, he, hy, hv, i, p)
            i = p
        else:
            break
    return size + 1


@njit(inline="always")
def _pop(ht, he, hy, hv, size):
    size -= 1
    _swap(ht, he, hy, hv, 0, size)
    i = 0
    while True:
        l = 2 * i + 1
        if l >= size:
            break
        c = l
        r = l + 1
        if r < size and _less(ht, he, hy, r, l):
            c = r
        if _less(ht, he, hy, c, i):
            _swap(ht, he, hy, hv, c, i)
            i = c
        else:
            break
    return size


@njit(nogil=True, cache=True)
def _race(indptr, adj_v, adj_e, weights, rate1, rate2, init_type, is_target, n_targets,
          max_events, claim_time, vtype, parent):
    n_edges = weights.shape[0]
    ht = np.empty(n_edges + 1, np.float64)
    he = np.empty(n_edges + 1, np.int64)
    hy = np.empty(n_edges + 1, np.int8)
    hv = np.empty(n_edges + 1, np.int64)
    size = 0
    remaining = n_targets
    nv = indptr.shape[0] - 1
    for v in range(nv):
        if init_type[v] != 0:
            vtype[v] = init_type[v]
            claim_time[v] = 0.0
            if is_target[v]:
                remaining -= 1
    for v in range(nv):
        y = init_type[v]
        if y != 0:
            rate = rate1 if y == 1 else rate2
            for k in range(indptr[v], indptr[v + 1]):
                w = adj_v[k]
                if vtype[w] == 0:
                    e = adj_e[k]
                    size = _push(ht, he, hy, hv, size, 0.0 + weights[e] / rate, e, y, w)
    events = 0
    if n_targets > 0 and remaining == 0:
        return events, 1
    while size > 0:
        if max_events >= 0 and events >= max_events:
            return events, 2
        t = ht[0]
        e = he[0]
        y = hy[0]
        v = hv[0]
        size = _pop(ht, he, hy, hv, size)
        if vtype[v] != 0:
            continue
        vtype[v] = y
        claim_time[v] = t
        parent[v] = e
        events += 1
        if is_target[v]:
            remaining -= 1
            if remaining == 0:
                return events, 1
        rate = rate1 if y == 1 else rate2
        for k in range(indptr[v], indptr[v + 1]):
            w = adj_v[k]
            if vtype[w] == 0:
                ee = adj_e[k]
                size = _push(ht, he, hy, hv, size, t + weights[ee] / rate, ee, y, w)
    if max_events >= 0 and events >= max_events:
        return events, 2
    return events, 0


def _init_array(g: Graph, init: Mapping[int, int]) -> np.ndarray:
    if not init:
        raise EngineError("initial configuration is empty")
    arr = np.zeros(g.num_vertices, dtype=np.int8)
    for v, t in init.items():
        if not 0 <= v < g.num_vertices:
            raise EngineError(f"init vertex {v} out of range")
        if t not in (1, 2):
            raise EngineError(f"init type must be 1 or 2, got {t}")
        arr[v] = t
    return arr


def init_config(pairs) -> dict[int, int]:
    """Build an init map from (vertex, type) pairs, rejecting conflicting duplicates."""
    out: dict[int, int] = {}
    for v, t in pairs:
        if out.get(v, t) != t:
            raise EngineError(f"conflicting init types on vertex {v}")
        out[v] = t
    return out


def _check_args(g: Graph, w: np.ndarray, lam: float):
    if not (math.isfinite(lam) and lam > 0):
        raise EngineError("lambda must be positive and finite")
    if len(w) != g.num_edges:
        raise EngineError("weight assignment does not match the graph")


def frontier_exhausted(g: Graph, vtype: np.ndarray) -> tuple[bool, bool]:
    """Per type: no edge joins a vertex of that type to an unclaimed vertex."""
    tu, tv = vtype[g.edge_u], vtype[g.edge_v]
    out = []
    for t in (1, 2):
        live = ((tu == t) & (tv == 0)) | ((tv == t) & (tu == 0))
        out.append(not bool(live.any()))
    return out[0], out[1]


def run(g: Graph, w: np.ndarray, lam: float, init: Mapping[int, int],
        stop: StopRule = StopRule()) -> CompetitionOutcome:
    _check_args(g, w, lam)
    init_arr = _init_array(g, init)
    targets = stop.target_array()
    if len(targets) and (targets.min() < 0 or targets.max() >= g.num_vertices):
        raise EngineError("landmark target out of range")
    is_target = np.zeros(g.num_vertices, dtype=np.bool_)
    is_target[targets] = True
    max_events = -1 if stop.max_events is None else int(stop.max_events)
    claim_time = np.full(g.num_vertices, np.nan)
    vtype = np.zeros(g.num_vertices, dtype=np.int8)
    parent = np.full(g.num_vertices, -1, dtype=np.int64)
    events, code = _race(g.indptr, g.adj_vertex, g.adj_edge, np.ascontiguousarray(w, dtype=np.float64),
                         1.0, float(lam), init_arr, is_target, len(targets), max_events,
                         claim_time, vtype, parent)
    return CompetitionOutcome(float(lam), claim_time, vtype, parent, _REASONS[code], int(events),
                              frontier_exhausted(g, vtype))


def naive_run(g: Graph, w: np.ndarray, lam: float, init: Mapping[int, int],
              stop: StopRule = StopRule()) -> CompetitionOutcome:
    """Literal step-by-step race rescanning every eligible boundary edge; small graphs only."""
    _check_args(g, w, lam)
    init_arr = _init_array(g, init)
    n = g.num_vertices
    vtype = [int(t) for t in init_arr]
    times = [0.0 if t else math.nan for t in vtype]
    parent = [-1] * n
    eu, ev = g.edge_u.tolist(), g.edge_v.tolist()
    weights = [float(x) for x in w]
    rates = {1: 1.0, 2: float(lam)}
    targets = set(stop.target_array().tolist())
    events = 0
    reason = REASON_EXHAUSTED
    while True:
        if targets and all(vtype[v] for v in targets):
            reason = REASON_TARGETS
            break
        best = None
        for e in range(len(eu)):
            a, b = eu[e], ev[e]
            # an edge is eligible for type i iff it lies in dS^i but not in dS^j
            if vtype[a] and not vtype[b]:
                src, dst = a, b
            elif vtype[b] and not vtype[a]:
                src, dst = b, a
            else:
                continue
            y = vtype[src]
            key = (times[src] + weights[e] / rates[y], e, y)
            if best is None or key < best[0]:
                best = (key, dst)
        if best is None:
            break
        if stop.max_events is not None and events >= stop.max_events:
            reason = REASON_MAX_EVENTS
            break
        (t, e, y), dst = best
        vtype[dst], times[dst], parent[dst] = y, t, e
        events += 1
    if stop.max_events is not None and events >= stop.max_events and reason == REASON_EXHAUSTED:
        reason = REASON_MAX_EVENTS
    vt = np.array(vtype, dtype=np.int8)
    return CompetitionOutcome(float(lam), np.array(times), vt, np.array(parent, dtype=np.int64), reason,
                              events, frontier_exhausted(g, vt))


def run_coupled(g: Graph, w: np.ndarray, lambdas: Sequence[float], init: Mapping[int, int],
                stop: StopRule = StopRule()) -> list[CompetitionOutcome]:
    """One run per rate, all on the same clocks (the monotone coupling)."""
    lambdas = list(lambdas)
    if not lambdas:
        raise EngineError("empty lambda list")
    if any(y <= x for x, y in zip(lambdas, lambdas[1:])):
        raise EngineError("lambdas must be strictly increasing")
    return [run(g, w, lam, init, stop) for lam in lambdas]


def single_type_fpp(g: Graph, w: np.ndarray, sources, rate: float = 1.0) -> np.ndarray:
    """First-passage distance from ``sources`` under edge times ``X / rate``."""
    sources = sorted(set(int(s) for s in sources))
    if not sources:
        raise EngineError("sources must be nonempty")
    if not rate > 0:
        raise EngineError("rate must be positive")
    n = g.num_vertices
    data = np.concatenate([w, w]) / rate
    rows = np.concatenate([g.edge_u, g.edge_v])
    cols = np.concatenate([g.edge_v, g.edge_u])
    mat = csr_matrix((data, (rows, cols)), shape=(n, n))
    return dijkstra(mat, directed=True, indices=sources, min_only=True)
