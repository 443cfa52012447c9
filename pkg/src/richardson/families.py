"""Finite truncations of the ladder, multi-spine and countable-spine constructions.

Every generator returns the frozen :class:`~richardson.graph.Graph` together with a
:class:`LandmarkMap` naming the spine vertices, level landmarks and bridge edges
that the race analysis refers to.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .graph import Graph, GraphBuilder


class FamilyError(ValueError):
    pass


def ceil_pow78(a: int) -> int:
    """Exact ``ceil(a ** (7/8))`` for a positive integer ``a``."""
    if a < 1:
        raise FamilyError("ceil_pow78 needs a positive integer")
    c = math.ceil(a ** 0.875)
    a7 = a ** 7
    # float guess may be off by one near perfect powers
    while c ** 8 < a7:
        c += 1
    while c > 1 and (c - 1) ** 8 >= a7:
        c -= 1
    return c


def ceil_mul(x: float, n: int) -> int:
    """``ceil(x * n)`` with ``x`` read as the nearest small-denominator rational."""
    return math.ceil(Fraction(x).limit_denominator(10 ** 9) * n)


@dataclass(frozen=True)
class SequenceSpec:
    count: int
    base: Optional[int] = None
    ratio: Optional[int] = None
    values: Optional[tuple[int, ...]] = None

    @classmethod
    def geometric(cls, base: int, ratio: int, count: int) -> "SequenceSpec":
        return cls(count=count, base=base, ratio=ratio)

    @classmethod
    def explicit(cls, values) -> "SequenceSpec":
        values = tuple(int(v) for v in values)
        return cls(count=len(values), values=values)

    def terms(self) -> list[int]:
        if self.count < 1:
            raise FamilyError("sequence count must be >= 1")
        if self.values is not None:
            if len(self.values) != self.count:
                raise FamilyError("explicit sequence length does not match count")
            seq = list(self.values)
        else:
            if self.base is None or self.ratio is None:
                raise FamilyError("geometric sequence needs base and ratio")
            if self.base < 1 or self.ratio < 2:
                raise FamilyError("geometric sequence needs base >= 1 and integer ratio >= 2")
            seq = [self.base * self.ratio ** i for i in range(self.count)]
        if seq[0] < 1 or any(x >= y for x, y in zip(seq, seq[1:])):
            raise FamilyError("sequence must be positive and strictly increasing")
        return seq


CORRECTIONS = ("plus78", "minus78", "none")
END_SHIFTS = ("none", "plus78", "minus78")


@dataclass(frozen=True)
class BridgeRule:
    """Bridge n runs from ``v_{1,a_n}`` to ``v_{2,ceil(gamma a_n) + shift}``.

    Its length is ``ceil(beta a_n)`` plus or minus ``ceil(a_n^{7/8})`` per ``correction``.
    ``end_shift`` moves the spine-2 end by ``+-ceil(a_n^{7/8})``; ``minus78`` here is our
    addition giving the ``[lo, hi)`` variant.
    """

    gamma: float = 2.0
    beta: float = 0.0
    correction: str = "plus78"
    end_shift: str = "none"

    def __post_init__(self):
        if not self.gamma >= 1:
            raise FamilyError("gamma must be >= 1")
        if not self.beta >= 0:
            raise FamilyError("beta must be >= 0")
        if self.correction not in CORRECTIONS:
            raise FamilyError(f"unknown correction {self.correction!r}")
        if self.end_shift not in END_SHIFTS:
            raise FamilyError(f"unknown end_shift {self.end_shift!r}")

    def attach_index(self, a: int) -> int:
        idx = ceil_mul(self.gamma, a)
        if self.end_shift == "plus78":
            idx += ceil_pow78(a)
        elif self.end_shift == "minus78":
            idx -= ceil_pow78(a)
        return idx

    def bridge_length(self, a: int) -> int:
        length = ceil_mul(self.beta, a)
        if self.correction == "plus78":
            length += ceil_pow78(a)
        elif self.correction == "minus78":
            length -= ceil_pow78(a)
        if length < 1:
            raise FamilyError(f"bridge length underflow at a_n={a}")
        return length


@dataclass(frozen=True)
class LadderSpec:
    a: SequenceSpec = field(default_factory=lambda: SequenceSpec.geometric(256, 4, 3))
    rule: BridgeRule = field(default_factory=BridgeRule)
    tail: int = 8

    family = "ladder"

    @property
    def n_max(self) -> int:
        return self.a.count

    def geometry(self) -> list[tuple[int, int, int]]:
        """(a_n, attach index, bridge length) per level, validated."""
        rows = []
        prev = 0
        for a in self.a.terms():
            attach = self.rule.attach_index(a)
            if attach <= prev:
                raise FamilyError(f"overlapping attach index {attach} at a_n={a}")
            rows.append((a, attach, self.rule.bridge_length(a)))
            prev = attach
        return rows


def _default_deltas(alphas, n):
    pts = sorted(set([1.0, *alphas]))
    gaps = [y - x for x, y in zip(pts, pts[1:]) if y > x]
    d1 = 0.2 * min(gaps) if gaps else 0.2
    return tuple(d1 * 2.0 ** -(i) for i in range(n))


def _default_eps(k, n):
    return tuple(2.0 ** -(i + 1) / (2 * (k + 2)) for i in range(n))


@dataclass(frozen=True)
class MultiSpineSpec:
    alphas: tuple[float, ...] = (2.0, 4.0)
    b: SequenceSpec = field(default_factory=lambda: SequenceSpec.geometric(512, 4, 3))
    delta: Optional[tuple[float, ...]] = None
    eps: Optional[tuple[float, ...]] = None
    tail: int = 8

    family = "multispine"

    @property
    def k(self) -> int:
        return len(self.alphas)

    @property
    def n_max(self) -> int:
        return self.b.count

    @property
    def deltas(self) -> tuple[float, ...]:
        return self.delta if self.delta is not None else _default_deltas(self.alphas, self.n_max)

    @property
    def epsilons(self) -> tuple[float, ...]:
        return self.eps if self.eps is not None else _default_eps(self.k, self.n_max)

    def validate(self):
        if self.k < 1:
            raise FamilyError("k >= 1 required")
        if any(not a >= 1 for a in self.alphas):
            raise FamilyError("alphas must lie in [1, inf)")
        self.b.terms()
        for name, seq in (("delta", self.deltas), ("eps", self.epsilons)):
            if len(seq) != self.n_max:
                raise FamilyError(f"{name} needs one entry per level")
            if any(x <= 0 for x in seq) or any(y > x for x, y in zip(seq, seq[1:])):
                raise FamilyError(f"{name} must be positive and nonincreasing")
        if sum(self.epsilons) >= 1.0 / (self.k + 2):
            raise FamilyError("sum of eps must be < 1/(k+2)")


@dataclass(frozen=True)
class CountableSpec:
    alphas: tuple[float, ...] = (1.5, 3.0, 6.0)
    b: SequenceSpec = field(default_factory=lambda: SequenceSpec.geometric(64, 4, 3))
    tail: int = 8

    family = "countable"

    @property
    def n_max(self) -> int:
        return self.b.count

    def validate(self):
        self.b.terms()
        if len(self.alphas) < self.n_max:
            raise FamilyError("need one alpha per level")
        if self.alphas[0] < 1 or any(x >= y for x, y in zip(self.alphas, self.alphas[1:])):
            raise FamilyError("alphas must be strictly increasing with alpha_1 >= 1")


FamilySpec = Union[LadderSpec, MultiSpineSpec, CountableSpec]


@dataclass
class LandmarkMap:
    """Named vertices of a family graph.

    ``levels[n]`` lists the level-n landmarks: ``[v_{1,a_n}, v_{2,attach_n}]`` for the ladder,
    ``[x_{n,0}, ..., x_{n,k}]`` otherwise (level 0 holds the roots). ``bridges[n]`` holds the
    edge-id list of each level-n bridge and ``bridge_spine[n]`` the auxiliary spine it reaches.
    ``positions[n]`` are the spine indices of the level-n landmarks.
    """

    family: str
    spine_vertices: list[list[int]]
    spine_edges: list[list[int]]
    levels: list[list[int]]
    positions: list[list[int]]
    bridges: list[list[list[int]]]
    bridge_spine: list[list[int]]
    boundary: list[int]
    geometry: list[tuple] = field(default_factory=list)

    @property
    def n_max(self) -> int:
        return len(self.levels) - 1

    def level(self, n: int) -> list[int]:
        if not 0 <= n < len(self.levels):
            raise FamilyError(f"no landmarks for level {n}")
        return self.levels[n]

    def targets(self) -> set[int]:
        """Every level landmark at level >= 1."""
        return {v for lvl in self.levels[1:] for v in lvl}

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "levels": self.levels,
            "positions": self.positions,
            "bridges": self.bridges,
            "bridge_spine": self.bridge_spine,
            "spine_vertices": self.spine_vertices,
            "spine_edges": self.spine_edges,
            "boundary": self.boundary,
            "geometry": [list(g) for g in self.geometry],
        }


class _Spine:
    def __init__(self, b: GraphBuilder, root: int, name: str):
        self.b, self.name = b, name
        self.vertices = [root]
        self.edges: list[int] = []

    def extend(self, length: int) -> int:
        for _ in range(length):
            v = self.b.add_vertex(f"{self.name}:{len(self.vertices)}")
            self.edges.append(self.b.add_edge(self.vertices[-1], v))
            self.vertices.append(v)
        return self.vertices[-1]


def _bridge(b: GraphBuilder, u: int, w: int, length: int, name: str) -> list[int]:
    start = b.num_edges
    b.add_bridge(u, w, length, label=name)
    return list(range(start, b.num_edges))


def build_ladder(spec: LadderSpec) -> tuple[Graph, LandmarkMap]:
    if spec.tail < 0:
        raise FamilyError("tail must be >= 0")
    geom = spec.geometry()
    b = GraphBuilder()
    s1 = _Spine(b, b.add_vertex("s1:0"), "s1")
    s2 = _Spine(b, b.add_vertex("s2:0"), "s2")
    s1.extend(geom[-1][0] + spec.tail)
    s2.extend(geom[-1][1] + spec.tail)
    levels = [[s1.vertices[0], s2.vertices[0]]]
    positions = [[0, 0]]
    bridges: list[list[list[int]]] = [[]]
    for n, (a, attach, length) in enumerate(geom, start=1):
        u, w = s1.vertices[a], s2.vertices[attach]
        bridges.append([_bridge(b, u, w, length, f"B{n}")])
        levels.append([u, w])
        positions.append([a, attach])
    boundary = s1.vertices[len(s1.vertices) - spec.tail:] + s2.vertices[len(s2.vertices) - spec.tail:] \
        if spec.tail else [s1.vertices[-1], s2.vertices[-1]]
    lm = LandmarkMap("ladder", [s1.vertices, s2.vertices], [s1.edges, s2.edges], levels, positions,
                     bridges, [[]] + [[2] for _ in geom], boundary, geom)
    return b.freeze(), lm


def build_multispine(spec: MultiSpineSpec) -> tuple[Graph, LandmarkMap]:
    spec.validate()
    k = spec.k
    alphas = (1.0, *spec.alphas)
    bseq = spec.b.terms()
    b = GraphBuilder()
    x0 = [b.add_vertex(f"x0,{i}") for i in range(k + 1)]
    for i in range(k + 1):
        for j in range(i + 1, k + 1):
            b.add_edge(x0[i], x0[j])
    spines = [_Spine(b, x0[i], f"sp{i}") for i in range(k + 1)]
    levels = [x0]
    positions = [[0] * (k + 1)]
    bridges: list[list[list[int]]] = [[]]
    bridge_spine: list[list[int]] = [[]]
    geom = []
    for n, bn in enumerate(bseq, start=1):
        lens = [ceil_mul(al, bn) for al in alphas]
        xs = [spines[i].extend(lens[i]) for i in range(k + 1)]
        blen = ceil_pow78(bn)
        bridges.append([_bridge(b, xs[0], xs[i], blen, f"B{n},{i}") for i in range(1, k + 1)])
        bridge_spine.append(list(range(1, k + 1)))
        levels.append(xs)
        positions.append([len(sp.vertices) - 1 for sp in spines])
        geom.append((bn, *lens, blen))
    boundary = []
    for sp in spines:
        if spec.tail:
            sp.extend(spec.tail)
            boundary += sp.vertices[-spec.tail:]
        else:
            boundary.append(sp.vertices[-1])
    lm = LandmarkMap("multispine", [s.vertices for s in spines], [s.edges for s in spines], levels,
                     positions, bridges, bridge_spine, boundary, geom)
    return b.freeze(), lm


def build_countable(spec: CountableSpec) -> tuple[Graph, LandmarkMap]:
    spec.validate()
    alphas = (1.0, *spec.alphas)
    bseq = spec.b.terms()
    b = GraphBuilder()
    spines = [_Spine(b, b.add_vertex("x0,0"), "sp0")]
    levels = [[spines[0].vertices[0]]]
    positions = [[0]]
    bridges: list[list[list[int]]] = [[]]
    bridge_spine: list[list[int]] = [[]]
    geom = []
    for n, bn in enumerate(bseq):
        # step n -> n+1: extend spines 0..n, spawn spine n+1 off x_{n,n}
        lens = [ceil_mul(alphas[i], bn) for i in range(n + 1)]
        fork = spines[n].vertices[-1]
        xs = [spines[i].extend(lens[i]) for i in range(n + 1)]
        new = _Spine(b, fork, f"sp{n + 1}")
        new_len = ceil_mul(alphas[n + 1], bn)
        xs.append(new.extend(new_len))
        spines.append(new)
        blen = ceil_pow78(bn)
        bridges.append([_bridge(b, xs[0], xs[i], blen, f"B{n + 1},{i}") for i in range(1, n + 1)])
        bridge_spine.append(list(range(1, n + 1)))
        levels.append(xs)
        positions.append([len(sp.vertices) - 1 for sp in spines])
        geom.append((bn, *lens, new_len, blen))
    boundary = []
    for sp in spines:
        if spec.tail:
            sp.extend(spec.tail)
            boundary += sp.vertices[-spec.tail:]
        else:
            boundary.append(sp.vertices[-1])
    lm = LandmarkMap("countable", [s.vertices for s in spines], [s.edges for s in spines], levels,
                     positions, bridges, bridge_spine, boundary, geom)
    return b.freeze(), lm


def build(spec: FamilySpec) -> tuple[Graph, LandmarkMap]:
    if isinstance(spec, LadderSpec):
        return build_ladder(spec)
    if isinstance(spec, MultiSpineSpec):
        return build_multispine(spec)
    if isinstance(spec, CountableSpec):
        return build_countable(spec)
    raise FamilyError(f"unknown family spec {type(spec).__name__}")


def _fmt(x: float) -> str:
    return f"{x:.6g}"


@dataclass(frozen=True)
class Region:
    """Either a finite point set or an interval with per-endpoint closure."""

    points: tuple[float, ...] = ()
    lo: Optional[float] = None
    hi: Optional[float] = None
    lo_closed: bool = True
    hi_closed: bool = True

    @property
    def is_interval(self) -> bool:
        return self.lo is not None

    def contains(self, lam: float, tol: float = 1e-12) -> bool:
        if not self.is_interval:
            return any(abs(lam - p) <= tol for p in self.points)
        above = lam > self.lo - tol if self.lo_closed else lam > self.lo + tol
        below = lam < self.hi + tol if self.hi_closed else lam < self.hi - tol
        return above and below

    def __str__(self) -> str:
        if not self.is_interval:
            return "{" + ",".join(_fmt(p) for p in self.points) + "}"
        if self.lo == self.hi:
            return "{" + _fmt(self.lo) + "}" if self.lo_closed and self.hi_closed else "{}"
        return ("[" if self.lo_closed else "(") + f"{_fmt(self.lo)},{_fmt(self.hi)}" + \
            ("]" if self.hi_closed else ")")


def _sign(kind: str) -> int:
    return {"plus78": 1, "minus78": -1, "none": 0}[kind]


def predicted_region(spec: FamilySpec) -> Region:
    if isinstance(spec, LadderSpec):
        r = spec.rule
        lo, hi = r.gamma / (1 + r.beta), r.gamma + r.beta
        # lower-order terms: attach = gamma a + s c, length = beta a + t c, c = ceil(a^{7/8});
        # the mean of the losing race at an endpoint has the sign of the leftover c-terms
        s, t = _sign(r.end_shift), _sign(r.correction)
        hi_closed = s + t > 0
        lo_closed = t - s / lo > 0
        return Region(lo=lo, hi=hi, lo_closed=lo_closed, hi_closed=hi_closed)
    if isinstance(spec, MultiSpineSpec):
        return Region(points=tuple(sorted(set(spec.alphas))))
    if isinstance(spec, CountableSpec):
        return Region(points=tuple(spec.alphas[:spec.n_max]))
    raise FamilyError(f"unknown family spec {type(spec).__name__}")


def interval_rule(lo: float, hi: float) -> BridgeRule:
    """Bridge rule whose closed coexistence window is ``[lo, hi]``."""
    if not 1 <= lo < hi:
        raise FamilyError("need 1 <= lo < hi")
    return BridgeRule(gamma=lo * (1 + hi) / (1 + lo), beta=(hi - lo) / (1 + lo), correction="plus78")
