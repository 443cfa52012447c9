"""Post-processing of outcomes on family graphs: D-events, strangulation, coexistence."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import CompetitionOutcome
from .families import FamilyError, LandmarkMap


class VerdictError(ValueError):
    pass


@dataclass(frozen=True)
class LevelVerdict:
    level: int
    D1: bool
    D2: bool
    type1_reached_landmark: bool
    type2_reached_landmark: bool


@dataclass(frozen=True)
class CoexistenceVerdict:
    survived_to_level: int
    strangled_type: str
    scenario: str


def _ladder(lm: LandmarkMap, n: int):
    if lm.family != "ladder":
        raise VerdictError("D-events are defined on ladder landmark maps only")
    if not 1 <= n <= lm.n_max:
        raise VerdictError(f"level {n} outside truncation 1..{lm.n_max}")


def passage_sums(w: np.ndarray, lm: LandmarkMap, n: int) -> tuple[float, float, float]:
    """(spine-1 sum to v_{1,a_n}, spine-2 sum to the attach vertex, bridge n sum)."""
    _ladder(lm, n)
    a, attach = lm.positions[n]
    s1 = float(np.sum(w[lm.spine_edges[0][:a]]))
    s2 = float(np.sum(w[lm.spine_edges[1][:attach]]))
    sb = float(np.sum(w[lm.bridges[n][0]]))
    return s1, s2, sb


def race_margins(w: np.ndarray, lm: LandmarkMap, n: int, lam: float) -> tuple[float, float]:
    """(T_{1,n}, T_{2,n}); the level-n D-events are ``T < 0``."""
    s1, s2, sb = passage_sums(w, lm, n)
    return s2 / lam + sb / lam - s1, s1 + sb - s2 / lam


def eval_D1(w: np.ndarray, lm: LandmarkMap, n: int, lam: float) -> bool:
    """Type 2 crosses bridge n and reaches ``v_{1,a_n}`` ahead of type 1."""
    s1, s2, sb = passage_sums(w, lm, n)
    return s1 > s2 / lam + sb / lam


def eval_D2(w: np.ndarray, lm: LandmarkMap, n: int, lam: float) -> bool:
    s1, s2, sb = passage_sums(w, lm, n)
    return s2 / lam > s1 + sb


def strangulation_check(out: CompetitionOutcome) -> str:
    ex1, ex2 = out.frontier_exhausted
    if ex1 and not ex2:
        return "1"
    if ex2 and not ex1:
        return "2"
    return "none"


def coexistence_indicator(out: CompetitionOutcome, lm: LandmarkMap, n: int) -> bool:
    """Type 1 holds the main level-n landmark and type 2 holds an auxiliary one."""
    try:
        lvl = lm.level(n)
    except FamilyError as exc:
        raise VerdictError(str(exc)) from None
    if n < 1:
        raise VerdictError("levels start at 1")
    vt = out.vtype
    return bool(vt[lvl[0]] == 1 and any(vt[x] == 2 for x in lvl[1:]))


def survived_to_level(out: CompetitionOutcome, lm: LandmarkMap, start: int = 0) -> int:
    """Largest n with the indicator holding at every level in ``(start, n]``."""
    n = start
    while n < lm.n_max and coexistence_indicator(out, lm, n + 1):
        n += 1
    return n


def scenario_classify(out: CompetitionOutcome, lm: LandmarkMap) -> str:
    """Which type owns the far end of each spine of a ladder."""
    if lm.family != "ladder":
        return "undetermined"
    end1 = out.vtype[lm.spine_vertices[0][-1]]
    end2 = out.vtype[lm.spine_vertices[1][-1]]
    if end1 == 1 and end2 == 2:
        return "spine_split_i"
    if end1 == 2 and end2 == 1:
        return "spine_split_ii"
    return "undetermined"


def level_verdict(out: CompetitionOutcome, w: np.ndarray, lm: LandmarkMap, n: int) -> LevelVerdict:
    main, aux = lm.level(n)[0], lm.level(n)[1:]
    d1 = d2 = False
    if lm.family == "ladder":
        d1 = eval_D1(w, lm, n, out.lam)
        d2 = eval_D2(w, lm, n, out.lam)
    return LevelVerdict(n, d1, d2, bool(out.vtype[main] == 1), any(out.vtype[x] == 2 for x in aux))


def verdict(out: CompetitionOutcome, lm: LandmarkMap) -> CoexistenceVerdict:
    return CoexistenceVerdict(survived_to_level(out, lm), strangulation_check(out),
                              scenario_classify(out, lm))
