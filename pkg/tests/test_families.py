import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from richardson.families import (BridgeRule, CountableSpec, FamilyError, LadderSpec, MultiSpineSpec, Region,
                                 SequenceSpec, build, build_countable, build_ladder, build_multispine,
                                 ceil_pow78, interval_rule, predicted_region)
from richardson.graph import is_connected


def _ladder(a, gamma=2.0, beta=0.0, correction="plus78", end_shift="none", tail=4):
    return LadderSpec(SequenceSpec.explicit(a), BridgeRule(gamma, beta, correction, end_shift), tail)


@pytest.mark.parametrize("a,expected", [(4, 4), (16, 12), (256, 128), (1024, 431), (4096, 1449)])
def test_ceil_pow78_values(a, expected):
    assert ceil_pow78(a) == expected


@given(st.integers(min_value=1, max_value=10 ** 9))
@settings(max_examples=300)
def test_ceil_pow78_matches_high_precision(a):
    with mpmath.workdps(60):
        assert ceil_pow78(a) == int(mpmath.ceil(mpmath.mpf(a) ** mpmath.mpf("0.875")))


def test_sequence_spec():
    assert SequenceSpec.geometric(256, 4, 3).terms() == [256, 1024, 4096]
    with pytest.raises(FamilyError):
        SequenceSpec.explicit([4, 4]).terms()
    with pytest.raises(FamilyError):
        SequenceSpec.geometric(2, 1, 3).terms()


def test_ladder_single_level():
    g, lm = build_ladder(_ladder([4]))
    v1, v2 = lm.levels[1]
    assert lm.positions[1] == [4, 8]
    assert v1 == lm.spine_vertices[0][4] and v2 == lm.spine_vertices[1][8]
    assert len(lm.bridges[1][0]) == 4
    assert g.label(v1) == "s1:4" and g.label(v2) == "s2:8"


def test_ladder_bridge_lengths_default():
    g, lm = build_ladder(_ladder([256, 1024, 4096]))
    assert [len(lm.bridges[n][0]) for n in (1, 2, 3)] == [128, 431, 1449]


def test_prop22_geometry():
    g, lm = build_ladder(_ladder([256], gamma=4.0, beta=1.0))
    assert lm.positions[1] == [256, 1024]
    assert len(lm.bridges[1][0]) == 384


def test_bridge_endpoints_are_landmarks():
    g, lm = build_ladder(_ladder([16, 64]))
    for n in (1, 2):
        edges = lm.bridges[n][0]
        ends = [v for e in (edges[0], edges[-1]) for v in g.endpoints(e)]
        assert lm.levels[n][0] in ends and lm.levels[n][1] in ends


def test_ladder_errors():
    with pytest.raises(FamilyError, match="underflow"):
        build_ladder(_ladder([16], beta=0.0, correction="minus78"))
    with pytest.raises(FamilyError, match="overlapping"):
        build_ladder(_ladder([10, 11], gamma=1.0, end_shift="minus78"))


def test_multispine_one_level():
    spec = MultiSpineSpec((2.0,), SequenceSpec.explicit([16]), tail=0)
    g, lm = build_multispine(spec)
    x0, x1 = lm.levels[1]
    assert lm.positions[1] == [16, 32]
    assert len(lm.bridges[1][0]) == 12
    assert len(lm.levels[0]) == 2


def test_multispine_k2_triangle():
    spec = MultiSpineSpec((2.0, 3.0), SequenceSpec.explicit([16, 64]), tail=2)
    g, lm = build_multispine(spec)
    x0 = lm.levels[0]
    for i in range(3):
        for j in range(i + 1, 3):
            assert any(w == x0[j] for w, _ in g.neighbors(x0[i]))
    assert all(len(lvl) == 3 for lvl in lm.levels)
    assert g.max_degree <= spec.k + 2


def test_multispine_validation():
    with pytest.raises(FamilyError, match="k >= 1"):
        build_multispine(MultiSpineSpec((), SequenceSpec.explicit([16])))
    with pytest.raises(FamilyError, match="1/\\(k\\+2\\)"):
        build_multispine(MultiSpineSpec((2.0,), SequenceSpec.explicit([16, 64]), eps=(0.3, 0.1)))
    spec = MultiSpineSpec((2.0, 4.0))
    assert sum(spec.epsilons) < 1 / 4
    assert all(x > y for x, y in zip(spec.deltas, spec.deltas[1:]))


def test_countable_levels():
    spec = CountableSpec((1.5, 3.0, 6.0), SequenceSpec.explicit([8, 32, 128]), tail=2)
    g, lm = build_countable(spec)
    # level 1 has no bridges, level n+1 has n of them
    assert [len(lm.bridges[n]) for n in (1, 2, 3)] == [0, 1, 2]
    assert [len(lm.levels[n]) for n in range(4)] == [1, 2, 3, 4]
    assert len(lm.spine_vertices) == 4
    assert len(lm.bridges[2][0]) == ceil_pow78(32)
    assert all(len(br) == ceil_pow78(128) for br in lm.bridges[3])
    # spine n+1 forks off x_{n,n}
    assert lm.spine_vertices[2][0] == lm.levels[1][1]
    assert is_connected(g)


def test_countable_one_level():
    g, lm = build_countable(CountableSpec((2.0,), SequenceSpec.explicit([8]), tail=0))
    assert len(lm.spine_vertices) == 2 and lm.bridges[1] == []


ALL_SPECS = [
    _ladder([16, 64, 256]),
    _ladder([16, 64], gamma=4.0, beta=1.0),
    _ladder([16, 64], gamma=4.0, beta=1.0, correction="minus78"),
    _ladder([16, 64], gamma=4.0, beta=1.0, correction="none", end_shift="plus78"),
    MultiSpineSpec((2.0, 4.0), SequenceSpec.explicit([16, 64]), tail=3),
    MultiSpineSpec((1.5, 2.5, 5.0), SequenceSpec.explicit([8, 32]), tail=0),
    CountableSpec((1.5, 3.0, 6.0), SequenceSpec.explicit([8, 32, 128]), tail=2),
]


@pytest.mark.parametrize("spec", ALL_SPECS)
def test_family_invariants(spec):
    g, lm = build(spec)
    assert is_connected(g)
    if spec.family == "ladder":
        assert g.max_degree <= 3
    elif spec.family == "multispine":
        assert g.max_degree <= spec.k + 2
    # every landmark resolves and spine edge lists walk the spine
    for verts, edges in zip(lm.spine_vertices, lm.spine_edges):
        assert len(verts) == len(edges) + 1
        for j, e in enumerate(edges):
            assert set(g.endpoints(e)) == {verts[j], verts[j + 1]}
    for n in range(1, lm.n_max + 1):
        for s, (v, pos) in enumerate(zip(lm.levels[n], lm.positions[n])):
            assert lm.spine_vertices[s][pos] == v
    for lvl in lm.bridges:
        for edges in lvl:
            assert all(0 <= e < g.num_edges for e in edges)


@pytest.mark.parametrize("spec", ALL_SPECS)
def test_builders_deterministic(spec):
    g1, lm1 = build(spec)
    g2, lm2 = build(spec)
    assert np.array_equal(g1.edge_u, g2.edge_u) and np.array_equal(g1.edge_v, g2.edge_v)
    assert lm1.to_dict() == lm2.to_dict()


def test_landmark_positions_match_geometry():
    g, lm = build_ladder(_ladder([16, 64, 256]))
    for n, (a, attach, _) in enumerate(lm.geometry, start=1):
        assert lm.positions[n] == [a, attach]


@pytest.mark.parametrize("gamma,beta,correction,end_shift,text", [
    (2.0, 0.0, "plus78", "none", "{2}"),
    (4.0, 1.0, "plus78", "none", "[2,5]"),
    (4.0, 1.0, "minus78", "none", "(2,5)"),
    (4.0, 1.0, "none", "plus78", "(2,5]"),
    (4.0, 1.0, "none", "minus78", "[2,5)"),
])
def test_predicted_region_ladder(gamma, beta, correction, end_shift, text):
    spec = LadderSpec(SequenceSpec.geometric(256, 4, 3), BridgeRule(gamma, beta, correction, end_shift))
    assert str(predicted_region(spec)) == text


def test_predicted_region_points():
    assert str(predicted_region(MultiSpineSpec((4.0, 2.0)))) == "{2,4}"
    assert str(predicted_region(CountableSpec((1.5, 3.0, 6.0, 12.0)))) == "{1.5,3,6}"


@given(st.floats(1, 50), st.one_of(st.just(0.0), st.floats(1e-3, 50)))
def test_region_endpoint_order(gamma, beta):
    r = predicted_region(LadderSpec(rule=BridgeRule(gamma, beta)))
    assert r.lo <= r.hi
    assert (r.lo == r.hi) == (beta == 0)


def test_region_contains():
    r = Region(lo=2.0, hi=5.0, lo_closed=False, hi_closed=True)
    assert not r.contains(2.0) and r.contains(5.0) and r.contains(3.0) and not r.contains(5.5)
    assert Region(points=(2.0,)).contains(2.0)


@pytest.mark.parametrize("lo,hi", [(2.0, 5.0), (1.0, 3.0), (1.5, 1.75)])
def test_interval_rule(lo, hi):
    spec = LadderSpec(rule=interval_rule(lo, hi))
    r = predicted_region(spec)
    assert r.lo == pytest.approx(lo) and r.hi == pytest.approx(hi)
    assert r.lo_closed and r.hi_closed


def test_interval_rule_two_five():
    rule = interval_rule(2.0, 5.0)
    assert rule.gamma == pytest.approx(4.0) and rule.beta == pytest.approx(1.0)
    assert rule.attach_index(256) == 1024 and rule.bridge_length(256) == 384
