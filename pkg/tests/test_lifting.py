import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from covsurf.generate import (
    base_for,
    closed_cover,
    on_circle_configuration,
    open_cover,
    pruned_cover,
    random_monodromy,
)
from covsurf.lifting import (
    branch_boundary,
    classify_branches,
    d_inf_measured,
    disjointness_check,
    enumerate_branches,
    oracle_branches,
    pigeonhole_pair,
)
from covsurf.surface import degrees, validate
from covsurf.triangulate import shelling_order

# constructed instance: two sheets touch both lifts of the on-circle special point
TOUCH_GLUINGS = ([1, 0, 2, 4, 3], [2, 3, 4, 1, 0])


@pytest.fixture(scope="module")
def touching():
    E, cap = on_circle_configuration(np.random.default_rng(1))
    B = base_for(E, cap, 1, 0.0, 0)
    S = pruned_cover(B, [np.array(p) for p in TOUCH_GLUINGS], cap, 0)
    return E, S, shelling_order(B)


def _keys(branches):
    return {tuple(b.selection.tolist()) for b in branches}


@given(d=st.integers(1, 5), seed=st.integers(0, 10_000), which=st.integers(0, 4))
def test_matches_flood_fill(configs, d, seed, which):
    E, cap, B, sh = configs[which]
    S = open_cover(B, random_monodromy(d, E.q, np.random.default_rng(seed)), cap)
    br = enumerate_branches(S, sh)
    assert _keys(br) == oracle_branches(S)
    assert disjointness_check(br)
    assert len(br) >= degrees(S)[0] - d_inf_measured(S)


def test_closed_cover_sheets(closed_base):
    E, B = closed_base
    sh = shelling_order(B)
    for d in (1, 3, 6):
        S = closed_cover(B, random_monodromy(d, 3, np.random.default_rng(d)))
        br = enumerate_branches(S, sh)
        assert len(br) == d
        assert _keys(br) == oracle_branches(S)


def test_classification_bounds(configs):
    rng = np.random.default_rng(5)
    for E, cap, B, sh in configs:
        S = open_cover(B, random_monodromy(8, E.q, rng), cap)
        br = enumerate_branches(S, sh)
        cls = classify_branches(S, br)
        m, q = S.m, E.q
        assert len(cls.g_inf) - len(cls.g_2) <= m * q + m - 2
        assert len(cls.g_2) - len(cls.g_2p) <= m * q + m
        for i, H in enumerate(cls.boundary_hits):
            if not H:
                assert i in cls.g_2p and i not in cls.g_2pp


def test_frontier_encloses(configs):
    E, cap, B, sh = configs[1]
    S = open_cover(B, random_monodromy(6, E.q, np.random.default_rng(3)), cap)
    for b in enumerate_branches(S, sh):
        branch_boundary(S, b)
        s, e = b.jordan_core
        assert 0 <= s < e <= len(b.glued)
        assert not b.glued[s:e].any()


def test_touching_instance(touching):
    E, S, sh = touching
    assert validate(S) == []
    assert S.m == 2
    br = enumerate_branches(S, sh)
    cls = classify_branches(S, br)
    assert len(cls.g_2pp) == 2 > S.m * (S.m - 1) // 2
    i, j = pigeonhole_pair(cls)
    assert cls.boundary_hits[i] == cls.boundary_hits[j]
    assert len(set(cls.images[i])) == 1
