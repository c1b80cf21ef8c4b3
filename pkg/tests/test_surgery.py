import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from covsurf.generate import base_for, on_circle_configuration, open_cover, pruned_cover, random_monodromy
from covsurf.lifting import classify_selections, enumerate_branches, enumerate_selections
from covsurf.surface import PreconditionError, degrees, measures, validate
from covsurf.surgery import (
    SurgeryError,
    alternative_cut,
    build_cut_from_branch,
    d_inf_bound,
    d_star,
    reduce,
    reglue,
    sew_split,
    split_components,
)
from covsurf.triangulate import shelling_order

D_STAR_2_3 = 72615
# both doubly touching sheet pairs reach the contact points in the same order here
ALT_GLUINGS = ([3, 4, 5, 0, 1, 2], [5, 3, 4, 1, 2, 0])
ALT_LEDGER = dict(d=2, nbar=5, nbar0=4, nbar1=3)


def test_degree_bound():
    assert d_inf_bound(2, 3) == 72600
    assert d_star(2, 3) == D_STAR_2_3


@given(st.integers(1, 40), st.data())
def test_reglue_is_involution(n, data):
    perm = np.array(data.draw(st.permutations(range(6 * n))))
    twin = np.empty(6 * n, dtype=np.int64)
    twin[perm[::2]], twin[perm[1::2]] = perm[1::2], perm[::2]
    k = data.draw(st.integers(1, n))
    p, tp, m, tm = perm[:2 * k:2], perm[1:2 * k:2], perm[2 * k:4 * k:2], perm[2 * k + 1:4 * k:2]
    tw = reglue(twin, p, tp, m, tm)
    assert np.array_equal(tw[tw], np.arange(6 * n))
    assert np.array_equal(tw[p], m) and np.array_equal(tw[tp], tm)


def test_split_components_counts():
    # two separate cells glued to themselves pairwise
    tw = np.array([1, 0, -1, 4, 3, -1])
    lab = split_components(tw)
    assert lab[0] != lab[1]


def _check_ledger(S, res, E):
    L = res.ledger
    assert res.sigma1.boundary_word() == S.boundary_word()
    assert L.nbar == L.nbar0 + L.nbar1 - 2
    assert abs(L.A0 - 4 * math.pi * L.d) <= 1e-9 * L.A0
    assert abs(L.A - L.A0 - L.A1) <= 1e-9 * L.A
    assert L.nbar0 == (E.q - 2) * L.d + 2
    before, after = measures(S, E), measures(res.sigma1, E)
    assert after.R_integer_part - before.R_integer_part == -4 * (L.nbar1 - L.nbar)
    assert abs(after.R - before.R) <= 1e-9 * max(1.0, abs(before.R))
    assert degrees(res.sigma1)[0] == degrees(S)[0] - L.d
    assert validate(res.sigma0) == [] and validate(res.sigma1) == []


@given(d=st.integers(2, 9), seed=st.integers(0, 10_000), which=st.integers(0, 4))
def test_sew_ledger(configs, d, seed, which):
    E, cap, B, sh = configs[which]
    S = open_cover(B, random_monodromy(d, E.q, np.random.default_rng(seed)), cap)
    br = enumerate_branches(S, sh)
    cut = build_cut_from_branch(S, br[0])
    _check_ledger(S, sew_split(S, cut, E), E)


def test_reduce_to_target(configs):
    E, cap, B, sh = configs[2]
    S = open_cover(B, random_monodromy(12, E.q, np.random.default_rng(9)), cap)
    trace = []
    R = reduce(S, E, sh, target=3, trace=trace)
    assert degrees(R)[0] <= 3
    assert R.boundary_word() == S.boundary_word()
    assert abs(measures(R, E).H - measures(S, E).H) <= 1e-9 * abs(measures(S, E).H)
    assert all(t.deg_min_after < t.deg_min_before for t in trace)


def test_reduce_noop_below_target(configs):
    E, cap, B, sh = configs[0]
    S = open_cover(B, random_monodromy(4, E.q, np.random.default_rng(1)), cap)
    assert reduce(S, E, sh) is S


@pytest.fixture(scope="module")
def alt_instance():
    E, cap = on_circle_configuration(np.random.default_rng(1))
    B = base_for(E, cap, 1, 0.0, 0)
    S = pruned_cover(B, [np.array(p) for p in ALT_GLUINGS], cap, 0)
    return E, S, shelling_order(B)


def test_alternative_cut(alt_instance):
    E, S, sh = alt_instance
    sel = enumerate_selections(S, sh)
    cls = classify_selections(S, sel)
    assert cls.g_2pp and set(cls.g_2pp) == set(cls.g_2p)
    cut = alternative_cut(S, cls, sel)
    assert np.array_equal(S.base_halfedge[cut.plus_left], S.base_halfedge[cut.minus_left])
    res = sew_split(S, cut, E)
    L = res.ledger
    assert (L.d, L.nbar, L.nbar0, L.nbar1) == tuple(ALT_LEDGER.values())
    _check_ledger(S, res, E)


def test_alternative_cut_needs_enough_sheets(alt_instance):
    E, S, sh = alt_instance
    sel = enumerate_selections(S, sh)
    cls = classify_selections(S, sel)
    cls.g_2pp = cls.g_2pp[:1]
    with pytest.raises(PreconditionError):
        alternative_cut(S, cls, sel)


def test_reduce_uses_alternative_cut(alt_instance):
    E, S, sh = alt_instance
    trace = []
    R = reduce(S, E, sh, target=0, trace=trace)
    assert trace and trace[0].kind == "pigeonhole"
    assert R.boundary_word() == S.boundary_word()


def test_boundary_cut_rejected(configs):
    E, cap, B, sh = configs[0]
    S = open_cover(B, random_monodromy(3, E.q, np.random.default_rng(2)), cap)
    b = enumerate_branches(S, sh)[0]
    cut = build_cut_from_branch(S, b)
    cut.plus_right = cut.plus_right.copy()
    cut.plus_right[0] = -1
    with pytest.raises(SurgeryError):
        sew_split(S, cut, E)
