import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from covsurf.generate import (
    closed_cover,
    open_cover,
    random_monodromy,
    restricted_cover,
    z2_gluings,
)
from covsurf.surface import (
    PreconditionError,
    branch_report,
    degree_spread_check,
    degrees,
    area_bound_check,
    is_Fr,
    measures,
    riemann_hurwitz_sum,
    validate,
    h0_objective,
    h0_constant,
)

# frozen oracles for z -> z^2 over {0, 1, inf}
Z2_CLOSED = dict(chi=2, rh=2, nbar=4, area=8 * math.pi, vertices=16)
Z2_DISK = dict(deg=(0, 2), area=4 * math.pi, length=4 * math.pi, nbar=1, marks=4)
H0 = 4.034159790535632


def test_z2_closed(closed_base):
    E, B = closed_base
    S = closed_cover(B, z2_gluings(B.beta.ordering))
    assert validate(S) == []
    assert S.euler_characteristic == Z2_CLOSED["chi"]
    assert riemann_hurwitz_sum(S) == Z2_CLOSED["rh"]
    assert S.n_vertices == Z2_CLOSED["vertices"]
    M = measures(S, E)
    assert M.nbar == Z2_CLOSED["nbar"]
    assert abs(M.A - Z2_CLOSED["area"]) < 1e-9
    pts = branch_report(S).points
    assert sorted((p.order, p.image) for p in pts) == [(2, 0), (2, 2)]
    with pytest.raises(PreconditionError):
        measures(S, E, need_H=True)
    with pytest.raises(PreconditionError):
        area_bound_check(S, E)


def test_z2_unit_disk(z2_setup):
    E, cap, B = z2_setup
    S = restricted_cover(B, z2_gluings(B.beta.ordering), cap)
    assert validate(S) == []
    assert degrees(S) == Z2_DISK["deg"]
    M = measures(S, E)
    assert abs(M.A - Z2_DISK["area"]) < 1e-9
    assert abs(M.L - Z2_DISK["length"]) < 1e-9
    assert M.nbar == Z2_DISK["nbar"]
    assert abs(M.R) < 1e-9
    assert M.R_integer_part == -4
    assert S.m == Z2_DISK["marks"]
    assert S.arc_assignment == (0, 1, 0, 1)
    assert is_Fr(S) and degree_spread_check(S)


def test_orientation_fault_detected(z2_setup):
    E, cap, B = z2_setup
    S = restricted_cover(B, z2_gluings(B.beta.ordering), cap).copy()
    slots = S.slot_array().copy()
    slots[0] = slots[0][[1, 0, 2]]
    S.slots = slots
    assert any("orientation" in p for p in validate(S))


def test_twin_fault_detected(closed_base):
    E, B = closed_base
    S = closed_cover(B, z2_gluings(B.beta.ordering)).copy()
    tw = S.twin.copy()
    tw[0], tw[3] = tw[3], tw[0]
    S.twin = tw
    assert validate(S) != []


def test_h0_constant():
    theta, h = h0_constant()
    assert abs(h - H0) < 1e-10
    grid = np.linspace(0, math.pi / 2, 100_001)
    assert h >= h0_objective(grid).max() - 1e-12
    assert 0 < theta < math.pi / 2


@given(st.integers(1, 7), st.integers(0, 10_000))
def test_riemann_hurwitz_closed(d, seed):
    from covsurf.generate import base_for, standard_special_set
    E = standard_special_set()
    B = base_for(E, None, 0)
    S = closed_cover(B, random_monodromy(d, 3, np.random.default_rng(seed)))
    assert validate(S) == []
    assert riemann_hurwitz_sum(S) == 2 * d - 2
    assert measures(S, E).nbar == (E.q - 2) * d + 2


@given(d=st.integers(1, 6), seed=st.integers(0, 10_000), which=st.integers(0, 4))
def test_open_cover_invariants(configs, d, seed, which):
    E, cap, B, sh = configs[which]
    S = open_cover(B, random_monodromy(d, E.q, np.random.default_rng(seed)), cap)
    assert validate(S) == []
    assert S.euler_characteristic == 1
    assert riemann_hurwitz_sum(S) <= 2 * d - 2
    assert area_bound_check(S, E)


def test_open_covers(configs):
    rng = np.random.default_rng(11)
    for E, cap, B, sh in configs:
        for d in (1, 2, 5):
            S = open_cover(B, random_monodromy(d, E.q, rng), cap)
            assert validate(S) == []
            assert degrees(S) == (d - 1, d)
            assert is_Fr(S) and degree_spread_check(S) and area_bound_check(S, E)
            M = measures(S, E)
            assert abs(M.A - (d * 4 * math.pi - B.face_areas[~_inside(B, cap)].sum())) < 1e-9


def _inside(B, cap):
    from covsurf.generate import cap_faces
    return cap_faces(B, cap, list(range(len(B.constraint_edges))))
