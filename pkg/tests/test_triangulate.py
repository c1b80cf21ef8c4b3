import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from covsurf.generate import random_configuration, standard_special_set
from covsurf.sphgeo import circle_arcs
from covsurf.triangulate import (
    build_base,
    c1_bound,
    c2_bound,
    check_shelling,
    construct_beta,
    face_bound,
    path_is_simple,
    prefix_is_disk,
    shelling_order,
)


def test_bound_constants():
    # C1 = k(2k+1), C2 = 2 C1, bound = 2 C1 C2
    assert [c1_bound(k) for k in (3, 5)] == [21, 55]
    assert c2_bound(5) == 110
    assert face_bound(5) == 12100


def test_standard_base(closed_base):
    E, B = closed_base
    assert B.check() == []
    assert B.beta.ordering == (0, 1, 2)
    assert B.n_faces == 14
    assert abs(B.face_areas.sum() - 4 * math.pi) < 1e-9


def test_constrained_bases(configs):
    for E, cap, B, sh in configs:
        assert B.check() == []
        assert abs(B.face_areas.sum() - 4 * math.pi) < 1e-9
        # every special point is a vertex and the cut path visits them in order
        assert len(B.special_vertices) == E.q
        assert len(B.beta_segment_edges) == E.q - 1
        assert check_shelling(B, sh) == []


def test_shelling_prefixes_are_disks(configs):
    E, cap, B, sh = configs[0]
    seq = sh.face_sequence
    for k in range(1, len(seq) + 1):
        assert prefix_is_disk(B, set(seq[:k]))


def test_cut_path_simple():
    E = standard_special_set()
    beta = construct_beta(E, 3)
    assert path_is_simple(beta.segments)
    assert sorted(beta.ordering) == [0, 1, 2]


@given(st.integers(0, 10_000), st.integers(3, 5), st.integers(1, 4))
def test_random_base_is_valid(seed, q, m):
    rng = np.random.default_rng(seed)
    E, cap = random_configuration(rng, q)
    B = build_base(circle_arcs(cap, m, 0.0), E, seed)
    assert B.check() == []
    assert np.all(B.face_areas > 0)
    assert abs(B.face_areas.sum() - 4 * math.pi) < 1e-9
    # constraint arcs are covered by chains of edges of the same total length
    for arc, edges in zip(B.constraint_arcs, B.constraint_edges):
        assert abs(sum(B.edge_lengths[e] for e in edges) - arc.length) < 1e-9
