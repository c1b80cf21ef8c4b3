"""Covering surfaces built from sheet permutations across the cut path.

Every base face gets ``d`` copies (sheets). Copies are glued identically across
ordinary edges and by a permutation across each cut segment. Removing one sheet
over the outside of a convex cap opens the closed cover into a disk whose
boundary runs once around the cap circle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .sphgeo import Circle, SpecialSet, SpherePoint, circle_arcs, geodesic_distance, stereographic_project
from .surface import CoveringSurface
from .triangulate import SphereTriangulation, build_base


class GenerationError(ValueError):
    pass


@dataclass
class MonodromyData:
    degree: int
    gluings: list[np.ndarray]
    cap: Circle | None = None
    m: int = 0
    removed_sheet: int = 0
    phase: float = 0.0

    def __post_init__(self):
        self.gluings = [np.asarray(p, dtype=np.int64) for p in self.gluings]
        for p in self.gluings:
            if sorted(p.tolist()) != list(range(self.degree)):
                raise GenerationError("gluing is not a permutation of the sheets")


def compose(p: np.ndarray, t: np.ndarray) -> np.ndarray:
    """``p`` after ``t``."""
    return p[t]


def inverse(p: np.ndarray) -> np.ndarray:
    out = np.empty_like(p)
    out[p] = np.arange(len(p))
    return out


def transitive(perms, d: int) -> bool:
    if d == 1:
        return True
    rows = np.concatenate([np.arange(d)] * len(perms))
    cols = np.concatenate(perms)
    g = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(d, d))
    return connected_components(g, directed=False)[0] == 1


def local_monodromy(gluings: list[np.ndarray]) -> list[np.ndarray]:
    """Permutation around each special point, in cut order."""
    d = len(gluings[0])
    ident = np.arange(d)
    full = [ident] + list(gluings) + [ident]
    return [compose(inverse(full[j]), full[j + 1]) for j in range(len(gluings) + 1)]


def gluings_from_local(sigmas: list[np.ndarray]) -> list[np.ndarray]:
    """Inverse of :func:`local_monodromy`; the product of ``sigmas`` must be the identity."""
    out = [np.asarray(sigmas[0])]
    for s in sigmas[1:-1]:
        out.append(compose(out[-1], np.asarray(s)))
    if not np.array_equal(compose(out[-1], np.asarray(sigmas[-1])), np.arange(len(out[0]))):
        raise GenerationError("local permutations do not multiply to the identity")
    return out


def cycle_count(p: np.ndarray) -> int:
    seen = np.zeros(len(p), dtype=bool)
    n = 0
    for i in range(len(p)):
        if not seen[i]:
            n += 1
            j = i
            while not seen[j]:
                seen[j] = True
                j = p[j]
    return n


def random_monodromy(degree: int, q: int, rng: np.random.Generator) -> list[np.ndarray]:
    """Planar sheet gluings: each new sheet is attached to an old one across a random segment."""
    perms = [np.arange(degree) for _ in range(q - 1)]
    seg = rng.integers(q - 1, size=degree)
    old = (rng.random(degree) * np.arange(degree)).astype(np.int64)
    for n in range(1, degree):
        # compose with the transposition (old n) applied first
        p = perms[seg[n]]
        s = old[n]
        p[s], p[n] = p[n], p[s]
    # relabel sheets so sheet 0 is not special
    relabel = rng.permutation(degree)
    inv = inverse(relabel)
    return [relabel[p[inv]] for p in perms]


def z2_gluings(beta_ordering, branch_indices=(0, 2)) -> list[np.ndarray]:
    """Two sheets with simple branching over the special points ``branch_indices``."""
    swap = np.array([1, 0])
    ident = np.array([0, 1])
    sigmas = [swap if i in branch_indices else ident for i in beta_ordering]
    return gluings_from_local(sigmas)


# -- base cache ----------------------------------------------------------------

_BASES: dict = {}


def _base_key(E: SpecialSet, cap: Circle | None, m: int, phase: float, axis_seed: int):
    ck = None if cap is None else (tuple(np.round(cap.n, 15)), round(cap.height, 15))
    return (tuple(tuple(np.round(p.vec, 15)) for p in E.points), ck, m, round(phase, 15), axis_seed)


def base_for(E: SpecialSet, cap: Circle | None, m: int, phase: float = 0.0, axis_seed: int = 0) -> SphereTriangulation:
    key = _base_key(E, cap, m, phase, axis_seed)
    if key not in _BASES:
        arcs = [] if cap is None else circle_arcs(cap, m, phase, orientation=1)
        _BASES[key] = build_base(arcs, E, axis_seed)
    return _BASES[key]


# -- the construction ----------------------------------------------------------

def _sheet_twins(B: SphereTriangulation, gluings: list[np.ndarray]) -> np.ndarray:
    """``(d, 3F)`` twin half-edges of all cells, cells numbered ``s*F + f``."""
    d = len(gluings[0])
    F = B.n_faces
    tw = B.he_twin
    sheet_to = np.broadcast_to(np.arange(d)[:, None], (d, 3 * F)).copy()
    plus, minus = B.beta_halfedges
    seg = B.beta_segment_of
    for h, j in zip(plus.tolist(), seg.tolist()):
        sheet_to[:, h] = gluings[j]
    for h, j in zip(minus.tolist(), seg.tolist()):
        sheet_to[:, h] = inverse(gluings[j])
    return sheet_to * (3 * F) + tw[None, :]


def cap_faces(B: SphereTriangulation, cap: Circle, cap_arcs: list[int]) -> np.ndarray:
    """Mask of base faces on the left (inside) of the cap circle."""
    circle_edges = np.zeros(B.n_edges, dtype=bool)
    for ci in cap_arcs:
        circle_edges[B.constraint_edges[ci]] = True
    F = B.n_faces
    h = np.arange(3 * F)
    keep = ~circle_edges[B.he_edge]
    g = coo_matrix((np.ones(int(keep.sum())), (h[keep] // 3, B.he_twin[h[keep]] // 3)), shape=(F, F))
    ncomp, comp = connected_components(g, directed=False)
    cent = B.points[B.faces].mean(axis=1)
    cent /= np.linalg.norm(cent, axis=1)[:, None]
    side = cent @ cap.n > cap.height
    inside_comp = np.zeros(ncomp, dtype=bool)
    for c in range(ncomp):
        inside_comp[c] = side[comp == c].mean() > 0.5
    return inside_comp[comp]


def closed_cover(B: SphereTriangulation, gluings: list[np.ndarray]) -> CoveringSurface:
    d = len(gluings[0])
    if not transitive(gluings, d):
        raise GenerationError("gluing permutations are not transitive")
    F = B.n_faces
    label = np.tile(np.arange(F), d)
    twin = _sheet_twins(B, gluings).reshape(-1)
    return CoveringSurface(B, "sphere", label, twin, meta={"degree": d})


def _restrict(S: CoveringSurface, keep: np.ndarray) -> CoveringSurface:
    """Sub-surface on the kept cells, with marks at the start of every lifted base arc."""
    B = S.base
    new_id = -np.ones(S.n_cells, dtype=np.int64)
    new_id[keep] = np.arange(int(keep.sum()))
    tw = S.twin.reshape(-1, 3)[keep].reshape(-1)
    tc = tw // 3
    tw = np.where(keep[tc], 3 * new_id[tc] + tw % 3, -1)
    T = CoveringSurface(B, "disk", S.label[keep], tw, meta=dict(S.meta))
    starts = {int(B.edge_halfedges[B.constraint_edges[ci][0], 0]): ci for ci in range(len(B.constraint_edges))}
    cyc = T.boundary_cycles[0] if T.boundary_cycles else []
    marks, assign = [], []
    for h in cyc:
        ci = starts.get(int(T.base_halfedge[h]))
        if ci is not None:
            marks.append(h)
            assign.append(ci)
    T.marks, T.arc_assignment = tuple(marks), tuple(assign)
    T.__dict__.pop("boundary_cycle", None)
    return T


def open_cover(B: SphereTriangulation, gluings: list[np.ndarray], cap: Circle,
               removed_sheet: int = 0) -> CoveringSurface:
    """Closed cover with one sheet over the outside of the cap taken away."""
    S = closed_cover(B, gluings)
    F = B.n_faces
    inside = cap_faces(B, cap, list(range(len(B.constraint_edges))))
    if not np.all(inside[np.isin(B.faces, B.special_vertices).any(axis=1)]):
        raise GenerationError("special points must lie inside the cap")
    keep = np.ones(S.n_cells, dtype=bool)
    keep[removed_sheet * F + np.nonzero(~inside)[0]] = False
    return _restrict(S, keep)


def restricted_cover(B: SphereTriangulation, gluings: list[np.ndarray], cap: Circle) -> CoveringSurface:
    """All sheets of a closed cover over the inside of the cap."""
    S = closed_cover(B, gluings)
    inside = cap_faces(B, cap, list(range(len(B.constraint_edges))))
    return _restrict(S, inside[S.label])


def pruned_cover(B: SphereTriangulation, gluings: list[np.ndarray], cap: Circle, sheet: int = 0) -> CoveringSurface:
    """Closed cover minus the piece over the outside of the cap that contains the given sheet.

    The piece may be branched over special points outside the cap, so the
    boundary can run several times around the circle.
    """
    S = closed_cover(B, gluings)
    F = B.n_faces
    inside = cap_faces(B, cap, list(range(len(B.constraint_edges))))
    out_cells = ~inside[S.label]
    h = np.nonzero(np.repeat(out_cells, 3))[0]
    t = S.twin[h]
    h, t = h[out_cells[t // 3]], t[out_cells[t // 3]]
    g = coo_matrix((np.ones(len(h)), (h // 3, t // 3)), shape=(S.n_cells, S.n_cells))
    comp = connected_components(g, directed=False)[1]
    f0 = int(np.nonzero(~inside)[0][0])
    keep = comp != comp[sheet * F + f0]
    T = _restrict(S, keep)
    if T.euler_characteristic != 1 or len(T.boundary_cycles) != 1:
        raise GenerationError("removed piece does not leave a disk")
    T.meta["pruned_degree"] = int(np.count_nonzero(~keep) // max(1, np.count_nonzero(~inside)))
    return T


def on_circle_configuration(rng: np.random.Generator, outside: int = 1, inside: int = 1,
                            min_sep: float = 0.3) -> tuple[SpecialSet, Circle]:
    """Special points inside and outside a random cap, plus one on its circle at angle 0."""
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    cap = Circle.make(axis, float(rng.uniform(0.0, 0.3)))
    pts = [cap.point_at(0.0)]
    want = [(1, inside), (-1, outside)]
    for sgn, k in want:
        n = 0
        while n < k:
            v = rng.normal(size=3)
            v /= np.linalg.norm(v)
            if sgn * (v @ cap.n - cap.height) < 0.15:
                continue
            p = SpherePoint.from_vector(v)
            if all(geodesic_distance(p, o) > min_sep for o in pts):
                pts.append(p)
                n += 1
    return SpecialSet(pts), cap


def generate(data: MonodromyData, E: SpecialSet, seed: int = 0) -> CoveringSurface:
    if data.cap is None:
        B = base_for(E, None, 0, 0.0, seed)
        S = closed_cover(B, data.gluings)
    else:
        B = base_for(E, data.cap, data.m, data.phase, seed)
        S = open_cover(B, data.gluings, data.cap, data.removed_sheet)
    S.meta["seed"] = seed
    return S


# -- configurations ------------------------------------------------------------

def standard_special_set() -> SpecialSet:
    return SpecialSet([stereographic_project(0), stereographic_project(1), stereographic_project(math.inf)])


def random_configuration(rng: np.random.Generator, q: int, min_sep: float = 0.25,
                         ) -> tuple[SpecialSet, Circle]:
    """Special points scattered inside a random convex cap, away from its rim."""
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    height = float(rng.uniform(0.0, 0.35))
    cap = Circle.make(axis, height)
    pts: list[SpherePoint] = []
    while len(pts) < q:
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        if v @ cap.n < height + 0.15:
            continue
        p = SpherePoint.from_vector(v)
        if all(geodesic_distance(p, o) > min_sep for o in pts):
            pts.append(p)
    return SpecialSet(pts), cap


def unit_disk_cap() -> Circle:
    """Image of the unit circle, with the south hemisphere (|z| < 1) on the left."""
    return Circle.make((0.0, 0.0, -1.0), 0.0)
