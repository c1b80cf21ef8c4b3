"""Cut-and-sew surgery that splits a closed sphere off a disk surface.

A cut is two edge paths in the surface with the same base labels and common
end points. Cutting along both and re-gluing each side of one path to the
opposite side of the other closes the region between them into a sphere and
heals the rest into a disk with the same boundary.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .lifting import (
    BranchClassification,
    InverseBranch,
    LiftingError,
    branch_boundary,
    branch_runs,
    branch_sides,
    cell_halfedge,
    classify_branches,
    classify_selections,
    enumerate_selections,
    pigeonhole_pair,
)
from .sphgeo import SpecialSet
from .surface import (CoveringSurface, PreconditionError, corner_classes, degrees, restrict_classes,
                      special_interior_count)
from .triangulate import ShellingOrder, c1_bound, face_bound, shelling_order


class SurgeryError(RuntimeError):
    pass


# -- constants -----------------------------------------------------------------

def d_inf_bound(m: int, q: int) -> int:
    return 3 * m * face_bound(m + q)


def d_star(m: int, q: int) -> int:
    """Degree bound below which the reduction stops."""
    return d_inf_bound(m, q) + (m * q + m - 2) + (m * q + m) + m * (m - 1) // 2


# -- low level -----------------------------------------------------------------

def reglue(twin: np.ndarray, p: np.ndarray, tp: np.ndarray, m: np.ndarray, tm: np.ndarray) -> np.ndarray:
    """Glue ``p`` to ``m`` and ``tp`` to ``tm`` (cross gluing of the two cut paths)."""
    tw = twin.copy()
    tw[p] = m
    tw[m] = p
    tw[tp] = tm
    tw[tm] = tp
    return tw


def split_components(twin: np.ndarray) -> np.ndarray:
    C = len(twin) // 3
    ok = twin >= 0
    col = (twin[ok] // 3).astype(np.int32)
    indptr = np.zeros(C + 1, dtype=np.int64)
    np.cumsum(ok.reshape(-1, 3).sum(axis=1), out=indptr[1:])
    g = csr_matrix((np.ones(len(col), dtype=np.int8), col, indptr), shape=(C, C))
    return connected_components(g, directed=False)[1]


def _extract(S: CoveringSurface, twin: np.ndarray, keep: np.ndarray, topology: str,
             classes=None) -> CoveringSurface:
    new_id = -np.ones(S.n_cells, dtype=np.int64)
    new_id[keep] = np.arange(int(keep.sum()))
    tw = twin.reshape(-1, 3)[keep].reshape(-1)
    tw = np.where(tw >= 0, 3 * new_id[np.maximum(tw, 0) // 3] + tw % 3, -1)
    if np.any((twin.reshape(-1, 3)[keep] >= 0) & (tw.reshape(-1, 3) < 0)):
        raise SurgeryError("a kept cell is glued to a dropped one")
    marks, assign = (), ()
    if topology == "disk":
        marks = tuple(3 * int(new_id[h // 3]) + h % 3 for h in S.marks)
        assign = S.arc_assignment
    slots = None if S.slots is None else S.slots[keep]
    T = CoveringSurface(S.base, topology, S.label[keep], tw, slots, marks, assign, dict(S.meta))
    if classes is not None:
        T.__dict__["_vertex_classes"] = restrict_classes(classes, np.repeat(keep, 3))
    return T


# -- cuts ----------------------------------------------------------------------

@dataclass
class SewCut:
    """Two lifted paths; ``*_left``/``*_right`` are the half-edges on either side of each edge."""
    plus_left: np.ndarray
    plus_right: np.ndarray
    minus_left: np.ndarray
    minus_right: np.ndarray
    x0: int
    x1: int
    boundary_contact: frozenset = frozenset()
    enclosed_region: np.ndarray | None = None
    kind: str = "branch"

    def __len__(self):
        return len(self.plus_left)


def _path_vertices(S: CoveringSurface, left: np.ndarray) -> np.ndarray:
    """Vertices along a path given by the half-edges on its left side."""
    voc = S.vertex_of_corner
    nxt = left - left % 3 + (left % 3 + 1) % 3
    return np.concatenate([voc[left], voc[nxt[-1:]]])


def build_cut_from_branch(S: CoveringSurface, b: InverseBranch, cls: BranchClassification | None = None,
                          index: int | None = None) -> SewCut:
    if cls is not None and index is not None and index in set(cls.g_2pp):
        raise SurgeryError("sheet touches two boundary points with one image; use the alternative cut")
    if b.jordan_core is None:
        branch_boundary(S, b)
    s, e = b.jordan_core
    p = b.tau_plus[s:e]
    m = b.tau_minus[s:e]
    # plus side: the sheet is on the left of the path; minus side: on the right
    cut = SewCut(plus_left=p, plus_right=S.twin[p], minus_left=S.twin[m], minus_right=m,
                 x0=int(b.plus_vertices[s]), x1=int(b.plus_vertices[e]))
    pv = _path_vertices(S, cut.plus_left)
    mv = _path_vertices(S, cut.minus_left) if np.all(cut.minus_left >= 0) else pv
    onb = S.boundary_vertices
    cut.boundary_contact = frozenset(int(v) for v in np.concatenate([pv, mv]) if onb[v])
    return cut


def _check_cut(S: CoveringSurface, cut: SewCut) -> None:
    arrays = (cut.plus_left, cut.plus_right, cut.minus_left, cut.minus_right)
    if any(np.any(a < 0) for a in arrays):
        raise SurgeryError("cut runs along the boundary; the result would not be one disk")
    bh = S.base_halfedge
    if not np.array_equal(bh[cut.plus_left], bh[cut.minus_left]):
        raise SurgeryError("the two cut paths have different labels")
    if len(np.unique(np.concatenate(arrays))) != 4 * len(cut):
        raise SurgeryError("the two cut paths share an edge")
    pv = _path_vertices(S, cut.plus_left)
    mv = _path_vertices(S, cut.minus_left)
    if pv[0] != mv[0] or pv[-1] != mv[-1]:
        raise SurgeryError("cut paths do not share their end points")
    inner = set(pv[1:-1].tolist()) | set(mv[1:-1].tolist())
    if len(inner) != 2 * (len(pv) - 2) or pv[0] in inner or pv[-1] in inner or pv[0] == pv[-1]:
        raise SurgeryError("the cut is not a simple closed curve")
    onb = S.boundary_vertices
    both = onb[pv[1:-1]] & onb[mv[1:-1]]
    if np.any(both):
        raise SurgeryError("both cut paths meet the boundary at the same parameter")


# -- the surgery ---------------------------------------------------------------

@dataclass
class SurgeryLedger:
    d: int
    A: float
    A0: float
    A1: float
    nbar: int
    nbar0: int
    nbar1: int
    cases: dict = field(default_factory=dict)

    def balanced(self) -> bool:
        return self.nbar == self.nbar0 + self.nbar1 - 2


@dataclass
class SurgeryResult:
    sigma0: CoveringSurface
    sigma1: CoveringSurface
    ledger: SurgeryLedger
    cut: SewCut


def _case_counts(S: CoveringSurface, cut: SewCut, inside_cells: np.ndarray) -> dict:
    """Special-point preimages of ``S`` sorted by where they sit relative to the cut."""
    special = S.base.special_mask[S.vertex_image]
    onb = S.boundary_vertices
    pv = _path_vertices(S, cut.plus_left)
    mv = _path_vertices(S, cut.minus_left)
    ends = {int(pv[0]), int(pv[-1])}
    on_cut = set(pv.tolist()) | set(mv.tolist())
    inside_v = np.zeros(S.n_vertices, dtype=bool)
    inside_v[S.vertex_of_corner.reshape(-1, 3)[inside_cells].reshape(-1)] = True
    cases = {"end_interior": 0, "end_boundary": 0, "path_pairs": 0, "inside": 0, "outside": 0}
    for v in ends:
        if special[v]:
            cases["end_boundary" if onb[v] else "end_interior"] += 1
    for a, b in zip(pv[1:-1].tolist(), mv[1:-1].tolist()):
        if special[a]:
            cases["path_pairs"] += int(not onb[a]) + int(not onb[b])
    sv = np.nonzero(special & ~onb)[0]
    for v in sv.tolist():
        if v in on_cut:
            continue
        cases["inside" if inside_v[v] else "outside"] += 1
    return cases


def sew_split(S: CoveringSurface, cut: SewCut, E: SpecialSet | None = None, check: bool = True) -> SurgeryResult:
    """Cut along both paths, re-glue crosswise, and separate the closed piece from the disk."""
    _check_cut(S, cut)
    tw = reglue(S.twin, cut.plus_left, cut.plus_right, cut.minus_right, cut.minus_left)
    comp = split_components(tw)
    labels = np.unique(comp)
    if len(labels) != 2:
        raise SurgeryError(f"surgery produced {len(labels)} pieces instead of two")
    has_bnd = np.zeros(len(labels), dtype=bool)
    bcells = np.nonzero(tw < 0)[0] // 3
    has_bnd[np.unique(comp[bcells])] = True
    if has_bnd.sum() != 1:
        raise SurgeryError("surgery did not produce exactly one closed piece")
    closed = int(labels[~has_bnd][0])
    inside = comp == closed
    cut.enclosed_region = np.nonzero(inside)[0]
    classes = corner_classes(tw)
    s0 = _extract(S, tw, inside, "sphere", classes)
    s1 = _extract(S, tw, ~inside, "disk", classes)
    F = S.base.n_faces
    fc0 = s0.face_counts
    if fc0.min() != fc0.max():
        raise SurgeryError("closed piece is not a cover of the sphere")
    d = int(fc0[0])
    areas = S.base.face_areas
    A = float(areas[S.label].sum())
    A0 = float(areas[s0.label].sum())
    ledger = SurgeryLedger(
        d=d, A=A, A0=A0, A1=A - A0,
        nbar=special_interior_count(S), nbar0=special_interior_count(s0), nbar1=special_interior_count(s1),
        cases=_case_counts(S, cut, inside),
    )
    if check:
        if s0.euler_characteristic != 2:
            raise SurgeryError("closed piece is not a sphere")
        if s1.euler_characteristic != 1:
            raise SurgeryError("remaining piece is not a disk")
        if s1.boundary_word() != S.boundary_word():
            raise SurgeryError("surgery changed the boundary")
        if not ledger.balanced():
            raise SurgeryError(f"special point count does not balance: {ledger}")
    return SurgeryResult(s0, s1, ledger, cut)


# -- the cut through a doubly touched special point ------------------------------

def _base_loop(S: CoveringSurface, a: int) -> list[int]:
    """Closed base edge path at ``a`` leaving on the left of the cut path and returning on the right."""
    B = S.base
    beta_vertices = set()
    for e in B.beta_edges:
        u, v, _ = B.edges[e]
        beta_vertices.update((u, v))
    if a not in beta_vertices:
        raise SurgeryError("loop base point is not on the cut path")
    plus, minus = B.beta_halfedges
    left_faces = {int(h) // 3 for h in plus}
    right_faces = {int(h) // 3 for h in minus}
    adj: dict[int, set[int]] = {}
    for u, v, _ in B.edges:
        adj.setdefault(u, set()).add(v)
        adj.setdefault(v, set()).add(u)

    def side_neighbours(faces):
        out = set()
        for f in faces:
            if a in B.faces[f]:
                out.update(int(x) for x in B.faces[f] if x not in beta_vertices)
        return sorted(out)

    starts = side_neighbours(left_faces)
    goals = set(side_neighbours(right_faces))
    if not starts or not goals:
        raise SurgeryError("no free neighbour on one side of the special point")
    prev = {s: None for s in starts}
    queue = deque(starts)
    while queue:
        x = queue.popleft()
        if x in goals:
            path = [x]
            while prev[path[-1]] is not None:
                path.append(prev[path[-1]])
            path.reverse()
            return [a] + path + [a]
        for y in sorted(adj[x]):
            if y not in beta_vertices and y not in prev:
                prev[y] = x
                queue.append(y)
    raise SurgeryError("no loop around the special point avoids the cut path")


def _lift_loop(S: CoveringSurface, sel: np.ndarray, loop: list[int]) -> np.ndarray:
    """Half-edges on the left of the sheet's lift of a base vertex loop."""
    B = S.base
    tail = B.faces.reshape(-1)
    head = B.faces[:, [1, 2, 0]].reshape(-1)
    lookup = {(int(t), int(h)): i for i, (t, h) in enumerate(zip(tail, head))}
    out = []
    for u, v in zip(loop, loop[1:]):
        hb = lookup[(u, v)]
        out.append(int(cell_halfedge(S, np.array([sel[hb // 3]]), hb)[0]))
    return np.array(out, dtype=np.int64)


def alternative_cut(S: CoveringSurface, cls: BranchClassification, selections: np.ndarray) -> SewCut:
    m = S.m
    if len(cls.g_2pp) <= m * (m - 1) // 2:
        raise PreconditionError("not enough doubly touching sheets for the pigeonhole step")
    if pigeonhole_pair(cls) is None:
        raise SurgeryError("pigeonhole failed; classification is inconsistent")
    # among sheets sharing a contact pair, find two whose loop lifts run the same way
    seen: dict[tuple, int] = {}
    loops: dict[int, list[int]] = {}
    for i in cls.g_2pp:
        a = int(S.vertex_image[next(iter(cls.boundary_hits[i]))])
        if a not in loops:
            loops[a] = _base_loop(S, a)
        v = _path_vertices(S, _lift_loop(S, selections[i], loops[a]))
        key = (int(v[0]), int(v[-1]))
        if key in seen:
            return cut_between_sheets(S, cls, selections, (seen[key], i))
        seen[key] = i
    raise SurgeryError("sheets sharing a contact pair reach it in opposite orders")


def cut_between_sheets(S: CoveringSurface, cls: BranchClassification, selections: np.ndarray,
                       pair: tuple[int, int]) -> SewCut:
    i, j = pair
    hits = cls.boundary_hits[i]
    a = int(S.vertex_image[next(iter(hits))])
    loop = _base_loop(S, a)
    p = _lift_loop(S, selections[i], loop)
    m_ = _lift_loop(S, selections[j], loop)
    pv = _path_vertices(S, p)
    mv = _path_vertices(S, m_)
    if {int(pv[0]), int(pv[-1])} != set(hits) or pv[0] != mv[0] or pv[-1] != mv[-1]:
        raise SurgeryError("the two lifts of the loop do not join the shared boundary points")
    cut = SewCut(plus_left=p, plus_right=S.twin[p], minus_left=m_, minus_right=S.twin[m_],
                 x0=int(pv[0]), x1=int(pv[-1]), boundary_contact=frozenset(hits), kind="pigeonhole")
    return cut


# -- the driver ----------------------------------------------------------------

@dataclass
class ReductionStep:
    deg_min_before: int
    deg_min_after: int
    kind: str
    ledger: SurgeryLedger
    counts: dict


def _smallest_first(sel: np.ndarray, rows: list[int]) -> list[int]:
    if not rows:
        return []
    keys = np.sort(sel[rows], axis=1)
    order = np.lexsort(keys.T[::-1])
    return [rows[i] for i in order]


def _runs_of(S: CoveringSurface, sel: np.ndarray, i: int, sides) -> list[SewCut]:
    p, mm, glued, pv, mv = (x[i] for x in sides)
    b = InverseBranch(sel[i], p, mm, glued, pv, mv)
    out = []
    for run in branch_runs(b):
        b.jordan_core = run
        out.append(build_cut_from_branch(S, b))
    return out


def surgery_step(S: CoveringSurface, E: SpecialSet, shelling: ShellingOrder,
                 check: bool = True) -> tuple[SurgeryResult | None, dict]:
    sel = enumerate_selections(S, shelling)
    if len(sel) == 0:
        return None, {"g_inf": 0}
    cls = classify_selections(S, sel)
    counts = cls.counts()
    sides = branch_sides(S, sel)
    pp = set(cls.g_2pp)
    for i in _smallest_first(sel, [i for i in cls.g_2p if i not in pp]):
        for cut in _runs_of(S, sel, i, sides):
            try:
                return sew_split(S, cut, E, check=check), counts
            except SurgeryError:
                continue
    m = S.m
    if len(cls.g_2pp) > m * (m - 1) // 2:
        try:
            cut = alternative_cut(S, cls, sel)
            return sew_split(S, cut, E, check=check), counts
        except SurgeryError as exc:
            counts["stopped"] = str(exc)
    return None, counts


def reduce(S: CoveringSurface, E: SpecialSet, shelling: ShellingOrder | None = None,
           target: int | None = None, check: bool = True, trace: list | None = None,
           stop_reason: list | None = None) -> CoveringSurface:
    """Split off spheres until the minimal degree is at most ``target`` (``d*`` by default)."""
    if shelling is None:
        shelling = shelling_order(S.base)
    if target is None:
        target = d_star(S.m, E.q)
    lo, _ = degrees(S)
    cap = lo
    steps = 0
    while lo > target:
        res, counts = surgery_step(S, E, shelling, check=check)
        if res is None:
            if stop_reason is not None:
                stop_reason.append(counts.get("stopped", "no usable sheet"))
            break
        new_lo, _ = degrees(res.sigma1)
        if new_lo >= lo:
            raise SurgeryError("minimal degree did not decrease")
        if trace is not None:
            trace.append(ReductionStep(lo, new_lo, res.cut.kind, res.ledger, counts))
        S, lo = res.sigma1, new_lo
        steps += 1
        if steps > cap:
            raise SurgeryError("reduction did not terminate")
    return S
