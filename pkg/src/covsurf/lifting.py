"""Single-valued sheets of a covering surface over the sphere cut along the path.

A sheet (inverse branch) picks one cell over every base face so that cells over
faces adjacent across an ordinary edge are glued. Sheets are found by walking
the shelling order once for all starting cells at the same time.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .surface import CoveringSurface, PreconditionError, is_Fr
from .triangulate import ShellingOrder


class LiftingError(RuntimeError):
    pass


def cell_halfedge(S: CoveringSurface, cells: np.ndarray, base_he) -> np.ndarray:
    """Half-edge of ``cells`` lying over base half-edge(s) ``base_he``."""
    slot = np.asarray(base_he) % 3
    if S.slots is None:
        return 3 * cells + slot
    inv = np.empty_like(S.slots)
    np.put_along_axis(inv, S.slots, np.arange(3)[None, :], axis=1)
    return 3 * cells + inv[cells, slot]


def _next(h: np.ndarray) -> np.ndarray:
    return h - h % 3 + (h % 3 + 1) % 3


@dataclass
class InverseBranch:
    selection: np.ndarray
    tau_plus: np.ndarray
    tau_minus: np.ndarray
    glued: np.ndarray
    plus_vertices: np.ndarray
    minus_vertices: np.ndarray
    segment_split: list[tuple[int, int]] = field(default_factory=list)
    jordan_core: tuple[int, int] | None = None

    @property
    def cells(self) -> np.ndarray:
        return self.selection

    def key(self) -> tuple[int, ...]:
        return tuple(sorted(self.selection.tolist()))


def enumerate_selections(S: CoveringSurface, shelling: ShellingOrder) -> np.ndarray:
    """``(n, F)`` array: row ``i`` is the cell chosen over each base face by sheet ``i``."""
    B = S.base
    if not B.beta_segment_edges:
        raise PreconditionError("base triangulation has no cut path")
    order = shelling.face_sequence
    F = B.n_faces
    first = order[0]
    start = np.nonzero(S.label == first)[0]
    sel = np.full((len(start), F), -1, dtype=np.int64)
    sel[:, first] = start
    alive = np.ones(len(start), dtype=bool)
    tw = S.twin
    for f, gamma in zip(order[1:], shelling.crossing_edges):
        h, t = gamma[0]
        ch = cell_halfedge(S, sel[:, t // 3], t)
        nb = tw[ch]
        alive &= nb >= 0
        new = np.where(nb >= 0, nb // 3, 0)
        ok = S.label[new] == f
        ok &= cell_halfedge(S, new, h) == nb
        for h2, t2 in gamma[1:]:
            ch2 = cell_halfedge(S, sel[:, t2 // 3], t2)
            ok &= tw[ch2] == cell_halfedge(S, new, h2)
        alive &= ok
        sel[:, f] = np.where(alive, new, -1)
    return sel[alive]


def branch_sides(S: CoveringSurface, sel: np.ndarray):
    """Half-edges of each sheet over the left and right of the cut, and the vertices they meet."""
    B = S.base
    plus, minus = B.beta_halfedges
    p = cell_halfedge(S, sel[:, plus // 3], plus[None, :])
    m = cell_halfedge(S, sel[:, minus // 3], minus[None, :])
    glued = S.twin[p] == m
    voc = S.vertex_of_corner
    # vertex over cut vertex i on each side; position n is the far end of the path
    pv = np.concatenate([voc[p], voc[_next(p[:, -1:])]], axis=1)
    mv = np.concatenate([voc[_next(m)], voc[m[:, -1:]]], axis=1)
    return p, m, glued, pv, mv


def enumerate_branches(S: CoveringSurface, shelling: ShellingOrder, check_fr: bool = True) -> list[InverseBranch]:
    if check_fr and not is_Fr(S):
        raise PreconditionError("surface has branch values off the special set")
    sel = enumerate_selections(S, shelling)
    if len(sel) == 0:
        return []
    p, m, glued, pv, mv = branch_sides(S, sel)
    return [InverseBranch(sel[i], p[i], m[i], glued[i], pv[i], mv[i]) for i in range(len(sel))]


def oracle_branches(S: CoveringSurface) -> set[tuple[int, ...]]:
    """Sheets found by flood fill from every cell over ordinary edges; slow reference."""
    B = S.base
    beta = B.beta_edge_mask
    out = set()
    for c0 in range(S.n_cells):
        chosen = {int(S.label[c0]): c0}
        stack = [c0]
        good = True
        while stack and good:
            c = stack.pop()
            for k in range(3):
                h = 3 * c + k
                bh = int(S.base_halfedge[h])
                if beta[B.he_edge[bh]]:
                    continue
                t = int(S.twin[h])
                if t < 0:
                    good = False
                    break
                nc = t // 3
                f = int(S.label[nc])
                if f in chosen:
                    if chosen[f] != nc:
                        good = False
                        break
                    continue
                chosen[f] = nc
                stack.append(nc)
        if good and len(chosen) == B.n_faces:
            out.add(tuple(chosen[f] for f in range(B.n_faces)))
    return out


# -- boundary of a sheet ---------------------------------------------------------

def branch_runs(b: InverseBranch) -> list[tuple[int, int]]:
    """Closed pieces of the sheet's frontier: cut-edge ranges ``[s, e)`` whose two lifts differ."""
    n = len(b.glued)
    runs = []
    i = 0
    while i < n:
        if b.glued[i]:
            i += 1
            continue
        s = i
        while i < n and not b.glued[i]:
            i += 1
        # split where the two sides meet inside the range
        cuts = [s] + [k for k in range(s + 1, i) if b.plus_vertices[k] == b.minus_vertices[k]] + [i]
        runs += [(a, c) for a, c in zip(cuts, cuts[1:])]
    return runs


def branch_boundary(S: CoveringSurface, b: InverseBranch) -> InverseBranch:
    """Split the frontier at lifts of the special points and locate the enclosing Jordan curve."""
    B = S.base
    seg = B.beta_segment_of
    b.segment_split = [(int(seg[s]), int(seg[e - 1])) for s, e in branch_runs(b)]
    for s, e in branch_runs(b):
        if b.plus_vertices[s] != b.minus_vertices[s] or b.plus_vertices[e] != b.minus_vertices[e]:
            raise LiftingError("frontier piece does not close up")
        cut = cut_halfedges(S, b, (s, e))
        if _encloses_closed(S, cut):
            b.jordan_core = (s, e)
            return b
    if b.glued.all():
        raise LiftingError("sheet is glued along the whole cut; the surface is a closed sphere")
    raise LiftingError("no frontier piece encloses the sheet")


def cut_halfedges(S: CoveringSurface, b: InverseBranch, run: tuple[int, int]):
    s, e = run
    p = b.tau_plus[s:e]
    m = b.tau_minus[s:e]
    return p, S.twin[p], m, S.twin[m]


def _encloses_closed(S: CoveringSurface, cut) -> bool:
    from .surgery import reglue, split_components
    p, tp, m, tm = cut
    if np.any(tp < 0) or np.any(tm < 0):
        return False
    tw = reglue(S.twin, p, tp, m, tm)
    comp = split_components(tw)
    inside = comp == comp[p[0] // 3]
    return not np.any(tw.reshape(-1, 3)[inside] < 0)


# -- classification ------------------------------------------------------------

@dataclass
class BranchClassification:
    g_inf: list[int]
    g_2: list[int]
    g_2p: list[int]
    g_2pp: list[int]
    boundary_hits: list[frozenset]
    images: list[tuple[int, ...]]

    def counts(self) -> dict:
        return {"g_inf": len(self.g_inf), "g_2": len(self.g_2), "g_2p": len(self.g_2p), "g_2pp": len(self.g_2pp)}


def boundary_hits(S: CoveringSurface, sel: np.ndarray) -> list[frozenset]:
    """Boundary vertices in the closure of each sheet."""
    corners = (3 * sel[:, :, None] + np.arange(3)[None, None, :]).reshape(len(sel), -1)
    verts = S.vertex_of_corner[corners]
    onb = S.boundary_vertices[verts]
    out = [frozenset()] * len(sel)
    for i in np.nonzero(onb.any(axis=1))[0].tolist():
        out[i] = frozenset(verts[i][onb[i]].tolist())
    return out


def mark_vertices(S: CoveringSurface) -> set[int]:
    return set(S.vertex_of_corner[list(S.marks)].tolist()) if S.marks else set()


def classify_branches(S: CoveringSurface, branches: list[InverseBranch], strict: bool = True) -> BranchClassification:
    if not branches:
        return BranchClassification([], [], [], [], [], [])
    return classify_selections(S, np.stack([b.selection for b in branches]), strict)


def classify_selections(S: CoveringSurface, sel: np.ndarray, strict: bool = True) -> BranchClassification:
    if len(sel) == 0:
        return BranchClassification([], [], [], [], [], [])
    hits = boundary_hits(S, sel)
    special = S.base.special_mask[S.vertex_image]
    marks = mark_vertices(S)
    allowed = {v for v in np.nonzero(special & S.boundary_vertices)[0].tolist()} | marks
    both = {v for v in marks if special[v]}
    g_inf = list(range(len(sel)))
    g2, g2p, g2pp, images = [], [], [], []
    for i, H in enumerate(hits):
        if strict and not H <= allowed:
            raise LiftingError(f"sheet {i} touches the boundary away from special points and marks")
        im = tuple(sorted(int(S.vertex_image[v]) for v in H))
        images.append(im)
        if len(H) <= 2:
            g2.append(i)
            if H <= both:
                g2p.append(i)
                if len(H) == 2 and im[0] == im[1]:
                    g2pp.append(i)
    return BranchClassification(g_inf, g2, g2p, g2pp, hits, images)


def disjointness_check(branches: list[InverseBranch]) -> bool:
    if len(branches) < 2:
        return True
    cells = np.concatenate([b.selection for b in branches])
    return len(np.unique(cells)) == len(cells)


def pigeonhole_pair(cls: BranchClassification) -> tuple[int, int] | None:
    """Two sheets of the doubly touching class that meet the boundary at the same two points."""
    seen: dict[frozenset, int] = {}
    for i in cls.g_2pp:
        H = cls.boundary_hits[i]
        if H in seen:
            return seen[H], i
        seen[H] = i
    return None


def d_inf_measured(S: CoveringSurface) -> int:
    return int(np.count_nonzero(S.twin < 0))


def pair_count(m: int) -> int:
    return len(list(combinations(range(m), 2)))
