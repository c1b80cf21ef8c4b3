"""Combinatorial covering surfaces over a triangulated sphere, and their measures.

A surface is a set of triangular cells, each labelled by a face of the base
triangulation. Cell ``c`` has half-edges ``3c+k`` (from corner ``k`` to corner
``k+1``); ``twin`` glues half-edges of adjacent cells, ``-1`` marks boundary.
Vertices are not stored: they are the classes of cell corners under gluing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import connected_components

from .sphgeo import SpecialSet
from .triangulate import SphereTriangulation

IDENTITY_SLOTS = np.array([0, 1, 2])
_ROTATIONS = {(0, 1, 2), (1, 2, 0), (2, 0, 1)}


class PreconditionError(ValueError):
    pass


def corner_classes(twin: np.ndarray) -> tuple[int, np.ndarray]:
    """Number of vertices and the vertex of every corner, for a twin array."""
    n = len(twin)
    ok = twin >= 0
    t = np.where(ok, twin, 0)
    # corner h is the corner after the twin's head; one entry per half-edge covers both
    col = (t - t % 3 + (t % 3 + 1) % 3)[ok].astype(np.int32)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(ok, out=indptr[1:])
    g = csr_matrix((np.ones(len(col), dtype=np.int8), col, indptr), shape=(n, n))
    return connected_components(g, directed=False)


def restrict_classes(classes: tuple[int, np.ndarray], keep_corners: np.ndarray) -> tuple[int, np.ndarray]:
    """Corner classes of a union of components, renumbered densely."""
    n, lab = classes
    sub = lab[keep_corners]
    used = np.zeros(n, dtype=bool)
    used[sub] = True
    new = np.cumsum(used) - 1
    return int(used.sum()), new[sub]


@dataclass(eq=False)
class CoveringSurface:
    base: SphereTriangulation
    topology: str
    label: np.ndarray
    twin: np.ndarray
    slots: np.ndarray | None = None
    marks: tuple[int, ...] = ()
    arc_assignment: tuple[int, ...] = ()
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.label = np.asarray(self.label, dtype=np.int64)
        self.twin = np.asarray(self.twin, dtype=np.int64)
        if self.slots is not None:
            self.slots = np.asarray(self.slots, dtype=np.int64).reshape(-1, 3)
        self.marks = tuple(int(h) for h in self.marks)
        self.arc_assignment = tuple(int(a) for a in self.arc_assignment)

    @property
    def n_cells(self) -> int:
        return len(self.label)

    @property
    def m(self) -> int:
        return len(self.marks)

    def slot_array(self) -> np.ndarray:
        if self.slots is None:
            return np.broadcast_to(IDENTITY_SLOTS, (self.n_cells, 3))
        return self.slots

    @cached_property
    def base_halfedge(self) -> np.ndarray:
        """Base half-edge under each cell half-edge."""
        return (3 * self.label[:, None] + self.slot_array()).reshape(-1)

    @cached_property
    def corner_image(self) -> np.ndarray:
        """Base vertex under each cell corner (corner ``3c+k`` starts half-edge ``3c+k``)."""
        return self.base.faces.reshape(-1)[self.base_halfedge]

    @cached_property
    def _vertex_classes(self) -> tuple[int, np.ndarray]:
        return corner_classes(self.twin)

    @property
    def n_vertices(self) -> int:
        return int(self._vertex_classes[0])

    @property
    def vertex_of_corner(self) -> np.ndarray:
        return self._vertex_classes[1]

    @cached_property
    def vertex_image(self) -> np.ndarray:
        out = np.empty(self.n_vertices, dtype=np.int64)
        out[self.vertex_of_corner] = self.corner_image
        return out

    @cached_property
    def n_edges(self) -> int:
        nb = int(np.count_nonzero(self.twin < 0))
        return (3 * self.n_cells - nb) // 2 + nb

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_cells

    @cached_property
    def boundary_cycles(self) -> list[list[int]]:
        """Boundary half-edges grouped into cycles, each in traversal order (surface on the left)."""
        bnd = np.nonzero(self.twin < 0)[0]
        todo = set(int(h) for h in bnd)
        tw = self.twin
        cycles = []
        for h0 in sorted(todo):
            if h0 not in todo:
                continue
            cyc = []
            h = h0
            while True:
                todo.discard(h)
                cyc.append(h)
                g = h - h % 3 + (h % 3 + 1) % 3
                steps = 0
                while tw[g] >= 0:
                    t = int(tw[g])
                    g = t - t % 3 + (t % 3 + 1) % 3
                    steps += 1
                    if steps > 3 * self.n_cells:
                        raise PreconditionError("boundary walk does not close")
                h = int(g)
                if h == h0:
                    break
                if h not in todo:
                    raise PreconditionError("boundary is pinched")
            cycles.append(cyc)
        return cycles

    @cached_property
    def boundary_cycle(self) -> list[int]:
        """The boundary cycle, rotated to start at the first mark when marks exist."""
        cycles = self.boundary_cycles
        if not cycles:
            return []
        cyc = cycles[0]
        if self.marks and self.marks[0] in cyc:
            i = cyc.index(self.marks[0])
            cyc = cyc[i:] + cyc[:i]
        return cyc

    def boundary_word(self) -> tuple[tuple[int, int], ...]:
        """Base edge and direction under each boundary half-edge, from the first mark."""
        bh = self.base_halfedge[self.boundary_cycle]
        return tuple(zip(self.base.he_edge[bh].tolist(), self.base.he_sign[bh].tolist()))

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        bnd = np.nonzero(self.twin < 0)[0]
        mask[self.vertex_of_corner[bnd]] = True
        return mask

    @cached_property
    def face_counts(self) -> np.ndarray:
        return np.bincount(self.label, minlength=self.base.n_faces)

    def arcs(self) -> list[list[int]]:
        """Boundary half-edges of each marked arc, in order."""
        cyc = self.boundary_cycle
        pos = {h: i for i, h in enumerate(cyc)}
        idx = [pos[h] for h in self.marks]
        out = []
        for j, i in enumerate(idx):
            k = idx[(j + 1) % len(idx)] if len(idx) > 1 else i + len(cyc)
            if k <= i:
                k += len(cyc)
            out.append([cyc[t % len(cyc)] for t in range(i, k)])
        return out

    def copy(self, **changes) -> "CoveringSurface":
        fields = dict(label=self.label.copy(), twin=self.twin.copy(),
                      slots=None if self.slots is None else self.slots.copy(), meta=dict(self.meta))
        fields.update(changes)
        return replace(self, **fields)


# -- orders and branch points --------------------------------------------------

def _vertex_angle_and_count(S: CoveringSurface) -> tuple[np.ndarray, np.ndarray]:
    ang = S.base.corner_angles.reshape(-1)[S.base_halfedge]
    total = np.bincount(S.vertex_of_corner, weights=ang, minlength=S.n_vertices)
    count = np.bincount(S.vertex_of_corner, minlength=S.n_vertices)
    return total, count


def vertex_orders(S: CoveringSurface) -> np.ndarray:
    """Order of every vertex: the local degree inside, and its rounded-up half on the boundary."""
    total, count = _vertex_angle_and_count(S)
    link = S.base.vertex_degree[S.vertex_image]
    interior = ~S.boundary_vertices
    out = np.empty(S.n_vertices, dtype=np.int64)
    out[interior] = count[interior] // link[interior]
    omega = total[~interior] / math.pi
    out[~interior] = np.maximum(1, np.ceil(omega / 2 - 1e-9)).astype(np.int64)
    return out


def vertex_order(S: CoveringSurface, v: int) -> int:
    return int(vertex_orders(S)[v])


def boundary_omega(S: CoveringSurface) -> np.ndarray:
    """Total angle at each vertex in units of pi (the half-turn count on the boundary)."""
    total, _ = _vertex_angle_and_count(S)
    return total / math.pi


@dataclass(frozen=True)
class BranchPoint:
    vertex: int
    location: str
    order: int
    image: int


@dataclass(frozen=True)
class BranchReport:
    points: tuple[BranchPoint, ...]

    def images(self) -> set[int]:
        return {p.image for p in self.points}


def branch_report(S: CoveringSurface) -> BranchReport:
    orders = vertex_orders(S)
    pts = []
    for v in np.nonzero(orders >= 2)[0]:
        loc = "boundary" if S.boundary_vertices[v] else "interior"
        pts.append(BranchPoint(int(v), loc, int(orders[v]), int(S.vertex_image[v])))
    return BranchReport(tuple(pts))


def riemann_hurwitz_sum(S: CoveringSurface) -> int:
    return int(np.sum(vertex_orders(S) - 1))


# -- validation ----------------------------------------------------------------

def validate(S: CoveringSurface) -> list[str]:
    """All violated invariants of ``S``; empty when the surface is well formed."""
    out: list[str] = []
    C = S.n_cells
    B = S.base
    if S.topology not in ("disk", "sphere"):
        return [f"unknown topology {S.topology!r}"]
    if C == 0:
        return ["surface has no cells"]
    if S.twin.shape != (3 * C,):
        return ["twin array has the wrong length"]
    if np.any((S.label < 0) | (S.label >= B.n_faces)):
        return ["cell label outside the base faces"]
    if S.slots is not None:
        bad = [c for c in range(C) if tuple(S.slots[c]) not in _ROTATIONS]
        for c in bad[:10]:
            out.append(f"orientation violation at cell {c}")
        if bad:
            return out
    tw = S.twin
    inner = np.nonzero(tw >= 0)[0]
    if np.any(tw[inner] >= 3 * C) or np.any(tw[tw[inner]] != inner) or np.any(tw[inner] == inner):
        return ["twin gluing is not an involution"]
    bh = S.base_halfedge
    mism = inner[B.he_twin[bh[inner]] != bh[tw[inner]]]
    for h in mism[:10]:
        out.append(f"gluing mismatch at cell {h // 3} side {h % 3}")
    if len(mism):
        return out
    ncomp, _ = connected_components(
        coo_matrix((np.ones(len(inner)), (inner // 3, tw[inner] // 3)), shape=(C, C)), directed=False)
    if ncomp != 1:
        out.append(f"surface has {ncomp} connected components")
    try:
        cycles = S.boundary_cycles
    except PreconditionError as exc:
        return out + [str(exc)]
    chi = S.euler_characteristic
    if S.topology == "sphere":
        if chi != 2:
            out.append(f"closed surface has Euler characteristic {chi}")
        if cycles:
            out.append("closed surface has boundary")
        return out
    if chi != 1:
        out.append(f"disk has Euler characteristic {chi}")
    if len(cycles) != 1:
        out.append(f"disk has {len(cycles)} boundary cycles")
        return out
    out += _check_boundary(S)
    return out


def _check_boundary(S: CoveringSurface) -> list[str]:
    out = []
    B = S.base
    cyc = S.boundary_cycle
    if not S.marks:
        return ["disk has no marked boundary points"]
    if len(S.arc_assignment) != len(S.marks):
        return ["arc assignment does not match the marks"]
    if any(h not in set(cyc) for h in S.marks):
        return ["a mark is not on the boundary"]
    bverts = S.vertex_of_corner[cyc]
    if len(set(bverts.tolist())) != len(cyc):
        out.append("boundary passes a vertex twice")
    for j, (hs, ci) in enumerate(zip(S.arcs(), S.arc_assignment)):
        if not 0 <= ci < len(B.constraint_edges):
            out.append(f"arc {j} assigned to unknown base arc {ci}")
            continue
        bh = S.base_halfedge[hs]
        word = list(zip(B.he_edge[bh].tolist(), B.he_sign[bh].tolist()))
        if word != [(e, 1) for e in B.constraint_edges[ci]]:
            out.append(f"arc {j} does not run once along its base arc")
        if not B.constraint_arcs[ci].is_convex:
            out.append(f"arc {j} is not convex towards the surface")
    # collar: a boundary point inside an arc sees exactly a half-turn of cells
    om = boundary_omega(S)
    mark_vertices = set(S.vertex_of_corner[list(S.marks)].tolist())
    for v in bverts.tolist():
        if v not in mark_vertices and abs(om[v] - 1.0) > 1e-9:
            out.append(f"boundary vertex {v} is not a simple collar point")
    return out


# -- degrees and measures ------------------------------------------------------

def degrees(S: CoveringSurface) -> tuple[int, int]:
    fc = S.face_counts
    return int(fc.min()), int(fc.max())


@dataclass(frozen=True)
class Measures:
    A: float
    L: float
    nbar: int
    R: float
    H: float | None
    q: int

    @property
    def R_integer_part(self) -> int:
        return -4 * self.nbar


def special_interior_count(S: CoveringSurface) -> int:
    special = S.base.special_mask[S.vertex_image]
    return int(np.count_nonzero(special & ~S.boundary_vertices))


def measures(S: CoveringSurface, E: SpecialSet, need_H: bool = False) -> Measures:
    A = float(np.sum(S.base.face_areas[S.label]))
    bnd = np.nonzero(S.twin < 0)[0]
    L = float(np.sum(S.base.edge_lengths[S.base.he_edge[S.base_halfedge[bnd]]]))
    nbar = special_interior_count(S)
    q = E.q
    R = (q - 2) * A - 4 * math.pi * nbar
    if S.topology == "sphere" or L == 0:
        if need_H:
            raise PreconditionError("H is undefined for a closed surface")
        H = None
    else:
        H = R / L
    return Measures(A, L, nbar, R, H, q)


def is_Fr(S: CoveringSurface) -> bool:
    rep = branch_report(S)
    return all(S.base.special_mask[p.image] for p in rep.points)


def degree_spread_check(S: CoveringSurface) -> bool:
    lo, hi = degrees(S)
    return hi - lo <= S.m


def area_bound_check(S: CoveringSurface, E: SpecialSet) -> bool:
    if S.topology != "disk":
        raise PreconditionError("the inequality is stated for disks")
    M = measures(S, E)
    q = E.q
    return (q - 2) * M.A <= 4 * math.pi * M.nbar + (q - 2) * (6 * math.pi / E.delta) * M.L + 1e-9


# -- the h0 constant -----------------------------------------------------------

def h0_objective(theta):
    theta = np.asarray(theta, dtype=float)
    s = np.sqrt(1 + np.sin(theta) ** 2)
    return (np.pi + theta) * s / np.arctan2(s, np.cos(theta)) - np.sin(theta)


def h0_constant(tol: float = 1e-10) -> tuple[float, float]:
    """Maximiser and maximum of the h0 function on ``[0, pi/2]``."""
    grid = np.linspace(0, np.pi / 2, 2001)
    vals = h0_objective(grid)
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    if i == 0 or i == len(grid) - 1:
        t = float(grid[i])
        return t, float(h0_objective(t))
    res = minimize_scalar(lambda t: -float(h0_objective(t)), bracket=(lo, grid[i], hi),
                          method="golden", tol=tol)
    return float(res.x), float(-res.fun)
