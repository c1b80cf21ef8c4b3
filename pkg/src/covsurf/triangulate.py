"""Cut path through the special points, constrained sphere triangulations, shellings.

The triangulation is built the way one would by hand: compute the arrangement
of the constraint arcs and the cut path, join its connected pieces by short
great-circle connectors, then triangulate every face of the arrangement by ear
clipping, adding an interior vertex whenever a face has no ear.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .sphgeo import (
    COINCIDE_TOL,
    TWO_PI,
    CircularArc,
    GeometryError,
    OverlapError,
    SpecialSet,
    SpherePoint,
    _gauss_bonnet,
    arc_pair_intersections,
    cross3,
    crossing_angle,
    great_arc,
    region_area,
)

NEAR_TANGENT = 1e-6
LONGITUDE_SEPARATION = 1e-6
BETA_TRIES = 64
MAX_PIECE = 0.6
MAX_REFINE = 40


class TriangulationError(GeometryError):
    pass


class BetaConstructionError(GeometryError):
    pass


class NearTangentError(TriangulationError):
    """Two constraint arcs cross at an angle too small to resolve reliably."""


class ShellingError(RuntimeError):
    pass


# -- explicit constants standing in for the existence constants of the construction

def c1_bound(k: int) -> int:
    return k * (2 * k + 1)


def c2_bound(k: int) -> int:
    return 2 * c1_bound(k)


def face_bound(k: int) -> int:
    """Upper bound on the face count of a triangulation adapted to ``k`` arcs."""
    return 2 * c1_bound(k) * c2_bound(k)


# -- cut path ------------------------------------------------------------------

@dataclass(frozen=True)
class BetaPath:
    ordering: tuple[int, ...]
    segments: tuple[CircularArc, ...]
    axis_pair: tuple[SpherePoint, SpherePoint]
    points: tuple[SpherePoint, ...]

    @property
    def q(self) -> int:
        return len(self.points)


def beta_axis_candidates(axis_seed: int, count: int = BETA_TRIES) -> list[np.ndarray]:
    rng = np.random.default_rng(axis_seed)
    out = []
    for _ in range(count):
        v = rng.normal(size=3)
        out.append(v / np.linalg.norm(v))
    return out


def _longitudes(points: np.ndarray, axis: np.ndarray) -> np.ndarray:
    trial = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    u = trial - (trial @ axis) * axis
    u /= np.linalg.norm(u)
    w = cross3(axis, u)
    return np.arctan2(points @ w, points @ u) % TWO_PI


def path_is_simple(segments: Sequence[CircularArc]) -> bool:
    k = len(segments)
    for i in range(k):
        for j in range(i + 1, k):
            common = arc_pair_intersections(segments[i], segments[j])
            allowed = [segments[j].start] if j == i + 1 else []
            if any(not any(p.close_to(a) for a in allowed) for p in common):
                return False
    return True


def construct_beta(E: SpecialSet, axis_seed: int = 0, axis=None) -> BetaPath:
    """Order the special points by longitude about an axis and join them by segments."""
    pts = E.array()
    axes = beta_axis_candidates(axis_seed)
    if axis is not None:
        a = np.asarray(axis, dtype=float)
        axes = [a / np.linalg.norm(a)] + axes[:-1]
    blocking = "no attempt made"
    for b in axes:
        if np.min(np.linalg.norm(pts - b, axis=1)) < 1e-6 or np.min(np.linalg.norm(pts + b, axis=1)) < 1e-6:
            blocking = "axis passes through a special point"
            continue
        lon = _longitudes(pts, b)
        order = np.argsort(lon, kind="stable")
        sl = lon[order]
        gaps = np.diff(np.concatenate([sl, [sl[0] + TWO_PI]]))
        if gaps.min() < LONGITUDE_SEPARATION:
            i = int(np.argmin(gaps))
            blocking = (f"special points {int(order[i])} and {int(order[(i + 1) % len(order)])} "
                        "share a meridian")
            continue
        start = (int(np.argmax(gaps)) + 1) % len(order)
        ordering = tuple(int(i) for i in np.roll(order, -start))
        seq = [E.points[i] for i in ordering]
        try:
            segs = tuple(great_arc(seq[j], seq[j + 1]) for j in range(len(seq) - 1))
        except GeometryError as exc:
            blocking = str(exc)
            continue
        if not path_is_simple(segs):
            blocking = "segments intersect"
            continue
        bp = SpherePoint.from_vector(b)
        return BetaPath(ordering, segs, (bp, bp.antipode()), tuple(seq))
    raise BetaConstructionError(f"no admissible axis after {len(axes)} tries: {blocking}")


# -- sphere triangulation ------------------------------------------------------

@dataclass
class SphereTriangulation:
    vertices: list[SpherePoint]
    edges: list[tuple[int, int, CircularArc]]
    faces: np.ndarray
    face_edges: np.ndarray
    special_vertices: list[int]
    beta_segment_edges: list[list[int]]
    constraint_edges: list[list[int]]
    constraint_arcs: list[CircularArc]
    beta: BetaPath | None = None
    stats: dict = field(default_factory=dict)

    def __post_init__(self):
        self.faces = np.asarray(self.faces, dtype=np.int64).reshape(-1, 3)
        self.face_edges = np.asarray(self.face_edges, dtype=np.int64).reshape(-1, 3)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def beta_edges(self) -> list[int]:
        return [e for seg in self.beta_segment_edges for e in seg]

    @cached_property
    def points(self) -> np.ndarray:
        return np.array([p.coordinates for p in self.vertices])

    @cached_property
    def he_sign(self) -> np.ndarray:
        """+1 where half-edge ``3f+k`` runs along its edge's stored arc."""
        u = np.array([e[0] for e in self.edges])
        tail = self.faces.reshape(-1)
        return np.where(u[self.face_edges.reshape(-1)] == tail, 1, -1)

    @cached_property
    def he_edge(self) -> np.ndarray:
        return self.face_edges.reshape(-1)

    @cached_property
    def edge_halfedges(self) -> np.ndarray:
        """``(E, 2)``: half-edge running along the edge arc, and the opposite one."""
        out = -np.ones((self.n_edges, 2), dtype=np.int64)
        for h, (e, s) in enumerate(zip(self.he_edge, self.he_sign)):
            slot = 0 if s > 0 else 1
            if out[e, slot] != -1:
                raise TriangulationError(f"edge {e} used twice with the same direction")
            out[e, slot] = h
        return out

    @cached_property
    def he_twin(self) -> np.ndarray:
        eh = self.edge_halfedges
        tw = np.empty(3 * self.n_faces, dtype=np.int64)
        tw[eh[:, 0]] = eh[:, 1]
        tw[eh[:, 1]] = eh[:, 0]
        return tw

    @cached_property
    def beta_edge_mask(self) -> np.ndarray:
        m = np.zeros(self.n_edges, dtype=bool)
        m[self.beta_edges] = True
        return m

    @cached_property
    def beta_halfedges(self) -> tuple[np.ndarray, np.ndarray]:
        """Half-edges on the left (``+``) and right (``-``) of each cut edge, in cut order."""
        eh = self.edge_halfedges
        be = np.array(self.beta_edges, dtype=np.int64)
        return eh[be, 0], eh[be, 1]

    @cached_property
    def beta_segment_of(self) -> np.ndarray:
        """Segment index for each position along the cut."""
        return np.array([j for j, seg in enumerate(self.beta_segment_edges) for _ in seg], dtype=np.int64)

    def arc_of_halfedge(self, h: int) -> CircularArc:
        arc = self.edges[self.he_edge[h]][2]
        return arc if self.he_sign[h] > 0 else arc.reversed()

    def face_arcs(self, f: int) -> list[CircularArc]:
        return [self.arc_of_halfedge(3 * f + k) for k in range(3)]

    @cached_property
    def face_areas(self) -> np.ndarray:
        return np.array([_gauss_bonnet(self.face_arcs(f)) for f in range(self.n_faces)])

    @cached_property
    def corner_angles(self) -> np.ndarray:
        """``(F, 3)`` interior angle of each face at each of its corners."""
        out = np.empty((self.n_faces, 3))
        for f in range(self.n_faces):
            arcs = self.face_arcs(f)
            for k in range(3):
                out[f, k] = _corner_angle(self.points[self.faces[f, k]], arcs[k - 1], arcs[k])
        return out

    @cached_property
    def vertex_degree(self) -> np.ndarray:
        """Number of face corners at each vertex."""
        return np.bincount(self.faces.reshape(-1), minlength=self.n_vertices)

    @cached_property
    def special_mask(self) -> np.ndarray:
        m = np.zeros(self.n_vertices, dtype=bool)
        m[[v for v in self.special_vertices if v is not None]] = True
        return m

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        return np.array([arc.length for _, _, arc in self.edges])

    @cached_property
    def vertex_link(self) -> list[list[int]]:
        """For each vertex, the ccw cycle of corners ``3f+k`` around it."""
        corners: dict[int, int] = {}
        for f in range(self.n_faces):
            for k in range(3):
                corners.setdefault(int(self.faces[f, k]), 3 * f + k)
        tw = self.he_twin
        out: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for v, c0 in corners.items():
            cyc = [c0]
            c = c0
            while True:
                # corner c = half-edge leaving v; previous half-edge of the face enters v
                f, k = divmod(c, 3)
                prev = 3 * f + (k + 2) % 3
                c = int(tw[prev])
                if c == c0:
                    break
                cyc.append(c)
                if len(cyc) > 3 * self.n_faces:
                    raise TriangulationError("vertex link does not close")
            out[v] = cyc
        return out

    def special_index(self, E: SpecialSet) -> np.ndarray:
        """Index into ``E`` of each vertex, ``-1`` when it is not special."""
        out = -np.ones(self.n_vertices, dtype=np.int64)
        pts = E.array()
        for v, p in enumerate(self.points):
            d = np.linalg.norm(pts - p, axis=1)
            i = int(np.argmin(d))
            if d[i] <= COINCIDE_TOL:
                out[v] = i
        return out

    def check(self, geometric: bool = True) -> list[str]:
        problems = []
        V, E, F = self.n_vertices, self.n_edges, self.n_faces
        if V - E + F != 2:
            problems.append(f"Euler characteristic {V - E + F} != 2")
        for e, (u, v, arc) in enumerate(self.edges):
            if not (arc.start.close_to(self.vertices[u]) and arc.end.close_to(self.vertices[v])):
                problems.append(f"edge {e} endpoints do not match its arc")
        counts = np.bincount(self.he_edge, minlength=E)
        if np.any(counts != 2):
            problems.append("some edge does not border exactly two faces")
        else:
            try:
                _ = self.edge_halfedges
            except TriangulationError as exc:
                problems.append(f"inconsistent orientation: {exc}")
        tail = self.faces.reshape(-1)
        head = self.faces[:, [1, 2, 0]].reshape(-1)
        for h in range(3 * F):
            u, v, _ = self.edges[self.he_edge[h]]
            if {u, v} != {int(tail[h]), int(head[h])}:
                problems.append(f"half-edge {h} does not match edge {self.he_edge[h]}")
                break
        pairs = [frozenset((u, v)) for u, v, _ in self.edges]
        if len(set(pairs)) != len(pairs):
            problems.append("two edges share both endpoints")
        for ci, (arc, es) in enumerate(zip(self.constraint_arcs, self.constraint_edges)):
            chain = [self.edges[abs(e)][2] for e in es]
            if not chain or not chain[0].start.close_to(arc.start) or not chain[-1].end.close_to(arc.end):
                problems.append(f"constraint {ci} is not covered end to end")
                continue
            if any(not a.end.close_to(b.start) for a, b in zip(chain, chain[1:])):
                problems.append(f"constraint {ci} edges are not consecutive")
            if abs(sum(a.length for a in chain) - arc.length) > 1e-9:
                problems.append(f"constraint {ci} length mismatch")
            if any(not a.circle.same_as(arc.circle) for a in chain):
                problems.append(f"constraint {ci} leaves its circle")
        if geometric:
            for f in range(F):
                try:
                    a = region_area(self.face_arcs(f))
                except GeometryError as exc:
                    problems.append(f"face {f}: {exc}")
                    continue
                if not 0 < a < 2 * math.pi:
                    problems.append(f"face {f} has area {a}")
            total = float(self.face_areas.sum())
            if abs(total - 4 * math.pi) > 1e-9:
                problems.append(f"face areas sum to {total}, not 4*pi")
        return problems


# -- arrangement ---------------------------------------------------------------

class _VertexTable:
    def __init__(self):
        self.points: list[SpherePoint] = []

    def find(self, p: SpherePoint, tol: float = 1e-9) -> int | None:
        for i, q in enumerate(self.points):
            if p.close_to(q, tol):
                return i
        return None

    def add(self, p: SpherePoint) -> int:
        i = self.find(p)
        if i is None:
            self.points.append(p)
            return len(self.points) - 1
        return i


def _tangent_frame(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    trial = np.array([1.0, 0.0, 0.0]) if abs(p[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = trial - (trial @ p) * p
    e1 /= np.linalg.norm(e1)
    return e1, cross3(p, e1)


def _direction_angle(p: np.ndarray, t: np.ndarray) -> float:
    e1, e2 = _tangent_frame(p)
    return math.atan2(float(t @ e2), float(t @ e1)) % TWO_PI


def _ccw(a: float, b: float) -> float:
    """Counterclockwise angle from direction ``a`` to ``b`` in ``[0, 2pi)``."""
    return (b - a) % TWO_PI


def _corner_angle(p: np.ndarray, incoming: CircularArc, outgoing: CircularArc) -> float:
    """Interior angle on the left at a walk corner; a slit tip counts as a full turn."""
    span = _ccw(_direction_angle(p, outgoing.tangent(p)), _direction_angle(p, -incoming.tangent(p)))
    return span if span > 1e-12 else TWO_PI


def _walk_area(points: Sequence[SpherePoint], walk: Sequence[int], arcs: Sequence[CircularArc]) -> float:
    n = len(walk)
    total = TWO_PI
    for i in range(n):
        total -= arcs[i].curvature * arcs[i].length
        total -= math.pi - _corner_angle(points[walk[i]].vec, arcs[i - 1], arcs[i])
    return total


class _Builder:
    def __init__(self, vt: _VertexTable):
        self.vt = vt
        self.edges: list[tuple[int, int, CircularArc]] = []
        self.pairs: set[frozenset] = set()
        self.triangles: list[tuple[int, int, int]] = []
        self.tri_arcs: list[tuple[CircularArc, CircularArc, CircularArc]] = []

    def add_edge(self, u: int, v: int, arc: CircularArc) -> int:
        self.edges.append((u, v, arc))
        self.pairs.add(frozenset((u, v)))
        return len(self.edges) - 1


def _fib_points(n: int) -> np.ndarray:
    i = np.arange(n) + 0.5
    phi = np.arccos(1 - 2 * i / n)
    theta = math.pi * (1 + 5 ** 0.5) * i
    return np.stack([np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)], axis=1)


class _FaceClipper:
    """Ear clipping of one arrangement face given as a boundary walk."""

    def __init__(self, builder: _Builder, walk: list[int], arcs: list[CircularArc]):
        self.b = builder
        self.W = list(walk)
        self.A = list(arcs)

    def _pt(self, v: int) -> np.ndarray:
        return self.b.vt.points[v].vec

    def _sector_ok(self, i: int, direction: np.ndarray) -> bool:
        """Is ``direction`` strictly inside the face corner at walk position ``i``?"""
        n = len(self.W)
        p = self._pt(self.W[i])
        out_dir = self.A[i].tangent(p)
        back_dir = -self.A[(i - 1) % n].tangent(p)
        a_out = _direction_angle(p, out_dir)
        a_back = _direction_angle(p, back_dir)
        a_d = _direction_angle(p, direction)
        span = _ccw(a_out, a_back)
        if span < 1e-12:
            span = TWO_PI
        t = _ccw(a_out, a_d)
        return 1e-9 < t < span - 1e-9

    def _segment_clear(self, seg: CircularArc, ends: tuple[int, ...]) -> bool:
        endpts = [self.b.vt.points[v] for v in ends]
        for arc in self.A:
            try:
                common = arc_pair_intersections(seg, arc)
            except OverlapError:
                return False
            for x in common:
                if not any(x.close_to(e, 1e-9) for e in endpts):
                    return False
        for v in set(self.W):
            if v in ends:
                continue
            if seg.contains(self.b.vt.points[v], 1e-9):
                return False
        return True

    def _ear(self, i: int):
        n = len(self.W)
        a, b, c = self.W[(i - 1) % n], self.W[i], self.W[(i + 1) % n]
        if a == c or frozenset((a, c)) in self.b.pairs:
            return None
        pa, pc = self._pt(a), self._pt(c)
        if np.linalg.norm(cross3(pa, pc)) < 1e-9:
            return None
        d = great_arc(self.b.vt.points[c], self.b.vt.points[a])
        if not self._sector_ok((i - 1) % n, d.reversed().tangent(pa)):
            return None
        if not self._sector_ok((i + 1) % n, d.tangent(pc)):
            return None
        if not self._segment_clear(d, (a, c)):
            return None
        tri = (self.A[(i - 1) % n], self.A[i], d)
        area = _gauss_bonnet(tri)
        if not 0 < area < 2 * math.pi:
            return None
        angles = [math.pi - _turn(tri[k], tri[(k + 1) % 3]) for k in range(3)]
        return min(angles), d

    def run(self):
        steiner = 0
        budget = len(self.W) + 6
        while True:
            if len(self.W) == 3 and len(set(self.W)) == 3 and 0 < _walk_area(self.b.vt.points, self.W, self.A) < 2 * math.pi - 1e-9:
                break
            best = None
            for i in range(len(self.W)):
                r = self._ear(i)
                if r is not None and (best is None or r[0] > best[0] + 1e-12):
                    best = (r[0], i, r[1])
            if best is None:
                if steiner > budget:
                    raise TriangulationError("face could not be triangulated")
                self._insert_steiner()
                steiner += 1
                continue
            _, i, d = best
            n = len(self.W)
            a, b, c = self.W[(i - 1) % n], self.W[i], self.W[(i + 1) % n]
            self._emit((a, b, c), (self.A[(i - 1) % n], self.A[i], d))
            self.b.add_edge(c, a, d)
            # replace positions i-1, i by the diagonal a -> c
            new_arc = d.reversed()
            if i == 0:
                self.W = self.W[1:]
                self.A = self.A[1:-1] + [new_arc]
            else:
                self.W = self.W[:i] + self.W[i + 1:]
                self.A = self.A[:i - 1] + [new_arc] + self.A[i + 1:]
        if len(set(self.W)) != 3:
            raise TriangulationError("degenerate final triangle")
        self._emit(tuple(self.W), tuple(self.A))

    def _emit(self, verts, arcs):
        self.b.triangles.append(tuple(int(v) for v in verts))
        self.b.tri_arcs.append(tuple(arcs))

    def _visible(self, j: int, sp: SpherePoint) -> CircularArc | None:
        """Segment from walk position ``j`` to ``sp`` when it runs inside the face."""
        pv = self._pt(self.W[j])
        if np.linalg.norm(cross3(pv, sp.vec)) < 1e-6:
            return None
        seg = great_arc(self.b.vt.points[self.W[j]], sp)
        if not self._sector_ok(j, seg.tangent(pv)) or not self._segment_clear(seg, (self.W[j],)):
            return None
        return seg

    def _tent(self) -> bool:
        """Raise a triangle over one boundary arc, with a new apex inside the face."""
        n = len(self.W)
        for j in sorted(range(n), key=lambda j: -self.A[j].length):
            arc = self.A[j]
            m = arc.midpoint().vec
            left = cross3(m, arc.tangent(m))
            for eps in (0.5, 0.25, 0.1, 0.03):
                p = m + eps * arc.length * left
                sp = SpherePoint.from_vector(p / np.linalg.norm(p))
                if self.b.vt.find(sp, 1e-6) is not None:
                    continue
                s1 = self._visible(j, sp)
                if s1 is None:
                    continue
                s2 = self._visible((j + 1) % n, sp)
                if s2 is None:
                    continue
                tri = (arc, s2, s1.reversed())
                if not 0 < _gauss_bonnet(tri) < 2 * math.pi:
                    continue
                if self._segment_crosses(s1, s2):
                    continue
                v = self.b.vt.add(sp)
                w0, w1 = self.W[j], self.W[(j + 1) % n]
                self.b.add_edge(w0, v, s1)
                self.b.add_edge(w1, v, s2)
                self._emit((w0, w1, v), tri)
                self.W = self.W[:j + 1] + [v] + self.W[j + 1:]
                self.A = self.A[:j] + [s1, s2.reversed()] + self.A[j + 1:]
                return True
        return False

    @staticmethod
    def _segment_crosses(s1: CircularArc, s2: CircularArc) -> bool:
        try:
            common = arc_pair_intersections(s1, s2)
        except OverlapError:
            return True
        return any(not x.close_to(s1.end, 1e-9) for x in common)

    def _insert_steiner(self):
        area = _walk_area(self.b.vt.points, self.W, self.A)
        if area < math.pi and self._tent():
            return
        if area < 0.5:
            # thin faces are handled by refining their sides instead
            raise TriangulationError("no tent fits inside a thin face")
        if not self._far_point() and not self._tent():
            raise TriangulationError("no interior point found for a face without ears")

    def _far_point(self) -> bool:
        best = None
        mean = np.mean([self._pt(v) for v in self.W], axis=0)
        cands = list(_fib_points(240))
        if np.linalg.norm(mean) > 1e-6:
            mean = mean / np.linalg.norm(mean)
            cands = [-mean, mean] + cands
        distinct = len(set(self.W))
        for p in cands:
            if best is not None and best[0] >= distinct:
                break
            sp = SpherePoint.from_vector(p)
            if self.b.vt.find(sp, 1e-6) is not None:
                continue
            visible = [j for j in range(len(self.W)) if self._visible(j, sp) is not None]
            if visible and (best is None or len(visible) > best[0]):
                best = (len(visible), sp, visible[0])
        if best is None:
            return False
        _, sp, j = best
        v = self.b.vt.add(sp)
        w = self.W[j]
        seg = great_arc(self.b.vt.points[w], sp)
        self.b.add_edge(w, v, seg)
        self.W = self.W[:j + 1] + [v, w] + self.W[j + 1:]
        self.A = self.A[:j] + [seg, seg.reversed()] + self.A[j:]
        return True


def _turn(a: CircularArc, b: CircularArc) -> float:
    from .sphgeo import turning_angle
    return turning_angle(a, b)


def _curve_points(curves, vt: _VertexTable, E: SpecialSet, allow_near_tangent: bool):
    """Split points of every curve from pairwise intersections and special points."""
    pts: list[list[SpherePoint]] = [[c.start, c.end] for c in curves]
    for i, c in enumerate(curves):
        # short pieces keep every face small enough for ear clipping
        n = max(3 if c.full_circle else 1, math.ceil(c.length / MAX_PIECE), math.ceil(c.sweep / (math.pi / 2)))
        pts[i] += [vt.points[vt.add(c.point_at(c.sweep * k / n))] for k in range(1, n)]
    for i in range(len(curves)):
        for j in range(i + 1, len(curves)):
            common = arc_pair_intersections(curves[i], curves[j])
            for x in common:
                shared = any(x.close_to(e, 1e-9) for e in (curves[i].start, curves[i].end)) and \
                    any(x.close_to(e, 1e-9) for e in (curves[j].start, curves[j].end))
                if not shared and not curves[i].circle.same_as(curves[j].circle):
                    ang = crossing_angle(curves[i], curves[j], x)
                    if ang < NEAR_TANGENT and not allow_near_tangent:
                        raise NearTangentError(f"curves {i} and {j} meet at angle {ang:.3g}")
                x = vt.points[vt.add(x)]
                pts[i].append(x)
                pts[j].append(x)
    for p in E.points:
        p = vt.points[vt.add(p)]
        for i, c in enumerate(curves):
            if c.contains(p, 1e-9):
                pts[i].append(p)
    return pts


def _split_curves(curves, pts, vt, extra):
    """Sub-arcs per curve, subdivided until there are no loops or parallel edges."""
    for _ in range(8):
        pieces = []
        for i, c in enumerate(curves):
            sub = c.split([p for p in pts[i] + extra[i]]) if (c.full_circle or len(pts[i]) + len(extra[i]) > 2) else [c]
            pieces.append(sub)
        key_count: dict[frozenset, int] = {}
        for sub in pieces:
            for s in sub:
                k = frozenset((vt.add(s.start), vt.add(s.end)))
                key_count[k] = key_count.get(k, 0) + 1
        bad = False
        for i, sub in enumerate(pieces):
            for s in sub:
                u, v = vt.add(s.start), vt.add(s.end)
                if u == v or key_count[frozenset((u, v))] > 1:
                    extra[i].append(s.midpoint())
                    bad = True
        if not bad:
            return pieces
    raise TriangulationError("could not remove parallel edges")


def _components(n: int, edges) -> list[int]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for u, v, _ in edges:
        parent[find(u)] = find(v)
    return [find(x) for x in range(n)]


def _connect(builder: _Builder) -> int:
    """Join the arrangement's connected pieces with great-circle connectors."""
    vt = builder.vt
    added = 0
    while True:
        comp = _components(len(vt.points), builder.edges)
        root = comp[0]
        inside = [v for v in range(len(vt.points)) if comp[v] == root]
        outside = [v for v in range(len(vt.points)) if comp[v] != root]
        if not outside:
            return added
        pairs = sorted(
            ((float(np.linalg.norm(vt.points[a].vec - vt.points[b].vec)), a, b) for a in inside for b in outside)
        )
        for _, a, b in pairs:
            try:
                seg = great_arc(vt.points[a], vt.points[b])
            except GeometryError:
                continue
            ok = True
            for _, _, arc in builder.edges:
                try:
                    common = arc_pair_intersections(seg, arc)
                except OverlapError:
                    ok = False
                    break
                for x in common:
                    if not (x.close_to(vt.points[a], 1e-9) or x.close_to(vt.points[b], 1e-9)):
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                for v in range(len(vt.points)):
                    if v not in (a, b) and seg.contains(vt.points[v], 1e-9):
                        ok = False
                        break
            if ok:
                builder.add_edge(a, b, seg)
                added += 1
                break
        else:
            raise TriangulationError("arrangement pieces cannot be connected")


def _faces_of_graph(vt: _VertexTable, edges):
    """Boundary walks (face on the left) of an embedded connected graph."""
    out_he: dict[int, list[tuple[float, int]]] = {}
    he_arc = {}
    he_head = {}
    for e, (u, v, arc) in enumerate(edges):
        for h, (s, t, a) in ((2 * e, (u, v, arc)), (2 * e + 1, (v, u, arc.reversed()))):
            p = vt.points[s].vec
            out_he.setdefault(s, []).append((_direction_angle(p, a.tangent(p)), h))
            he_arc[h] = a
            he_head[h] = t
    rot: dict[int, list[int]] = {v: [h for _, h in sorted(lst)] for v, lst in out_he.items()}
    pos = {h: (v, i) for v, lst in rot.items() for i, h in enumerate(lst)}
    seen = set()
    walks = []
    for h0 in sorted(he_arc):
        if h0 in seen:
            continue
        walk, arcs = [], []
        h = h0
        while h not in seen:
            seen.add(h)
            tail = edges[h // 2][0] if h % 2 == 0 else edges[h // 2][1]
            walk.append(tail)
            arcs.append(he_arc[h])
            rev = h ^ 1
            v, i = pos[rev]
            h = rot[v][(i - 1) % len(rot[v])]
        walks.append((walk, arcs))
    return walks


def triangulate_with_constraints(arcs: Sequence[CircularArc], E: SpecialSet, beta: BetaPath,
                                 allow_near_tangent: bool = False) -> SphereTriangulation:
    """Triangulate the sphere so that every arc and every cut segment is a union of edges."""
    arcs = list(arcs)
    curves = arcs + list(beta.segments)
    vt = _VertexTable()
    for p in E.points:
        vt.add(p)
    pts = _curve_points(curves, vt, E, allow_near_tangent)
    base_points = list(vt.points)
    extra: list[list[SpherePoint]] = [[] for _ in curves]
    for refinements in range(MAX_REFINE):
        vt.points = list(base_points)
        pieces = _split_curves(curves, pts, vt, extra)
        builder = _Builder(vt)
        curve_edges: list[list[int]] = []
        owner: dict[frozenset, int] = {}
        for ci, sub in enumerate(pieces):
            ids = []
            for s in sub:
                u, v = vt.add(s.start), vt.add(s.end)
                ids.append(builder.add_edge(u, v, s))
                owner[frozenset((u, v))] = ci
            curve_edges.append(ids)
        connectors = _connect(builder)
        n_arr_edges = len(builder.edges)
        walks = _faces_of_graph(vt, builder.edges)
        n_arr_faces = len(walks)
        if len(vt.points) - n_arr_edges + n_arr_faces != 2:
            raise TriangulationError("arrangement is not a connected plane graph")
        try:
            # small faces first, so a stuck face is found before much work is spent
            for walk, warcs in sorted(walks, key=lambda wa: _walk_area(vt.points, wa[0], wa[1])):
                clipper = _FaceClipper(builder, walk, warcs)
                clipper.run()
            break
        except TriangulationError:
            # refine the curved sides of the stuck region and start over
            walk, warcs = clipper.W, clipper.A
            n = len(walk)
            sides = [(warcs[i].curvature < -1e-12, warcs[i].length, i) for i in range(n)
                     if frozenset((walk[i], walk[(i + 1) % n])) in owner]
            if not sides:
                raise
            chosen = [sd for sd in sides if sd[0]] or [max(sides)]
            for _, _, i in chosen:
                extra[owner[frozenset((walk[i], walk[(i + 1) % n]))]].append(warcs[i].midpoint())
    else:
        raise TriangulationError("face refinement did not converge")

    pair_to_edge = {frozenset((u, v)): e for e, (u, v, _) in enumerate(builder.edges)}
    faces = np.array(builder.triangles, dtype=np.int64).reshape(-1, 3)
    face_edges = np.array(
        [[pair_to_edge[frozenset((int(t[k]), int(t[(k + 1) % 3])))] for k in range(3)] for t in faces],
        dtype=np.int64,
    ).reshape(-1, 3)
    special = [vt.find(p) for p in beta.points]
    T = SphereTriangulation(
        vertices=list(vt.points),
        edges=list(builder.edges),
        faces=faces,
        face_edges=face_edges,
        special_vertices=special,
        beta_segment_edges=curve_edges[len(arcs):],
        constraint_edges=curve_edges[:len(arcs)],
        constraint_arcs=arcs,
        beta=beta,
        stats={
            "arrangement_edges": n_arr_edges,
            "arrangement_faces": n_arr_faces,
            "connectors": connectors,
            "refinements": refinements,
            "input_arcs": len(curves),
        },
    )
    return T


def build_base(arcs: Sequence[CircularArc], E: SpecialSet, axis_seed: int = 0, tries: int = 16):
    """Cut path plus triangulation, re-drawing the cut axis on near-tangent crossings."""
    last = None
    for t in range(tries):
        beta = construct_beta(E, axis_seed + 7919 * t)
        try:
            return triangulate_with_constraints(arcs, E, beta)
        except NearTangentError as exc:
            last = exc
    raise TriangulationError(f"near-tangent crossings persisted: {last}")


# -- shelling ------------------------------------------------------------------

@dataclass(frozen=True)
class ShellingOrder:
    face_sequence: tuple[int, ...]
    crossing_edges: tuple[tuple[tuple[int, int], ...], ...]

    @property
    def k0(self) -> int:
        return len(self.face_sequence)


def _cut_complex_euler(T: SphereTriangulation, faces: set[int]) -> tuple[int, bool]:
    """Euler characteristic and connectivity of a face set after cutting along the path."""
    beta = T.beta_edge_mask
    tw = T.he_twin
    he_edge = T.he_edge
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for f in faces:
        for k in range(3):
            parent[3 * f + k] = 3 * f + k
    fparent = {f: f for f in faces}

    def ffind(x):
        while fparent[x] != x:
            fparent[x] = fparent[fparent[x]]
            x = fparent[x]
        return x

    n_edges = 0
    for f in faces:
        for k in range(3):
            h = 3 * f + k
            e = he_edge[h]
            t = int(tw[h])
            g = t // 3
            if beta[e] or g not in faces:
                n_edges += 1
                continue
            if h < t:
                n_edges += 1
                # start of h ~ start of next(t); end of h ~ start of t
                union(h, 3 * g + (t % 3 + 1) % 3)
                union(3 * f + (k + 1) % 3, t)
                fparent[ffind(f)] = ffind(g)
    n_vertices = len({find(c) for c in parent})
    connected = len({ffind(f) for f in faces}) == 1
    return n_vertices - n_edges + len(faces), connected


def prefix_is_disk(T: SphereTriangulation, faces: set[int]) -> bool:
    chi, conn = _cut_complex_euler(T, faces)
    return bool(faces) and chi == 1 and conn


def shelling_order(T: SphereTriangulation) -> ShellingOrder:
    """Face order whose prefixes, cut along the path, are all disks."""
    F = T.n_faces
    tw = T.he_twin
    beta = T.beta_edge_mask
    plus, minus = T.beta_halfedges
    minus_faces = {int(h) // 3 for h in minus}
    remaining = set(range(F))
    if not prefix_is_disk(T, remaining):
        raise ShellingError("the sphere cut along the path is not a disk")
    removed: list[int] = []
    while len(remaining) > 1:
        def on_boundary(f):
            for k in range(3):
                h = 3 * f + k
                if beta[T.he_edge[h]] or int(tw[h]) // 3 not in remaining:
                    return True
            return False

        cands = sorted((f for f in remaining if on_boundary(f)), key=lambda f: (f in minus_faces, f))
        for f in cands:
            rest = remaining - {f}
            if prefix_is_disk(T, rest):
                remaining = rest
                removed.append(f)
                break
        else:
            raise ShellingError("no removable face; the complex is malformed")
    removed.append(remaining.pop())
    order = removed[::-1]
    crossings = []
    placed = {order[0]}
    for f in order[1:]:
        shared = []
        for k in range(3):
            h = 3 * f + k
            t = int(tw[h])
            if not beta[T.he_edge[h]] and t // 3 in placed:
                shared.append((h, t))
        crossings.append(tuple(shared))
        placed.add(f)
    return ShellingOrder(tuple(order), tuple(crossings))


def check_shelling(T: SphereTriangulation, S: ShellingOrder) -> list[str]:
    problems = []
    if sorted(S.face_sequence) != list(range(T.n_faces)):
        problems.append("sequence is not a permutation of the faces")
    beta = T.beta_edge_mask
    for j in range(1, len(S.face_sequence) + 1):
        if not prefix_is_disk(T, set(S.face_sequence[:j])):
            problems.append(f"prefix {j} is not a disk")
    for j, gamma in enumerate(S.crossing_edges):
        if not 1 <= len(gamma) <= 2:
            problems.append(f"step {j} crosses {len(gamma)} edges")
        for h, t in gamma:
            if beta[T.he_edge[h]]:
                problems.append(f"step {j} crosses the cut")
    return problems
