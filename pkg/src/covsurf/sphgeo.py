"""Geometry of the unit sphere: points, circles, circular arcs, areas.

Conventions
-----------
* The extended plane is identified with the unit sphere by the stereographic
  projection from the north pole: ``0 -> (0, 0, -1)``, ``inf -> (0, 0, 1)``,
  ``1 -> (1, 0, 0)``.
* The round metric is used throughout, so the whole sphere has area ``4*pi``
  and a great circle has length ``2*pi``.
* A circle is the intersection of the sphere with the plane ``axis . x = height``.
  A circular arc runs counterclockwise about the axis (seen from the tip of the
  axis) when ``orientation == +1`` and clockwise when ``orientation == -1``.
  The region lying to the *left* of an arc is the side ``axis . x > height`` for
  counterclockwise arcs; this is the side Gauss-Bonnet areas refer to.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

UNIT_TOL = 1e-12
COINCIDE_TOL = 1e-10
AREA_TOL = 1e-9
MIN_ARC_LENGTH = 1e-9
TWO_PI = 2.0 * math.pi


class GeometryError(ValueError):
    """Invalid geometric input."""


class OverlapError(GeometryError):
    """Two arcs on the same circle share a sub-arc."""


class AmbiguousSideError(GeometryError):
    """A probe point lies on the circle it is tested against."""


class NotClosedError(GeometryError):
    pass


class SelfIntersectionError(GeometryError):
    pass


def cross3(a, b) -> np.ndarray:
    """Cross product of two 3-vectors; much cheaper than ``np.cross`` for single vectors."""
    a0, a1, a2 = float(a[0]), float(a[1]), float(a[2])
    b0, b1, b2 = float(b[0]), float(b[1]), float(b[2])
    return np.array([a1 * b2 - a2 * b1, a2 * b0 - a0 * b2, a0 * b1 - a1 * b0])


def _unit(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    n = math.sqrt(float(v @ v))
    if n == 0.0:
        raise GeometryError("zero vector has no direction")
    return v / n


@dataclass(frozen=True)
class SpherePoint:
    x: float
    y: float
    z: float

    def __post_init__(self):
        n = math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)
        if abs(n - 1.0) > UNIT_TOL:
            raise GeometryError(f"point {self.coordinates} is not on the unit sphere (|p|={n!r})")

    @classmethod
    def from_vector(cls, v) -> "SpherePoint":
        u = _unit(v)
        return cls(float(u[0]), float(u[1]), float(u[2]))

    @property
    def coordinates(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)

    @property
    def vec(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    def antipode(self) -> "SpherePoint":
        return SpherePoint(-self.x, -self.y, -self.z)

    def close_to(self, other: "SpherePoint", tol: float = COINCIDE_TOL) -> bool:
        return float(np.linalg.norm(self.vec - other.vec)) <= tol


def _as_vec(p) -> np.ndarray:
    if isinstance(p, SpherePoint):
        return p.vec
    return np.asarray(p, dtype=float)


@dataclass(frozen=True)
class Circle:
    axis: tuple[float, float, float]
    height: float

    def __post_init__(self):
        n = math.sqrt(sum(a * a for a in self.axis))
        if abs(n - 1.0) > UNIT_TOL:
            raise GeometryError(f"circle axis {self.axis} is not a unit vector")
        if not -1.0 < self.height < 1.0:
            raise GeometryError(f"circle height {self.height} gives a degenerate circle")

    @classmethod
    def make(cls, axis, height: float) -> "Circle":
        a = _unit(axis)
        return cls((float(a[0]), float(a[1]), float(a[2])), float(height))

    @property
    def n(self) -> np.ndarray:
        return np.array(self.axis)

    @property
    def radius(self) -> float:
        return math.sqrt(1.0 - self.height * self.height)

    @property
    def is_great(self) -> bool:
        return abs(self.height) <= UNIT_TOL

    def contains(self, p, tol: float = COINCIDE_TOL) -> bool:
        return abs(float(self.n @ _as_vec(p)) - self.height) <= tol

    def same_as(self, other: "Circle", tol: float = COINCIDE_TOL) -> bool:
        d = float(self.n @ other.n)
        if d > 0:
            return abs(d - 1.0) <= tol and abs(self.height - other.height) <= tol
        return abs(d + 1.0) <= tol and abs(self.height + other.height) <= tol

    def frame(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Return ``(center, u, w)`` with ``u, w`` an orthonormal ccw basis of the plane."""
        n = self.n
        trial = np.array([1.0, 0.0, 0.0]) if abs(n[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
        u = _unit(trial - (trial @ n) * n)
        return self.height * n, u, cross3(n, u)

    def point_at(self, angle: float) -> SpherePoint:
        c, u, w = self.frame()
        r = self.radius
        return SpherePoint.from_vector(c + r * (math.cos(angle) * u + math.sin(angle) * w))


@dataclass(frozen=True)
class CircularArc:
    circle: Circle
    start: SpherePoint
    end: SpherePoint
    orientation: int = 1
    full_circle: bool = False
    _sweep: float = field(default=0.0, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.orientation not in (1, -1):
            raise GeometryError("orientation must be +1 or -1")
        for p in (self.start, self.end):
            if not self.circle.contains(p):
                raise GeometryError(f"endpoint {p.coordinates} is not on the supporting circle")
        if self.full_circle:
            if not self.start.close_to(self.end):
                raise GeometryError("a full circle must start and end at the same point")
            sweep = TWO_PI
        else:
            sweep = self._param(self.end.vec)
            if sweep * self.circle.radius < MIN_ARC_LENGTH or (TWO_PI - sweep) * self.circle.radius < MIN_ARC_LENGTH:
                raise GeometryError("degenerate arc (length below 1e-9)")
        object.__setattr__(self, "_sweep", sweep)

    # parametrisation: angle measured from ``start`` in the direction of travel
    def _param(self, p: np.ndarray) -> float:
        n = self.circle.n
        c = self.circle.height * n
        u = self.start.vec - c
        w = cross3(n, u)
        q = p - c
        ang = math.atan2(float(q @ w), float(q @ u))
        ang *= self.orientation
        return ang % TWO_PI

    @property
    def sweep(self) -> float:
        return self._sweep

    @property
    def length(self) -> float:
        return self.circle.radius * self._sweep

    @property
    def curvature(self) -> float:
        """Signed geodesic curvature with respect to the left normal."""
        return self.orientation * self.circle.height / self.circle.radius

    @property
    def is_convex(self) -> bool:
        """True when the region to the left of the arc is locally convex."""
        return self.orientation * self.circle.height >= -UNIT_TOL

    def point_at(self, t: float) -> SpherePoint:
        """Point at swept angle ``t`` (0 <= t <= sweep) from the start."""
        n = self.circle.n
        c = self.circle.height * n
        u = self.start.vec - c
        w = cross3(n, u)
        a = self.orientation * t
        return SpherePoint.from_vector(c + math.cos(a) * u + math.sin(a) * w)

    def midpoint(self) -> SpherePoint:
        return self.point_at(0.5 * self._sweep)

    def tangent(self, p) -> np.ndarray:
        """Unit direction of travel at ``p``."""
        v = cross3(self.circle.n, _as_vec(p))
        return self.orientation * _unit(v)

    def param_of(self, p) -> float:
        return self._param(_as_vec(p))

    def contains(self, p, tol: float = COINCIDE_TOL) -> bool:
        v = _as_vec(p)
        if not self.circle.contains(v, tol):
            return False
        if self.full_circle:
            return True
        t = self._param(v)
        slack = tol / self.circle.radius
        return t <= self._sweep + slack or t >= TWO_PI - slack

    def reversed(self) -> "CircularArc":
        return CircularArc(self.circle, self.end, self.start, -self.orientation, self.full_circle)

    def split(self, points: Iterable[SpherePoint]) -> list["CircularArc"]:
        """Split at interior points; points outside the open arc are ignored."""
        slack = COINCIDE_TOL / self.circle.radius
        ts = sorted(
            {(self._param(p.vec), p) for p in points if slack < self._param(p.vec) < self._sweep - slack},
            key=lambda tp: tp[0],
        )
        cuts = []
        for t, p in ts:
            if cuts and (t - cuts[-1][0]) * self.circle.radius < MIN_ARC_LENGTH:
                continue
            cuts.append((t, p))
        nodes = [self.start] + [p for _, p in cuts] + [self.end]
        if self.full_circle and not cuts:
            raise GeometryError("a full circle needs at least one interior split point")
        return [CircularArc(self.circle, a, b, self.orientation) for a, b in zip(nodes, nodes[1:])]


def great_arc(a, b) -> CircularArc:
    """Shorter great-circle arc ('line segment') from ``a`` to ``b``."""
    pa, pb = _as_vec(a), _as_vec(b)
    axis = cross3(pa, pb)
    if np.linalg.norm(axis) < 1e-12:
        raise GeometryError("great arc undefined for equal or antipodal points")
    sa = a if isinstance(a, SpherePoint) else SpherePoint.from_vector(pa)
    sb = b if isinstance(b, SpherePoint) else SpherePoint.from_vector(pb)
    return CircularArc(Circle.make(axis, 0.0), sa, sb, 1)


def circle_arcs(circle: Circle, m: int, phase: float = 0.0, orientation: int = 1,
                angles: Sequence[float] | None = None) -> list[CircularArc]:
    """Split a circle into ``m`` consecutive arcs at the given angles (frame angles)."""
    if angles is None:
        angles = [phase + TWO_PI * k / m for k in range(m)]
    pts = [circle.point_at(a) for a in angles]
    if len(pts) == 1:
        return [CircularArc(circle, pts[0], pts[0], orientation, full_circle=True)]
    if orientation < 0:
        pts = pts[::-1]
    return [CircularArc(circle, pts[k], pts[(k + 1) % len(pts)], orientation) for k in range(len(pts))]


@dataclass(frozen=True)
class SpecialSet:
    points: tuple[SpherePoint, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        if len(self.points) < 3:
            raise GeometryError("a special set needs at least three points")
        for i, a in enumerate(self.points):
            for b in self.points[i + 1:]:
                if geodesic_distance(a, b) <= 1e-9:
                    raise GeometryError("special points must be pairwise distinct")

    @property
    def q(self) -> int:
        return len(self.points)

    @property
    def delta(self) -> float:
        return min(geodesic_distance(a, b) for i, a in enumerate(self.points) for b in self.points[i + 1:])

    def index_of(self, p, tol: float = COINCIDE_TOL) -> int | None:
        v = _as_vec(p)
        for i, a in enumerate(self.points):
            if float(np.linalg.norm(a.vec - v)) <= tol:
                return i
        return None

    def array(self) -> np.ndarray:
        return np.array([p.coordinates for p in self.points])


def stereographic_project(z) -> SpherePoint:
    if z is None or (isinstance(z, (complex, float)) and cmath.isinf(z)):
        return SpherePoint(0.0, 0.0, 1.0)
    z = complex(z)
    r2 = abs(z) ** 2
    d = 1.0 + r2
    return SpherePoint.from_vector((2.0 * z.real / d, 2.0 * z.imag / d, (r2 - 1.0) / d))


def inverse_stereographic(p) -> complex:
    """Inverse of :func:`stereographic_project`; the north pole maps to ``complex('inf')``."""
    x, y, z = _as_vec(p)
    if z >= 1.0 - 1e-15:
        return complex(math.inf, 0.0)
    # (x + iy) / (1 - z), rewritten as (x + iy)(1 + z) / (x^2 + y^2) near the south pole
    if z > 0:
        return complex(x, y) / (1.0 - z)
    rho2 = x * x + y * y
    if rho2 == 0.0:
        return 0j
    return complex(x, y) * (1.0 + z) / rho2


def geodesic_distance(a, b) -> float:
    va, vb = _as_vec(a), _as_vec(b)
    return math.atan2(float(np.linalg.norm(cross3(va, vb))), float(va @ vb))


def arc_length(arc: CircularArc) -> float:
    return arc.length


def _circle_meet(c1: Circle, c2: Circle) -> list[np.ndarray]:
    n1, n2 = c1.n, c2.n
    g = float(n1 @ n2)
    det = 1.0 - g * g
    if det < 1e-20:
        return []
    a = (c1.height - c2.height * g) / det
    b = (c2.height - c1.height * g) / det
    p0 = a * n1 + b * n2
    s = 1.0 - float(p0 @ p0)
    u = cross3(n1, n2)
    if s < -1e-13:
        return []
    if s <= 1e-13:
        return [p0 / np.linalg.norm(p0)]
    t = math.sqrt(s / det)
    return [_unit(p0 + t * u), _unit(p0 - t * u)]


def crossing_angle(a: CircularArc, b: CircularArc, p) -> float:
    """Angle in [0, pi/2] between the supporting circles at a common point."""
    ta, tb = a.tangent(p), b.tangent(p)
    c = abs(float(ta @ tb))
    return math.acos(min(1.0, c))


def _same_circle_common(a: CircularArc, b: CircularArc) -> list[SpherePoint]:
    center, u, w = a.circle.frame()

    def ang(p):
        q = _as_vec(p) - center
        return math.atan2(float(q @ w), float(q @ u)) % TWO_PI

    same_dir = float(a.circle.n @ b.circle.n) > 0

    def ccw_interval(arc: CircularArc, flip: bool) -> tuple[float, float]:
        if arc.full_circle:
            return (0.0, TWO_PI)
        o = -arc.orientation if flip else arc.orientation
        s, e = ang(arc.start), ang(arc.end)
        if o > 0:
            return (s, (e - s) % TWO_PI)
        return (e, (s - e) % TWO_PI)

    (s1, l1), (s2, l2) = ccw_interval(a, False), ccw_interval(b, not same_dir)
    slack = COINCIDE_TOL / a.circle.radius
    d12 = (s2 - s1) % TWO_PI
    d21 = (s1 - s2) % TWO_PI
    overlap = max(min(l1 - d12, l2) if d12 < l1 else 0.0,
                  min(l2 - d21, l1) if d21 < l2 else 0.0)
    if overlap > slack:
        raise OverlapError("arcs on the same circle overlap")
    out: list[SpherePoint] = []
    for p in (a.start, a.end):
        if b.contains(p) and not any(p.close_to(o) for o in out):
            out.append(p)
    for p in (b.start, b.end):
        if a.contains(p) and not any(p.close_to(o) for o in out):
            out.append(p)
    return out


def arc_pair_intersections(a: CircularArc, b: CircularArc) -> list[SpherePoint]:
    """All common points of two arcs (at most two)."""
    if a.circle.same_as(b.circle):
        return _same_circle_common(a, b)
    out: list[SpherePoint] = []
    for p in _circle_meet(a.circle, b.circle):
        if a.contains(p) and b.contains(p):
            sp = SpherePoint.from_vector(p)
            # snap to shared endpoints so callers can compare exactly
            for e in (a.start, a.end, b.start, b.end):
                if sp.close_to(e):
                    sp = e
                    break
            if not any(sp.close_to(o) for o in out):
                out.append(sp)
    return out


def turning_angle(incoming: CircularArc, outgoing: CircularArc) -> float:
    """Signed exterior angle at the junction ``incoming.end == outgoing.start``."""
    p = outgoing.start.vec
    t_in = incoming.tangent(p)
    t_out = outgoing.tangent(p)
    return math.atan2(float(cross3(t_in, t_out) @ p), float(t_in @ t_out))


def _gauss_bonnet(arcs: Sequence[CircularArc]) -> float:
    total = TWO_PI
    k = len(arcs)
    for i, arc in enumerate(arcs):
        total -= arc.curvature * arc.length
        if k > 1 or not arc.full_circle:
            total -= turning_angle(arc, arcs[(i + 1) % k])
    return total


def region_area(boundary: Sequence[CircularArc], check: bool = True) -> float:
    """Area of the region to the left of a closed, simple chain of circular arcs."""
    arcs = list(boundary)
    if not arcs:
        raise NotClosedError("empty boundary")
    k = len(arcs)
    for i, arc in enumerate(arcs):
        nxt = arcs[(i + 1) % k]
        if not arc.end.close_to(nxt.start):
            raise NotClosedError(f"arc {i} does not end where arc {(i + 1) % k} starts")
    if check:
        _check_simple(arcs)
        for i, arc in enumerate(arcs):
            if k > 1 or not arc.full_circle:
                if abs(abs(turning_angle(arc, arcs[(i + 1) % k])) - math.pi) < 1e-12:
                    raise SelfIntersectionError(f"cusp at the end of arc {i}")
    return _gauss_bonnet(arcs)


def _check_simple(arcs: Sequence[CircularArc]) -> None:
    k = len(arcs)
    for i in range(k):
        for j in range(i + 1, k):
            common = arc_pair_intersections(arcs[i], arcs[j])
            allowed = []
            if j == i + 1:
                allowed.append(arcs[j].start)
            if i == 0 and j == k - 1:
                allowed.append(arcs[0].start)
            for p in common:
                if not any(p.close_to(q) for q in allowed):
                    raise SelfIntersectionError(f"arcs {i} and {j} intersect away from a shared vertex")


def convex_side_test(arc: CircularArc, probe) -> bool:
    """True when ``probe`` lies on the side the arc's orientation encloses (its left)."""
    s = float(arc.circle.n @ _as_vec(probe)) - arc.circle.height
    if abs(s) <= COINCIDE_TOL:
        raise AmbiguousSideError("probe lies on the circle")
    return (s > 0) == (arc.orientation > 0)


def cap_area(height: float) -> float:
    """Area of the cap ``{x : n.x >= height}``."""
    return TWO_PI * (1.0 - height)
