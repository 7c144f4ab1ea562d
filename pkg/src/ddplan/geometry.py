"""Convex polygon obstacles and their rounded (inflated) boundaries.

An inflated obstacle is the Minkowski sum of a convex polygon with a disk.
Its boundary is a closed C1 curve made of one circular arc per polygon vertex
and one offset copy of each polygon edge.  The boundary is parameterized by
arc length ``gamma`` starting at the beginning of the arc around the first
vertex and running counterclockwise.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Sequence, Tuple, Union

import numpy as np

from .errors import InvalidPolygonError

Point = Tuple[float, float]

TWO_PI = 2.0 * math.pi
COLLINEAR_TOL = 1e-9


def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


@dataclass(frozen=True)
class Polygon:
    """Strictly convex polygon with counterclockwise vertices.

    Clockwise input is reversed and collinear vertices are merged, so the
    stored vertex list may differ from what was passed in.
    """

    vertices: Tuple[Point, ...]

    def __post_init__(self):
        object.__setattr__(self, "vertices", _normalize_vertices(self.vertices))

    @property
    def n(self) -> int:
        return len(self.vertices)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    @property
    def perimeter(self) -> float:
        v = self.vertices
        return sum(math.dist(v[i], v[(i + 1) % len(v)]) for i in range(len(v)))

    @property
    def area(self) -> float:
        return 0.5 * _signed_area2(self.vertices)

    @property
    def centroid(self) -> Point:
        v = self.vertices
        a2 = _signed_area2(v)
        cx = cy = 0.0
        for i in range(len(v)):
            x0, y0 = v[i]
            x1, y1 = v[(i + 1) % len(v)]
            w = x0 * y1 - x1 * y0
            cx += (x0 + x1) * w
            cy += (y0 + y1) * w
        return (cx / (3.0 * a2), cy / (3.0 * a2))

    def translated(self, dx: float, dy: float) -> "Polygon":
        return Polygon(tuple((x + dx, y + dy) for x, y in self.vertices))

    def scaled(self, factor: float, origin: Point = (0.0, 0.0)) -> "Polygon":
        ox, oy = origin
        return Polygon(tuple((ox + factor * (x - ox), oy + factor * (y - oy)) for x, y in self.vertices))

    def rotated(self, angle: float, origin: Point = (0.0, 0.0)) -> "Polygon":
        c, s = math.cos(angle), math.sin(angle)
        ox, oy = origin
        return Polygon(tuple(
            (ox + c * (x - ox) - s * (y - oy), oy + s * (x - ox) + c * (y - oy)) for x, y in self.vertices
        ))


def _signed_area2(v) -> float:
    total = 0.0
    for i in range(len(v)):
        x0, y0 = v[i]
        x1, y1 = v[(i + 1) % len(v)]
        total += x0 * y1 - x1 * y0
    return total


def _normalize_vertices(raw) -> Tuple[Point, ...]:
    try:
        pts = [(float(p[0]), float(p[1])) for p in raw]
    except (TypeError, IndexError, ValueError) as exc:
        raise InvalidPolygonError(f"vertices must be 2D points: {exc}") from None
    if len(pts) < 3:
        raise InvalidPolygonError(f"polygon needs at least 3 vertices, got {len(pts)}")
    if not all(math.isfinite(c) for p in pts for c in p):
        raise InvalidPolygonError("polygon vertices must be finite")
    if len(set(pts)) != len(pts):
        raise InvalidPolygonError("polygon has repeated vertices")
    if _signed_area2(pts) < 0:
        pts.reverse()

    # merge collinear vertices (zero-length arcs would break piece alternation)
    changed = True
    while changed and len(pts) >= 3:
        changed = False
        for i in range(len(pts)):
            a, b, c = pts[i - 1], pts[i], pts[(i + 1) % len(pts)]
            ux, uy = b[0] - a[0], b[1] - a[1]
            wx, wy = c[0] - b[0], c[1] - b[1]
            lu, lw = math.hypot(ux, uy), math.hypot(wx, wy)
            cr = _cross(ux, uy, wx, wy) / (lu * lw)
            if abs(cr) < COLLINEAR_TOL and ux * wx + uy * wy > 0:
                del pts[i]
                changed = True
                break
    if len(pts) < 3:
        raise InvalidPolygonError("polygon is degenerate (all vertices collinear)")

    for i in range(len(pts)):
        a, b, c = pts[i - 1], pts[i], pts[(i + 1) % len(pts)]
        ux, uy = b[0] - a[0], b[1] - a[1]
        wx, wy = c[0] - b[0], c[1] - b[1]
        if _cross(ux, uy, wx, wy) <= 0:
            raise InvalidPolygonError(f"polygon is not strictly convex at vertex {i}")
    # a strictly left-turning closed chain can still wind more than once
    turning = 0.0
    for i in range(len(pts)):
        a, b, c = pts[i - 1], pts[i], pts[(i + 1) % len(pts)]
        turning += math.atan2(_cross(b[0] - a[0], b[1] - a[1], c[0] - b[0], c[1] - b[1]),
                              (b[0] - a[0]) * (c[0] - b[0]) + (b[1] - a[1]) * (c[1] - b[1]))
    if abs(turning - TWO_PI) > 1e-6:
        raise InvalidPolygonError("polygon is self-intersecting")
    return tuple(pts)


@dataclass(frozen=True)
class Arc:
    """Counterclockwise arc of a vertex disk; angles in radians, end > start."""

    center: Point
    radius: float
    start_angle: float
    end_angle: float
    gamma0: float

    @property
    def length(self) -> float:
        return self.radius * (self.end_angle - self.start_angle)

    def frame(self, s: float):
        psi = self.start_angle + s / self.radius
        c, sn = math.cos(psi), math.sin(psi)
        cx, cy = self.center
        return cx + self.radius * c, cy + self.radius * sn, -sn, c, 1.0 / self.radius


@dataclass(frozen=True)
class Segment:
    """Offset copy of a polygon edge."""

    start: Point
    end: Point
    gamma0: float

    @property
    def length(self) -> float:
        return math.dist(self.start, self.end)

    def frame(self, s: float):
        (x0, y0), (x1, y1) = self.start, self.end
        length = self.length
        tx, ty = (x1 - x0) / length, (y1 - y0) / length
        return x0 + s * tx, y0 + s * ty, tx, ty, 0.0


BoundaryPiece = Union[Arc, Segment]


@dataclass(frozen=True)
class InflatedObstacle:
    source: Polygon
    radius: float
    pieces: Tuple[BoundaryPiece, ...]
    breakpoints: Tuple[float, ...]
    junction_angles: Tuple[float, ...]
    _starts: Tuple[float, ...] = field(repr=False, compare=False, default=())

    @property
    def perimeter(self) -> float:
        return self.breakpoints[-1]

    @property
    def arcs(self) -> Tuple[Arc, ...]:
        return self.pieces[0::2]

    @property
    def segments(self) -> Tuple[Segment, ...]:
        return self.pieces[1::2]

    def wrap(self, gamma: float) -> float:
        P = self.breakpoints[-1]
        if 0.0 <= gamma < P:
            return gamma
        g = math.fmod(gamma, P)
        if g < 0:
            g += P
        if g >= P:
            g = 0.0
        return g

    def piece_index(self, gamma: float) -> int:
        # junctions belong to the following piece (half-open intervals)
        return bisect_right(self._starts, self.wrap(gamma)) - 1

    def frame(self, gamma: float):
        """Return ``(x, y, tx, ty, curvature)`` at boundary parameter gamma."""
        g = self.wrap(gamma)
        i = bisect_right(self._starts, g) - 1
        piece = self.pieces[i]
        return piece.frame(g - piece.gamma0)

    def point(self, gamma: float) -> Point:
        x, y, _, _, _ = self.frame(gamma)
        return (x, y)

    def tangent(self, gamma: float) -> Point:
        _, _, tx, ty, _ = self.frame(gamma)
        return (tx, ty)

    def clearance(self, p) -> float:
        """Signed distance from ``p`` to the inflated boundary (negative inside)."""
        d = point_polygon_distance(p, self.source)
        if d == 0.0:
            v = self.source.vertices
            d = -min(point_segment_distance(p, v[i], v[(i + 1) % len(v)]) for i in range(len(v)))
        return d - self.radius

    def contains(self, p, tol: float = 1e-9) -> bool:
        """Closed containment test; boundary points count as inside."""
        return self.clearance(p) <= tol

    def sample(self, n: int) -> np.ndarray:
        gs = np.linspace(0.0, self.perimeter, n, endpoint=False)
        return np.array([self.point(g) for g in gs])


def inflate_polygon(polygon: Polygon, radius: float) -> InflatedObstacle:
    """Minkowski sum of ``polygon`` with a disk of ``radius`` as arcs and segments."""
    if not isinstance(polygon, Polygon):
        polygon = Polygon(tuple(polygon))
    if not (radius > 0 and math.isfinite(radius)):
        raise InvalidPolygonError(f"inflation radius must be positive, got {radius}")
    v = polygon.vertices
    n = len(v)
    normals = []
    for i in range(n):
        (x0, y0), (x1, y1) = v[i], v[(i + 1) % n]
        length = math.hypot(x1 - x0, y1 - y0)
        normals.append(((y1 - y0) / length, -(x1 - x0) / length))

    pieces = []
    breaks = [0.0]
    angles = []
    gamma = 0.0
    for i in range(n):
        nin, nout = normals[i - 1], normals[i]
        a0 = math.atan2(nin[1], nin[0])
        a1 = math.atan2(nout[1], nout[0])
        while a1 <= a0:
            a1 += TWO_PI
        arc = Arc(v[i], radius, a0, a1, gamma)
        pieces.append(arc)
        gamma += arc.length
        breaks.append(gamma)
        angles.extend([a0, a1])

        nx, ny = nout
        j = (i + 1) % n
        seg = Segment((v[i][0] + radius * nx, v[i][1] + radius * ny),
                      (v[j][0] + radius * nx, v[j][1] + radius * ny), gamma)
        pieces.append(seg)
        gamma += seg.length
        breaks.append(gamma)
    starts = tuple(p.gamma0 for p in pieces)
    return InflatedObstacle(polygon, float(radius), tuple(pieces), tuple(breaks), tuple(angles), starts)


def boundary_point(obstacle: InflatedObstacle, gamma: float) -> Point:
    return obstacle.point(gamma)


def boundary_tangent(obstacle: InflatedObstacle, gamma: float) -> Point:
    return obstacle.tangent(gamma)


def min_inradius(obstacle: InflatedObstacle) -> float:
    """Smallest distance from the source polygon centroid to the inflated boundary.

    For a convex polygon containing its centroid this is the distance to the
    nearest edge line plus the inflation radius.
    """
    cx, cy = obstacle.source.centroid
    v = obstacle.source.vertices
    best = math.inf
    for i in range(len(v)):
        (x0, y0), (x1, y1) = v[i], v[(i + 1) % len(v)]
        length = math.hypot(x1 - x0, y1 - y0)
        d = _cross(x1 - x0, y1 - y0, cx - x0, cy - y0) / length
        best = min(best, d)
    return best + obstacle.radius


# ---------------------------------------------------------------------------
# distance helpers


def point_segment_distance(p, a, b) -> float:
    px, py = p
    ax, ay = a
    bx, by = b
    dx, dy = bx - ax, by - ay
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / L2
    t = min(1.0, max(0.0, t))
    return math.hypot(px - ax - t * dx, py - ay - t * dy)


def point_in_convex_polygon(p, polygon: Polygon) -> bool:
    px, py = p
    v = polygon.vertices
    for i in range(len(v)):
        (x0, y0), (x1, y1) = v[i], v[(i + 1) % len(v)]
        if _cross(x1 - x0, y1 - y0, px - x0, py - y0) < 0:
            return False
    return True


def point_polygon_distance(p, polygon: Polygon) -> float:
    """Euclidean distance from ``p`` to the filled polygon (0 inside)."""
    if point_in_convex_polygon(p, polygon):
        return 0.0
    v = polygon.vertices
    return min(point_segment_distance(p, v[i], v[(i + 1) % len(v)]) for i in range(len(v)))


def segments_intersect(a, b, c, d) -> bool:
    """Closed segment intersection test for ab and cd."""
    def orient(p, q, r):
        return _cross(q[0] - p[0], q[1] - p[1], r[0] - p[0], r[1] - p[1])

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if ((o1 > 0) != (o2 > 0)) and ((o3 > 0) != (o4 > 0)) and o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0:
        return True
    return min(point_segment_distance(c, a, b), point_segment_distance(d, a, b),
               point_segment_distance(a, c, d), point_segment_distance(b, c, d)) == 0.0


def segment_segment_distance(a, b, c, d) -> float:
    if segments_intersect(a, b, c, d):
        return 0.0
    return min(point_segment_distance(c, a, b), point_segment_distance(d, a, b),
               point_segment_distance(a, c, d), point_segment_distance(b, c, d))


def segment_polygon_distance(a, b, polygon: Polygon) -> float:
    if point_in_convex_polygon(a, polygon) or point_in_convex_polygon(b, polygon):
        return 0.0
    v = polygon.vertices
    return min(segment_segment_distance(a, b, v[i], v[(i + 1) % len(v)]) for i in range(len(v)))


def polygon_distance(p: Polygon, q: Polygon) -> float:
    if point_in_convex_polygon(p.vertices[0], q) or point_in_convex_polygon(q.vertices[0], p):
        return 0.0
    pv, qv = p.vertices, q.vertices
    best = math.inf
    for i in range(len(pv)):
        a, b = pv[i], pv[(i + 1) % len(pv)]
        for j in range(len(qv)):
            best = min(best, segment_segment_distance(a, b, qv[j], qv[(j + 1) % len(qv)]))
            if best == 0.0:
                return 0.0
    return best


def obstacles_overlap(o1: InflatedObstacle, o2: InflatedObstacle, tol: float = 1e-9) -> bool:
    """True if the closed inflated regions touch or intersect."""
    return polygon_distance(o1.source, o2.source) <= o1.radius + o2.radius + tol


def regular_polygon(n: int, circumradius: float = 1.0, center: Point = (0.0, 0.0), phase: float = 0.0) -> Polygon:
    cx, cy = center
    return Polygon(tuple(
        (cx + circumradius * math.cos(phase + TWO_PI * k / n), cy + circumradius * math.sin(phase + TWO_PI * k / n))
        for k in range(n)
    ))


def convex_hull(points: Sequence[Point]):
    """Andrew's monotone chain; returns hull vertices counterclockwise."""
    pts = sorted(set((float(x), float(y)) for x, y in points))
    if len(pts) <= 2:
        return pts

    def half(seq):
        out = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-1][0] - out[-2][0], out[-1][1] - out[-2][1],
                                           p[0] - out[-2][0], p[1] - out[-2][1]) <= 0:
                out.pop()
            out.append(p)
        return out

    lower = half(pts)
    upper = half(reversed(pts))
    return lower[:-1] + upper[:-1]
