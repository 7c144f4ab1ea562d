"""Common tangent lines of inflated obstacles.

Tangency points are found with a damped Newton iteration on the cross-product
system

    g1 = (p2 - p1) x t1 = 0,    g2 = (p2 - p1) x t2 = 0,

where ``p_i``/``t_i`` are boundary point and unit tangent at the arc-length
parameters.  This has the same zero set as the slope-mismatch objective
``f = (m - m1)^2 + (m - m2)^2`` but no singularity for vertical lines.  The
slope objective, its gradient and Hessian are kept for certification.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import (OverlappingObstaclesError, PointInsideObstacleError, SolverFailureError,
                     VerticalSlopeError)
from .geometry import (Arc, InflatedObstacle, Point, Polygon, Segment, inflate_polygon, obstacles_overlap,
                       segment_polygon_distance)

log = logging.getLogger(__name__)

NEWTON_TOL = 1e-12
NEWTON_MAX_ITER = 50
DEDUP_TOL = 1e-7
SLOPE_EPS = 1e-12


@dataclass(frozen=True)
class TangencyPair:
    gamma1: float
    gamma2: float
    p1: Point
    p2: Point
    residual: float


@dataclass(frozen=True)
class Anchor:
    """A point on obstacle ``obstacle``'s boundary at arc length ``gamma``."""

    obstacle: int
    gamma: float


@dataclass(frozen=True)
class Terminal:
    name: str
    point: Point


Endpoint = Union[Anchor, Terminal]


@dataclass(frozen=True)
class TangentEdge:
    a: Endpoint
    b: Endpoint
    pa: Point
    pb: Point
    kind: str  # "external" | "internal" | "terminal"
    pair: Optional[TangencyPair] = None

    @property
    def length(self) -> float:
        return math.dist(self.pa, self.pb)

    @property
    def direction(self) -> Point:
        L = self.length
        return ((self.pb[0] - self.pa[0]) / L, (self.pb[1] - self.pa[1]) / L)


# ---------------------------------------------------------------------------
# slope-based objective (certification only)


def _slope_terms(obs1, obs2, gamma1, gamma2):
    x1, y1, tx1, ty1, k1 = obs1.frame(gamma1)
    x2, y2, tx2, ty2, k2 = obs2.frame(gamma2)
    dx, dy = x2 - x1, y2 - y1
    scale = max(1.0, math.hypot(dx, dy))
    if abs(dx) <= SLOPE_EPS * scale:
        raise VerticalSlopeError("chord is vertical", gamma1=gamma1, gamma2=gamma2)
    if abs(tx1) <= SLOPE_EPS or abs(tx2) <= SLOPE_EPS:
        raise VerticalSlopeError("boundary tangent is vertical", gamma1=gamma1, gamma2=gamma2)
    m = dy / dx
    m1 = ty1 / tx1
    m2 = ty2 / tx2
    # unit-speed curves: Y'' = k * (-y', x')
    x1pp, y1pp = -k1 * ty1, k1 * tx1
    x2pp, y2pp = -k2 * ty2, k2 * tx2
    m1p = k1 / tx1 ** 2
    m2p = k2 / tx2 ** 2
    m1pp = 2.0 * k1 * k1 * ty1 / tx1 ** 3
    m2pp = 2.0 * k2 * k2 * ty2 / tx2 ** 3
    mg1 = (m * tx1 - ty1) / dx
    mg2 = (ty2 - m * tx2) / dx
    mg11 = (2.0 * mg1 * tx1 + m * x1pp - y1pp) / dx
    mg22 = (y2pp - 2.0 * mg2 * tx2 - m * x2pp) / dx
    mg12 = (mg2 * tx1 - mg1 * tx2) / dx
    return dict(m=m, m1=m1, m2=m2, m1p=m1p, m2p=m2p, m1pp=m1pp, m2pp=m2pp,
                mg1=mg1, mg2=mg2, mg11=mg11, mg22=mg22, mg12=mg12)


def tangency_objective(obs1: InflatedObstacle, obs2: InflatedObstacle, gamma1: float, gamma2: float) -> float:
    s = _slope_terms(obs1, obs2, gamma1, gamma2)
    return (s["m"] - s["m1"]) ** 2 + (s["m"] - s["m2"]) ** 2


def tangency_gradient(obs1, obs2, gamma1, gamma2) -> Tuple[float, float]:
    s = _slope_terms(obs1, obs2, gamma1, gamma2)
    e1, e2 = s["m"] - s["m1"], s["m"] - s["m2"]
    g1 = 2.0 * (e1 * (s["mg1"] - s["m1p"]) + e2 * s["mg1"])
    g2 = 2.0 * (e1 * s["mg2"] + e2 * (s["mg2"] - s["m2p"]))
    return g1, g2


def tangency_hessian(obs1, obs2, gamma1, gamma2) -> np.ndarray:
    """Second partials of the slope objective, derived from its definition."""
    s = _slope_terms(obs1, obs2, gamma1, gamma2)
    m, mg1, mg2 = s["m"], s["mg1"], s["mg2"]
    e1, e2 = m - s["m1"], m - s["m2"]
    f11 = 2.0 * ((mg1 - s["m1p"]) ** 2 + e1 * (s["mg11"] - s["m1pp"]) + mg1 ** 2 + e2 * s["mg11"])
    f22 = 2.0 * (mg2 ** 2 + e1 * s["mg22"] + (mg2 - s["m2p"]) ** 2 + e2 * (s["mg22"] - s["m2pp"]))
    f12 = 2.0 * ((mg1 - s["m1p"]) * mg2 + mg1 * (mg2 - s["m2p"]) + (e1 + e2) * s["mg12"])
    return np.array([[f11, f12], [f12, f22]])


def hessian_det_formula(obs1, obs2, gamma1, gamma2) -> float:
    """Closed-form Hessian determinant ``4 m_g1^2 m_g2^2`` quoted for roots of f."""
    s = _slope_terms(obs1, obs2, gamma1, gamma2)
    return 4.0 * s["mg1"] ** 2 * s["mg2"] ** 2


def hessian_det_at_root(obs1, obs2, gamma1, gamma2) -> float:
    """Determinant of the Hessian at a root, 4 (A D - B C)^2 by Lagrange's identity."""
    s = _slope_terms(obs1, obs2, gamma1, gamma2)
    A, B = s["mg1"] - s["m1p"], s["mg1"]
    C, D = s["mg2"], s["mg2"] - s["m2p"]
    return 4.0 * (A * D - B * C) ** 2


def _quarter_turn(obs: InflatedObstacle) -> InflatedObstacle:
    # (x, y) -> (-y, x) is exact in floating point and keeps vertex order,
    # so arc-length parameters carry over unchanged
    return inflate_polygon(Polygon(tuple((-y, x) for x, y in obs.source.vertices)), obs.radius)


@dataclass(frozen=True)
class TangencyCertificate:
    f: float
    grad_norm: float
    det_formula: float
    det_hessian: float
    det_at_root: float
    rotated: bool


def certify_tangency(obs1: InflatedObstacle, obs2: InflatedObstacle, gamma1: float, gamma2: float) -> TangencyCertificate:
    """Slope-objective certificate at a tangency, in whichever axis frame keeps |m| <= 1.

    The slope objective is frame dependent and undefined for vertical lines;
    its zero set is not.  Steep chords are therefore evaluated after a
    quarter turn of both obstacles.
    """
    p1, p2 = obs1.point(gamma1), obs2.point(gamma2)
    rotated = abs(p2[1] - p1[1]) > abs(p2[0] - p1[0])
    if rotated:
        obs1, obs2 = _quarter_turn(obs1), _quarter_turn(obs2)
    g = tangency_gradient(obs1, obs2, gamma1, gamma2)
    return TangencyCertificate(
        f=tangency_objective(obs1, obs2, gamma1, gamma2),
        grad_norm=math.hypot(*g),
        det_formula=hessian_det_formula(obs1, obs2, gamma1, gamma2),
        det_hessian=float(np.linalg.det(tangency_hessian(obs1, obs2, gamma1, gamma2))),
        det_at_root=hessian_det_at_root(obs1, obs2, gamma1, gamma2),
        rotated=rotated,
    )


# ---------------------------------------------------------------------------
# cross-product residual system


def tangency_residual(obs1, obs2, gamma1, gamma2) -> Tuple[float, float]:
    x1, y1, tx1, ty1, _ = obs1.frame(gamma1)
    x2, y2, tx2, ty2, _ = obs2.frame(gamma2)
    dx, dy = x2 - x1, y2 - y1
    return dx * ty1 - dy * tx1, dx * ty2 - dy * tx2


def _newton(obs1, obs2, g1, g2):
    """Damped Newton on the cross-product system; returns (g1, g2, |r|inf)."""
    r1, r2 = tangency_residual(obs1, obs2, g1, g2)
    res = max(abs(r1), abs(r2))
    for _ in range(NEWTON_MAX_ITER):
        if res < NEWTON_TOL:
            break
        x1, y1, tx1, ty1, k1 = obs1.frame(g1)
        x2, y2, tx2, ty2, k2 = obs2.frame(g2)
        dx, dy = x2 - x1, y2 - y1
        # d/dgamma of t is k * (-ty, tx)
        j11 = k1 * (dx * tx1 + dy * ty1)
        j22 = k2 * (dx * tx2 + dy * ty2)
        j12 = tx2 * ty1 - ty2 * tx1
        j21 = j12
        det = j11 * j22 - j12 * j21
        if abs(det) > 1e-14 * (abs(j11 * j22) + abs(j12 * j21) + 1e-300):
            s1 = -(j22 * r1 - j12 * r2) / det
            s2 = -(-j21 * r1 + j11 * r2) / det
        else:
            sol = np.linalg.lstsq(np.array([[j11, j12], [j21, j22]]), -np.array([r1, r2]), rcond=None)[0]
            s1, s2 = float(sol[0]), float(sol[1])
        step = 1.0
        for _ in range(30):
            n1, n2 = obs1.wrap(g1 + step * s1), obs2.wrap(g2 + step * s2)
            q1, q2 = tangency_residual(obs1, obs2, n1, n2)
            nres = max(abs(q1), abs(q2))
            if nres < res:
                break
            step *= 0.5
        else:
            return g1, g2, res
        g1, g2, r1, r2, res = n1, n2, q1, q2, nres
    return g1, g2, res


def _snap_to_arc(obs: InflatedObstacle, gamma: float, other: Point) -> float:
    """Move a tangency lying inside a flat piece to the piece end nearer ``other``."""
    i = obs.piece_index(gamma)
    piece = obs.pieces[i]
    if isinstance(piece, Arc):
        return gamma
    end_gamma = obs.breakpoints[i + 1]
    d0 = math.dist(piece.start, other)
    d1 = math.dist(piece.end, other)
    return obs.wrap(piece.gamma0 if d0 <= d1 else end_gamma)


def _cyclic_gap(obs, a, b):
    d = abs(obs.wrap(a) - obs.wrap(b))
    return min(d, obs.perimeter - d)


def _classify(obs1, obs2, p1, p2) -> str:
    dx, dy = p2[0] - p1[0], p2[1] - p1[1]
    c1, c2 = obs1.source.centroid, obs2.source.centroid
    s1 = dx * (c1[1] - p1[1]) - dy * (c1[0] - p1[0])
    s2 = dx * (c2[1] - p1[1]) - dy * (c2[0] - p1[0])
    return "external" if (s1 > 0) == (s2 > 0) else "internal"


def _circle_seeds(obs1, obs2):
    """Tangency parameters of the common tangents of every vertex-circle pair."""
    for a1 in obs1.arcs:
        for a2 in obs2.arcs:
            (cx1, cy1), (cx2, cy2) = a1.center, a2.center
            r1, r2 = a1.radius, a2.radius
            dx, dy = cx2 - cx1, cy2 - cy1
            d = math.hypot(dx, dy)
            base = math.atan2(dy, dx)
            for sgn in (1.0, -1.0):  # external: sgn=+1, internal: -1
                c = (r1 - sgn * r2) / d
                if abs(c) > 1.0:
                    continue
                for side in (1.0, -1.0):
                    phi1 = base + side * math.acos(c)
                    phi2 = phi1 if sgn > 0 else phi1 + math.pi
                    yield (_angle_to_gamma(a1, phi1), _angle_to_gamma(a2, phi2))


def _angle_to_gamma(arc: Arc, phi: float) -> float:
    rel = math.fmod(phi - arc.start_angle, 2 * math.pi)
    if rel < 0:
        rel += 2 * math.pi
    span = arc.end_angle - arc.start_angle
    if rel > span:
        # outside this arc: clamp to the nearer arc end
        rel = span if rel - span < 2 * math.pi - rel else 0.0
    return arc.gamma0 + arc.radius * rel


def common_tangents(obs1: InflatedObstacle, obs2: InflatedObstacle, ids: Tuple[int, int] = (0, 1)) -> List[TangentEdge]:
    """All four common tangents of two disjoint inflated obstacles.

    Newton is seeded at the midpoints of every arc pair.  If that schedule
    leaves some tangent undiscovered, the tangency parameters of the
    vertex-circle common tangents are used as a second seed round.
    """
    if obstacles_overlap(obs1, obs2):
        raise OverlappingObstaclesError("inflated obstacles intersect", ids=ids)
    seeds = [(a1.gamma0 + 0.5 * a1.length, a2.gamma0 + 0.5 * a2.length)
             for a1 in obs1.arcs for a2 in obs2.arcs]
    found: List[TangencyPair] = []
    diagnostics = []

    def run(seed_list):
        for s1, s2 in seed_list:
            g1, g2, res = _newton(obs1, obs2, s1, s2)
            if res >= NEWTON_TOL:
                diagnostics.append((s1, s2, res))
                continue
            p2 = obs2.point(g2)
            g1 = _snap_to_arc(obs1, g1, p2)
            p1 = obs1.point(g1)
            g2 = _snap_to_arc(obs2, g2, p1)
            p2 = obs2.point(g2)
            if any(_cyclic_gap(obs1, g1, f.gamma1) < DEDUP_TOL and _cyclic_gap(obs2, g2, f.gamma2) < DEDUP_TOL
                   for f in found):
                continue
            r = tangency_residual(obs1, obs2, g1, g2)
            found.append(TangencyPair(g1, g2, p1, p2, max(abs(r[0]), abs(r[1]))))
            if len(found) == 4:
                return

    run(seeds)
    if len(found) < 4:
        log.debug("arc-midpoint seeds found %d tangents; trying circle seeds", len(found))
        run(_circle_seeds(obs1, obs2))
    if len(found) != 4:
        raise SolverFailureError(
            f"found {len(found)} common tangents, expected 4",
            ids=ids, found=found, unconverged=diagnostics[:10],
        )
    found.sort(key=lambda f: (f.gamma1, f.gamma2))
    return [TangentEdge(Anchor(ids[0], f.gamma1), Anchor(ids[1], f.gamma2), f.p1, f.p2,
                        _classify(obs1, obs2, f.p1, f.p2), f) for f in found]


def point_tangents(point, obs: InflatedObstacle, obstacle_id: int = 0, name: str = "start") -> List[TangentEdge]:
    """The two tangent segments from an external point to an obstacle boundary."""
    q = (float(point[0]), float(point[1]))
    if obs.contains(q):
        raise PointInsideObstacleError(f"point {q} is inside or on obstacle {obstacle_id}", obstacle=obstacle_id)
    cands = []
    for arc in obs.arcs:
        cx, cy = arc.center
        dx, dy = q[0] - cx, q[1] - cy
        d = math.hypot(dx, dy)
        alpha = math.acos(min(1.0, arc.radius / d))
        base = math.atan2(dy, dx)
        for phi in (base + alpha, base - alpha):
            rel = math.fmod(phi - arc.start_angle, 2 * math.pi)
            if rel < 0:
                rel += 2 * math.pi
            span = arc.end_angle - arc.start_angle
            if rel > span + 1e-12 and rel < 2 * math.pi - 1e-12:
                continue
            if rel > span:
                rel = span if rel < span + 1.0 else 0.0
            g = obs.wrap(arc.gamma0 + arc.radius * rel)
            cands.append((g, obs.point(g)))
    # keep one tangency per direction from q (the nearer one when collinear with an edge)
    chosen = []
    for g, p in sorted(cands, key=lambda c: math.dist(q, c[1])):
        ux, uy = p[0] - q[0], p[1] - q[1]
        L = math.hypot(ux, uy)
        dup = False
        for _, p2 in chosen:
            vx, vy = p2[0] - q[0], p2[1] - q[1]
            M = math.hypot(vx, vy)
            if abs(ux * vy - uy * vx) < 1e-9 * L * M and ux * vx + uy * vy > 0:
                dup = True
                break
        if not dup:
            chosen.append((g, p))
    if len(chosen) != 2:
        raise SolverFailureError(f"found {len(chosen)} tangents from point, expected 2", point=q)
    chosen.sort(key=lambda c: c[0])
    t = Terminal(name, q)
    return [TangentEdge(t, Anchor(obstacle_id, g), q, p, "terminal") for g, p in chosen]


def segment_collides(segment, obstacles: Sequence[InflatedObstacle], tol: float = 1e-9) -> bool:
    """True iff the open segment enters the interior of some inflated obstacle.

    Touching a boundary tangentially is not a collision.
    """
    a, b = segment
    xmin, xmax = min(a[0], b[0]), max(a[0], b[0])
    ymin, ymax = min(a[1], b[1]), max(a[1], b[1])
    for obs in obstacles:
        v = obs.source.vertices
        r = obs.radius
        if (max(p[0] for p in v) + r < xmin or min(p[0] for p in v) - r > xmax
                or max(p[1] for p in v) + r < ymin or min(p[1] for p in v) - r > ymax):
            continue
        if segment_polygon_distance(a, b, obs.source) < r - tol:
            return True
    return False
