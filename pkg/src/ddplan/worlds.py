"""Scenario generators: random obstacle worlds and a few fixed demo layouts."""

from __future__ import annotations

import math
from typing import List, Optional, Tuple

import numpy as np

from .errors import InvalidPolygonError
from .geometry import Polygon, convex_hull, inflate_polygon, polygon_distance
from .scenario import Scenario


def random_convex_polygon(rng: np.random.Generator, n_vertices: int, radius: float,
                          center=(0.0, 0.0)) -> Polygon:
    """Convex polygon with about ``n_vertices`` vertices inside a disk of ``radius``.

    Vertices are drawn on a slightly jittered circle; if the hull keeps
    dropping points the last hull found (at least a triangle) is returned.
    """
    fallback = None
    for _ in range(200):
        ang = np.sort(rng.uniform(0.0, 2 * math.pi, n_vertices))
        gaps = np.diff(np.concatenate([ang, [ang[0] + 2 * math.pi]]))
        if gaps.min() < 0.1 or gaps.max() > math.pi * 0.95:
            continue
        rad = radius * rng.uniform(0.85, 1.0, n_vertices)
        pts = [(center[0] + r * math.cos(a), center[1] + r * math.sin(a)) for a, r in zip(ang, rad)]
        try:
            poly = Polygon(tuple(convex_hull(pts)))
        except InvalidPolygonError:
            continue
        if poly.n == n_vertices:
            return poly
        fallback = poly
    if fallback is None:
        raise RuntimeError("could not draw a convex polygon")
    return fallback


def random_disjoint_pair(rng: np.random.Generator):
    """Two disjoint inflated obstacles with 3-8 vertices and inflation 0.1-1.0."""
    while True:
        r1, r2 = rng.uniform(0.1, 1.0, 2)
        p1 = random_convex_polygon(rng, int(rng.integers(3, 9)), rng.uniform(0.3, 2.0))
        size2 = rng.uniform(0.3, 2.0)
        theta = rng.uniform(0, 2 * math.pi)
        dist = rng.uniform(0.5, 6.0) + size2 + r1 + r2
        p2 = random_convex_polygon(rng, int(rng.integers(3, 9)), size2,
                                   (dist * math.cos(theta), dist * math.sin(theta)))
        if polygon_distance(p1, p2) > r1 + r2 + 1e-3:
            return inflate_polygon(p1, r1), inflate_polygon(p2, r2)


def random_world(rng: np.random.Generator, n_obstacles: int, extent: float = 10.0,
                 inflation: Optional[float] = None, size_range=(0.4, 1.5), u_max: float = 1.0,
                 c_d: float = 0.1, min_gap: float = 0.05) -> Scenario:
    """Non-overlapping random polygons in ``[0, extent]^2`` with free start and goal."""
    rho = float(inflation if inflation is not None else rng.uniform(0.1, 0.5))
    polys: List[Polygon] = []
    tries = 0
    while len(polys) < n_obstacles and tries < 2000:
        tries += 1
        size = rng.uniform(*size_range)
        c = rng.uniform(size + rho, extent - size - rho, 2)
        p = random_convex_polygon(rng, int(rng.integers(3, 9)), size, tuple(c))
        if all(polygon_distance(p, q) > 2 * rho + min_gap for q in polys):
            polys.append(p)
    inflated = [inflate_polygon(p, rho) for p in polys]

    def free_point():
        for _ in range(10000):
            q = tuple(rng.uniform(0.0, extent, 2))
            if all(o.clearance(q) > min_gap for o in inflated):
                return (float(q[0]), float(q[1]))
        raise RuntimeError("no free point")

    start = free_point()
    goal = free_point()
    while math.dist(start, goal) < 0.25 * extent:
        goal = free_point()
    return Scenario(tuple(polys), rho, start, goal, u_max, c_d)


def single_obstacle_world(rng: np.random.Generator, u_max: float = 1.0, c_d: float = 0.1) -> Scenario:
    """One obstacle between two terminals; its roadmap has at most ten nodes."""
    rho = float(rng.uniform(0.1, 0.5))
    poly = random_convex_polygon(rng, int(rng.integers(3, 9)), rng.uniform(0.5, 1.5), (0.0, 0.0))
    obs = inflate_polygon(poly, rho)
    while True:
        a = rng.uniform(0, 2 * math.pi)
        d1, d2 = rng.uniform(2.5, 5.0, 2)
        b = a + math.pi + rng.uniform(-0.6, 0.6)
        start = (d1 * math.cos(a), d1 * math.sin(a))
        goal = (d2 * math.cos(b), d2 * math.sin(b))
        if obs.clearance(start) > 0.05 and obs.clearance(goal) > 0.05:
            return Scenario((poly,), rho, start, goal, u_max, c_d)


def demo_scenario() -> Scenario:
    """Fixed three-obstacle world used by the README and the end-to-end tests."""
    polys = (
        Polygon(((2.0, -1.0), (4.0, -1.5), (4.5, 0.5), (2.5, 1.0))),
        Polygon(((5.5, 1.5), (7.0, 1.0), (7.5, 2.5), (6.0, 3.2))),
        Polygon(((6.0, -3.0), (8.0, -2.5), (7.0, -1.0))),
    )
    return Scenario(polys, 0.3, (0.0, 0.0), (10.0, 0.5), u_max=1.0, c_d=0.1)


def desk_scenarios() -> Tuple[Scenario, ...]:
    """Three desk-sized worlds (about a metre across) for the optimality study."""
    a = Scenario(
        (Polygon(((0.3, -0.1), (0.5, -0.1), (0.5, 0.1), (0.3, 0.1))),),
        0.05, (0.0, 0.0), (0.9, 0.05), u_max=2.0, c_d=0.5,
    )
    b = Scenario(
        (Polygon(((0.25, -0.05), (0.4, -0.12), (0.45, 0.08))),
         Polygon(((0.65, 0.05), (0.8, 0.0), (0.78, 0.2), (0.66, 0.18)))),
        0.04, (0.0, 0.0), (1.0, 0.1), u_max=1.5, c_d=0.8,
    )
    c = Scenario(
        (Polygon(((0.2, 0.1), (0.35, 0.05), (0.4, 0.2), (0.3, 0.3), (0.18, 0.25))),
         Polygon(((0.55, -0.2), (0.7, -0.2), (0.7, 0.0), (0.55, 0.0))),
         Polygon(((0.8, 0.15), (0.95, 0.2), (0.85, 0.35)))),
        0.03, (0.0, 0.0), (1.1, 0.2), u_max=3.0, c_d=1.0,
    )
    return a, b, c
