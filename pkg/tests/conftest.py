import math

import numpy as np
import pytest

from ddplan.geometry import inflate_polygon, regular_polygon
from ddplan.roadmap import attach_terminals, build_roadmap, ellipse_filter, shortest_path
from ddplan.worlds import random_world

_CRITERIA = []


def record_criterion(number: int, passed: bool, detail: str) -> None:
    line = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
    _CRITERIA.append((number, line))
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_CRITERIA):
        terminalreporter.write_line(line)


SQ3 = math.sqrt(3.0) / 2.0
# analytic tangency pairs of unit circles centred (0,0) and (4,0)
CIRCLE_TANGENCIES = [((0.0, 1.0), (4.0, 1.0)), ((0.0, -1.0), (4.0, -1.0)),
                     ((0.5, SQ3), (3.5, -SQ3)), ((0.5, -SQ3), (3.5, SQ3))]


def circle_pair(r_p: float):
    """Regular 64-gons of circumradius ``r_p`` inflated to outer radius 1 at (0,0) and (4,0)."""
    a = inflate_polygon(regular_polygon(64, r_p, (0.0, 0.0)), 1.0 - r_p)
    b = inflate_polygon(regular_polygon(64, r_p, (4.0, 0.0)), 1.0 - r_p)
    return a, b


def polygon_tangency_bound(r_p: float) -> float:
    """How far a tangency on an inflated 64-gon can sit from the true circle's.

    The tangency is the supporting vertex pushed out along the line normal; that
    vertex is at most pi/64 of polar angle from the normal, so it lies within
    a chord 2 r_p sin(pi/128) of the circle point.
    """
    return 2.0 * r_p * math.sin(math.pi / 128)


def tangency_error(edges) -> float:
    worst = 0.0
    for e in edges:
        worst = max(worst, min(max(math.dist(e.pa, p), math.dist(e.pb, q)) for p, q in CIRCLE_TANGENCIES))
    return worst


@pytest.fixture(scope="session")
def random_scenarios():
    """100 random worlds with 1-8 obstacles: filtered and unfiltered searches."""
    rng = np.random.default_rng(20240611)
    out = []
    for _ in range(100):
        sc = random_world(rng, int(rng.integers(1, 9)))
        obs = sc.inflated()
        full = attach_terminals(build_roadmap(obs), sc.start, sc.goal)
        filt = ellipse_filter(full, obs, sc.start, sc.goal)
        out.append(dict(
            scenario=sc, obstacles=obs, full=full, filtered=filt,
            path_full=shortest_path(full, sc.start, sc.goal),
            path_filtered=shortest_path(filt, sc.start, sc.goal),
            straight=math.dist(sc.start, sc.goal),
        ))
    return out
