import math

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from ddplan.geometry import inflate_polygon, min_inradius, regular_polygon
from ddplan.roadmap import attach_terminals, build_roadmap, shortest_path
from ddplan.tangents import common_tangents
from ddplan.velocity import (ArcConstants, DynParams, arc_min_time, arc_reach_speed, plan_straight,
                             straight_reach_speed)
from ddplan.worlds import random_disjoint_pair

fast = settings(max_examples=150, deadline=None, suppress_health_check=[HealthCheck.too_slow])

params_st = st.builds(DynParams, st.floats(0.2, 5.0), st.floats(0.01, 2.0))


@fast
@given(params_st, st.floats(0.01, 20.0), st.floats(0.0, 0.95))
def test_straight_brake_inverts_decel(p, L, frac):
    v = frac * p.v_bar
    up = straight_reach_speed(L, v, "decel", p)
    if up < p.v_limit:
        assert straight_reach_speed(L, up, "brake", p) ** 2 == pytest.approx(v * v, rel=1e-9, abs=1e-9 * p.v_bar ** 2)


@fast
@given(params_st, st.floats(0.05, 10.0), st.floats(0.01, 10.0), st.floats(0.0, 0.95))
def test_arc_brake_inverts_decel(p, rho, L, frac):
    k = ArcConstants.build(rho, p)
    v = frac * k.v_c_max
    up = arc_reach_speed(L, v, "decel", k)
    if up < k.v_c_max * (1 - 1e-6):
        assert arc_reach_speed(L, up, "brake", k) ** 2 == pytest.approx(v * v, rel=1e-8, abs=1e-9 * k.v_c_max ** 2)


@fast
@given(params_st, st.floats(0.01, 20.0), st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_straight_time_bounds(p, L, a, b):
    # any feasible pair of terminal speeds: no faster than cruising at v_bar, phases fill the segment
    v0 = a * straight_reach_speed(L, 0.0, "accel", p)
    vf = b * straight_reach_speed(L, v0, "accel", p)
    if vf >= straight_reach_speed(L, v0, "brake", p):
        plan = plan_straight(L, v0, vf, p)
        assert plan.duration >= L / p.v_bar
        assert plan.v_sw >= max(v0, vf) - 1e-12
        assert plan.d_acc + plan.d_dec == pytest.approx(L, rel=1e-12)


@fast
@given(params_st, st.floats(0.05, 10.0), st.floats(0.01, 10.0))
def test_arc_time_at_least_cap_cruise(p, rho, L):
    k = ArcConstants.build(rho, p)
    t = arc_min_time(L, 0.0, 0.0, k, p)
    assert t >= L / k.v_c_max
    assert math.isfinite(t)


@fast
@given(st.integers(3, 12), st.floats(0.1, 3.0), st.floats(0.01, 2.0), st.floats(0.0, 6.3))
def test_inflated_perimeter_and_inradius(n, R, r, phase):
    poly = regular_polygon(n, R, (0.0, 0.0), phase)
    o = inflate_polygon(poly, r)
    assert o.perimeter == pytest.approx(2 * n * R * math.sin(math.pi / n) + 2 * math.pi * r, rel=1e-12)
    assert min_inradius(o) == pytest.approx(R * math.cos(math.pi / n) + r, rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_disjoint_pairs_have_four_tangents(seed):
    a, b = random_disjoint_pair(np.random.default_rng(seed))
    edges = common_tangents(a, b)
    assert len(edges) == 4
    assert sorted(e.kind for e in edges) == ["external", "external", "internal", "internal"]


@settings(max_examples=40, deadline=None)
@given(st.floats(-8, 8), st.floats(-8, 8), st.floats(-8, 8), st.floats(-8, 8))
def test_path_length_between_straight_line_and_detour(x0, y0, x1, y1):
    obs = [inflate_polygon(regular_polygon(5, 1.0, (0.0, 0.0)), 0.3)]
    start, goal = (x0, y0), (x1, y1)
    if any(o.clearance(q) <= 1e-6 for o in obs for q in (start, goal)):
        return
    path = shortest_path(attach_terminals(build_roadmap(obs), start, goal), start, goal)
    d = math.dist(start, goal)
    assert path.total_length >= d - 1e-12
    # going around the obstacle costs at most its perimeter
    assert path.total_length <= d + obs[0].perimeter + 1e-9
