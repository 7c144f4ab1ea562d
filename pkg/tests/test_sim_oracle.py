import math

import numpy as np
import pytest

from ddplan.errors import ControlBoundViolation
from ddplan.geometry import Polygon, inflate_polygon
from ddplan.roadmap import PlannedPath, Straight
from ddplan.scenario import Scenario, plan_scenario
from ddplan.sim_oracle import SimState, audit_trajectory, bang_bang_time, integrate_2d, integrate_path
from ddplan.velocity import DynParams, arc_speed_cap, sample_trajectory, solve_terminal_speeds
from ddplan.worlds import demo_scenario

P = DynParams(1.0, 0.1)


def thrust_x(t, r, v):
    return (1.0, 0.0)


def test_zero_control_at_rest_stays_put():
    tr = integrate_2d(lambda t, r, v: (0.0, 0.0), SimState(0.0, (1.0, 2.0), (0.0, 0.0)), 0.01, 1.0, P)
    assert np.all(tr.r == np.array([1.0, 2.0]))
    assert np.all(tr.v == 0.0)


def test_thrust_from_rest_matches_tanh():
    tr = integrate_2d(thrust_x, SimState(0.0, (0.0, 0.0), (0.0, 0.0)), 1e-4, 3.0, P, record_every=1000)
    w = P.omega
    assert np.allclose(tr.v[:, 0], P.v_bar * np.tanh(w * tr.t), atol=1e-8)
    assert np.allclose(tr.r[:, 0], np.log(np.cosh(w * tr.t)) / P.c_d, atol=1e-8)


def test_rk4_is_fourth_order():
    exact = math.log(math.cosh(P.omega * 2.0)) / P.c_d
    errs = []
    for dt in (1e-1, 5e-2, 2.5e-2):
        tr = integrate_2d(thrust_x, SimState(0.0, (0.0, 0.0), (0.0, 0.0)), dt, 2.0, P)
        errs.append(abs(tr.final.r[0] - exact))
    slopes = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(slopes - 4.0) < 0.2)


def test_drag_only_decays_monotonically():
    tr = integrate_2d(lambda t, r, v: (0.0, 0.0), SimState(0.0, (0.0, 0.0), (2.0, 1.0)), 1e-3, 5.0, P)
    speed = np.hypot(tr.v[:, 0], tr.v[:, 1])
    assert np.all(np.diff(speed) < 0)
    # heading is preserved by a drag parallel to the velocity
    assert np.allclose(tr.v[:, 1] / tr.v[:, 0], 0.5)
    # |v|' = -C |v|^2 gives 1/|v| = 1/|v0| + C t
    assert speed[-1] == pytest.approx(1.0 / (1.0 / math.hypot(2, 1) + P.c_d * 5.0), rel=1e-10)


def test_speed_approaches_terminal_speed():
    tr = integrate_2d(thrust_x, SimState(0.0, (0.0, 0.0), (0.0, 0.0)), 1e-2, 30.0, P)
    assert np.all(tr.v[:, 0] < P.v_bar)
    assert tr.v[-1, 0] == pytest.approx(P.v_bar, rel=1e-6)


def test_control_violation_raises():
    with pytest.raises(ControlBoundViolation):
        integrate_2d(lambda t, r, v: (1.0, 1e-3), SimState(0.0, (0.0, 0.0), (0.0, 0.0)), 1e-2, 1.0, P)


def test_integrate_path_zero_length():
    res = integrate_path("straight", "accel", [0.3], 1.0, 0.1, stop_distance=[0.0])
    assert res.time[0] == 0.0 and res.speed[0] == 0.3


def test_integrate_path_time_matches_closed_form():
    targets = np.array([0.5, 1.5, 2.5, 3.0])
    res = integrate_path("straight", "accel", np.zeros(4), 1.0, 0.1, stop_speed=targets, dt=1e-3)
    assert np.allclose(res.time, np.arctanh(targets / P.v_bar) / P.omega, rtol=1e-6)
    assert np.allclose(res.distance, -np.log1p(-(targets / P.v_bar) ** 2) / (2 * P.c_d), rtol=1e-6)


def test_arc_at_cap_stays_pinned():
    cap = arc_speed_cap(2.0, P)
    res = integrate_path("arc", "accel", [cap], 1.0, 0.1, 2.0, stop_distance=[3.0], dt=1e-3, keep_table=True)
    speeds = np.array([row[2] for row in res.table[0]])
    assert np.allclose(speeds, cap, rtol=1e-12)
    assert res.time[0] == pytest.approx(3.0 / cap, rel=1e-10)


def test_bang_bang_mismatch_vanishes_at_the_true_switch():
    v_sw = math.sqrt(10 * math.tanh(1.0))
    t, mis = bang_bang_time("straight", 10.0, 0.0, 0.0, v_sw, 1.0, 0.1, dt=1e-3)
    assert mis[0] < 1e-9
    _, mis_off = bang_bang_time("straight", 10.0, 0.0, 0.0, v_sw * 0.95, 1.0, 0.1, dt=1e-3)
    assert mis_off[0] > 1e-3


def test_audit_flags_path_through_obstacle():
    box = inflate_polygon(Polygon(((2.0, -0.5), (3.0, -0.5), (3.0, 0.5), (2.0, 0.5))), 0.2)
    path = PlannedPath((Straight((0.0, 0.0), (5.0, 0.0)),), (0.0, 0.0), (5.0, 0.0))
    prof = solve_terminal_speeds(path, 0.0, 0.0, P)
    tr = sample_trajectory(path, prof, P, dt=1e-2)
    report = audit_trajectory(tr, [box], P, path, (5.0, 0.0), 0.0)
    assert not report.checks["clearance"]
    assert not report.passed
    # the deepest sample sits within half a sample spacing of the box centre
    assert report.min_clearance == pytest.approx(-0.7, abs=1e-3)
    assert box.clearance((2.5, 0.0)) == pytest.approx(-0.7, abs=1e-15)


def test_audit_empty_world_passes():
    sc = Scenario((), 0.1, (0.0, 0.0), (4.0, 3.0))
    res = plan_scenario(sc, dt=1e-2)
    report = audit_trajectory(res.trajectory, [], sc.params, res.path, sc.goal, sc.v_end)
    assert report.min_clearance == math.inf
    assert report.passed


def test_audit_demo_passes():
    sc = demo_scenario()
    res = plan_scenario(sc, dt=1e-3)
    report = audit_trajectory(res.trajectory, res.obstacles, sc.params, res.path, sc.goal, sc.v_end)
    assert report.passed, list(report.lines())
    assert report.max_control <= sc.u_max * (1 + 1e-6)
    assert report.min_clearance >= -1e-9
