"""Independent numerical ground truth for the planner.

Fixed-step RK4 for the planar dynamics ``r' = v, v' = u - C_D |v| v`` and for
the path-restricted scalar dynamics ``gamma' = v, v' = a(v)``, plus a
trajectory auditor.  Nothing here calls the closed forms in ``velocity``
except where a test explicitly feeds a switching speed in.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence

import numpy as np

from .errors import CapExceededError, ControlBoundViolation
from .velocity import DynParams

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimState:
    t: float
    r: tuple
    v: tuple

    def __post_init__(self):
        if not all(math.isfinite(x) for x in (self.t, *self.r, *self.v)):
            raise ValueError("non-finite state")


@dataclass(frozen=True)
class SimTrajectory:
    t: np.ndarray
    r: np.ndarray
    v: np.ndarray
    u: np.ndarray

    @property
    def final(self) -> SimState:
        return SimState(float(self.t[-1]), tuple(self.r[-1]), tuple(self.v[-1]))


def integrate_2d(control: Callable, initial: SimState, dt: float, t_end: float, params: DynParams,
                 record_every: int = 1) -> SimTrajectory:
    """Classical RK4 on the planar damped double integrator.

    ``control(t, r, v)`` returns the acceleration command.  Every stage
    evaluation is audited against ``u_max * (1 + 1e-9)``.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    c = params.c_d
    limit = params.u_max * (1.0 + 1e-9)

    def u_at(t, r, v):
        u = np.asarray(control(t, r, v), dtype=float)
        n = math.hypot(u[0], u[1])
        if n > limit:
            raise ControlBoundViolation(f"|u|={n} exceeds {params.u_max} at t={t}", t=t, norm=n)
        return u

    def rhs(t, r, v):
        u = u_at(t, r, v)
        return v, u - c * math.hypot(v[0], v[1]) * v

    n_steps = max(int(math.ceil((t_end - initial.t) / dt - 1e-9)), 0)
    r = np.array(initial.r, dtype=float)
    v = np.array(initial.v, dtype=float)
    t = initial.t
    ts, rs, vs, us = [t], [r.copy()], [v.copy()], [u_at(t, r, v)]
    for k in range(n_steps):
        h = min(dt, t_end - t)
        k1r, k1v = rhs(t, r, v)
        k2r, k2v = rhs(t + h / 2, r + h / 2 * k1r, v + h / 2 * k1v)
        k3r, k3v = rhs(t + h / 2, r + h / 2 * k2r, v + h / 2 * k2v)
        k4r, k4v = rhs(t + h, r + h * k3r, v + h * k3v)
        r = r + h / 6 * (k1r + 2 * k2r + 2 * k3r + k4r)
        v = v + h / 6 * (k1v + 2 * k2v + 2 * k3v + k4v)
        t = initial.t + (k + 1) * dt if k + 1 < n_steps else t_end
        if (k + 1) % record_every == 0 or k + 1 == n_steps:
            ts.append(t)
            rs.append(r.copy())
            vs.append(v.copy())
            us.append(u_at(t, r, v))
    return SimTrajectory(np.array(ts), np.array(rs), np.array(vs), np.array(us))


# ---------------------------------------------------------------------------
# path-restricted integration (batched over instances)


def _extreme_accel(kind: str, law: str, v, u, c, rho):
    sign = 1.0 if law.startswith("accel") else -1.0
    if kind == "straight":
        return sign * u - c * v * v
    if law.endswith("exact"):
        return -c * v * v + sign * np.sqrt(np.maximum(u * u - v ** 4 / (rho * rho), 0.0))
    return -c * v * v + sign * (u - v ** 4 / (u * rho * rho))


def accel_law(kind: str, law: str, u_max, c_d, rho=None):
    """Extreme tangential acceleration ``a(v)`` for a segment kind.

    ``law``: "accel" | "decel" (approximate arc bounds) or "accel-exact" |
    "decel-exact" (exact norm bound on arcs).
    """
    return lambda v: _extreme_accel(kind, law, v, u_max, c_d, rho)


@dataclass
class PathIntegration:
    time: np.ndarray
    distance: np.ndarray
    speed: np.ndarray
    table: Optional[list] = None


def integrate_path(kind: str, law: str, v0, params_u, params_c, rho=None, *, stop_speed=None,
                   stop_distance=None, dt: float = 1e-4, reverse: bool = False, cap=None,
                   max_time: float = 1e4, keep_table: bool = False) -> PathIntegration:
    """RK4 on ``gamma' = v, v' = a(v)`` for a batch of instances.

    Each instance stops when its speed reaches ``stop_speed`` or its distance
    reaches ``stop_distance`` (exactly one must be given); the last step is
    shortened by bisection so the stop condition holds to rounding.  With
    ``reverse=True`` the speed equation runs backward in time (``v' =
    -a(v)``), which traces a braking profile from its end.
    """
    if (stop_speed is None) == (stop_distance is None):
        raise ValueError("give exactly one of stop_speed, stop_distance")
    v0 = np.atleast_1d(np.asarray(v0, dtype=float))
    n = v0.size

    def full(x):
        return None if x is None else np.broadcast_to(np.asarray(x, dtype=float), (n,)).copy()

    uu, cc, rr = full(params_u), full(params_c), full(rho)
    if rr is None:
        rr = np.ones(n)
    target = full(stop_speed if stop_speed is not None else stop_distance)
    by_speed = stop_speed is not None
    capv = full(cap)
    sgn = -1.0 if reverse else 1.0
    direction = np.sign(target - v0) if by_speed else np.ones(n)

    out_t = np.zeros(n)
    out_g = np.zeros(n)
    out_v = v0.copy()
    tables = [[(0.0, 0.0, float(v0[i]))] for i in range(n)] if keep_table else None

    # compressed working set
    ids = np.arange(n)
    t, g, v = np.zeros(n), np.zeros(n), v0.copy()
    u_, c_, r_, tg, dr = uu, cc, rr, target, direction
    cp_ = capv

    def step(g, v, h, u_, c_, r_):
        f = lambda vv: sgn * _extreme_accel(kind, law, vv, u_, c_, r_)
        k1 = f(v)
        v2 = v + 0.5 * h * k1
        k2 = f(v2)
        v3 = v + 0.5 * h * k2
        k3 = f(v3)
        v4 = v + h * k3
        k4 = f(v4)
        return g + h / 6 * (v + 2 * v2 + 2 * v3 + v4), v + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    def remaining(g, v, tg, dr):
        if by_speed:
            return np.where(dr > 0, tg - v, v - tg)
        return tg - g

    live = remaining(g, v, tg, dr) > 0
    ids, t, g, v, u_, c_, r_, tg, dr = (a[live] for a in (ids, t, g, v, u_, c_, r_, tg, dr))
    cp_ = None if cp_ is None else cp_[live]
    while ids.size:
        g_new, v_new = step(g, v, dt, u_, c_, r_)
        rem = remaining(g_new, v_new, tg, dr)
        done = rem <= 0
        if cp_ is not None and np.any(v_new > cp_ * (1 + 1e-9) + 1e-12):
            raise CapExceededError("speed left the feasible band", instances=ids[v_new > cp_ * (1 + 1e-9) + 1e-12].tolist())
        if np.any((v_new < 0) & ~done):
            raise CapExceededError("speed became negative before the stop condition",
                                   instances=ids[(v_new < 0) & ~done].tolist())
        if np.any(done):
            lo = np.zeros(int(done.sum()))
            hi = np.full(lo.size, dt)
            args = (u_[done], c_[done], r_[done])
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                gm, vm = step(g[done], v[done], mid, *args)
                over = remaining(gm, vm, tg[done], dr[done]) <= 0
                hi = np.where(over, mid, hi)
                lo = np.where(over, lo, mid)
            h = 0.5 * (lo + hi)
            gm, vm = step(g[done], v[done], h, *args)
            fin = ids[done]
            out_t[fin], out_g[fin], out_v[fin] = t[done] + h, gm, vm
            if keep_table:
                for j, a, b, c in zip(fin, out_t[fin], gm, vm):
                    tables[j].append((float(a), float(b), float(c)))
        keep = ~done
        t = t + dt
        g, v = g_new, v_new
        if keep_table:
            for j, a, b, c in zip(ids[keep], t[keep], g[keep], v[keep]):
                tables[j].append((float(a), float(b), float(c)))
        if np.any(t[keep] >= max_time):
            raise CapExceededError("stop condition not reached within max_time",
                                   instances=ids[keep & (t >= max_time)].tolist())
        if not np.all(keep):
            ids, t, g, v, u_, c_, r_, tg, dr = (a[keep] for a in (ids, t, g, v, u_, c_, r_, tg, dr))
            cp_ = None if cp_ is None else cp_[keep]
    return PathIntegration(out_t, out_g, out_v, tables)


def bang_bang_time(kind: str, length, v0, vf, v_sw, params_u, params_c, rho=None, dt: float = 1e-4):
    """Oracle traversal time of an accelerate/brake profile with switch speed ``v_sw``.

    The braking phase is traced backward in time from ``vf`` up to ``v_sw``;
    full acceleration from ``v0`` then covers the remaining distance.
    Returns ``(time, switch_mismatch)`` where the mismatch is the speed gap at
    the switching point (zero when ``v_sw`` is right).  For an arc entered at
    its speed cap the acceleration phase degenerates into a cruise, which the
    integration reproduces on its own.
    """
    length = np.atleast_1d(np.asarray(length, dtype=float))
    n = length.size
    v0 = np.broadcast_to(np.asarray(v0, dtype=float), (n,)).astype(float)
    vf = np.broadcast_to(np.asarray(vf, dtype=float), (n,)).astype(float)
    v_sw = np.broadcast_to(np.asarray(v_sw, dtype=float), (n,)).astype(float)
    uu = np.broadcast_to(np.asarray(params_u, dtype=float), (n,))
    cc = np.broadcast_to(np.asarray(params_c, dtype=float), (n,))
    rr = None if rho is None else np.broadcast_to(np.asarray(rho, dtype=float), (n,))
    t = np.zeros(n)
    d_dec = np.zeros(n)
    down = v_sw > vf
    if np.any(down):
        dec = integrate_path(kind, "decel", vf[down], uu[down], cc[down], None if rr is None else rr[down],
                             stop_speed=v_sw[down], dt=dt, reverse=True)
        t[down] += dec.time
        d_dec[down] = dec.distance
    rest = length - d_dec
    mismatch = np.where(rest < -1e-12 * np.maximum(length, 1.0), np.inf, 0.0)
    up = rest > 0
    if np.any(up):
        acc = integrate_path(kind, "accel", v0[up], uu[up], cc[up], None if rr is None else rr[up],
                             stop_distance=rest[up], dt=dt)
        t[up] += acc.time
        mismatch[up] = np.abs(acc.speed - v_sw[up])
    return t, mismatch


def shooting_min_time(kind: str, length: float, v0: float, vf: float, u: float, c: float,
                      rho: Optional[float] = None, dt: float = 1e-3):
    """Bang-bang time found by shooting on the switch speed, with no closed forms.

    Root-finds ``v_sw`` so that the RK4 accelerate distance (``v0 -> v_sw``)
    plus the RK4 brake distance (``v_sw -> vf``) equals ``length``.  The speed
    cap is the root of ``a_accel(v) = 0``.  Returns ``(v_sw, time)``.
    """
    from scipy.optimize import brentq

    a_up = accel_law(kind, "accel", u, c, rho)
    cap = brentq(lambda v: float(a_up(v)), 0.0, math.sqrt(u / c) * (1 + 1e-9), xtol=1e-15, rtol=1e-15)

    def phases(s):
        acc = integrate_path(kind, "accel", v0, u, c, rho, stop_speed=s, dt=dt) if s > v0 else None
        dec = integrate_path(kind, "decel", vf, u, c, rho, stop_speed=s, dt=dt, reverse=True) if s > vf else None
        d = (0.0 if acc is None else acc.distance[0]) + (0.0 if dec is None else dec.distance[0])
        t = (0.0 if acc is None else acc.time[0]) + (0.0 if dec is None else dec.time[0])
        return d, t

    lo = max(v0, vf)
    if phases(lo)[0] > length * (1 + 1e-12):
        raise ValueError("terminal speeds cannot be joined within the length")
    hi = None
    for k in range(2, 15):
        cand = cap * (1.0 - 10.0 ** -k)
        if cand <= lo:
            continue
        if phases(cand)[0] >= length:
            hi = cand
            break
        lo = cand
    if hi is None:
        # the switch never happens below the cap: cruise there
        d, t = phases(lo)
        return lo, t + (length - d) / lo
    s = brentq(lambda s: phases(s)[0] - length, lo, hi, xtol=1e-14, rtol=1e-14)
    return s, phases(s)[1]

# ---------------------------------------------------------------------------
# optimal arc time under the exact norm bound


def exact_arc_min_time(length: float, v0: float, vf: float, rho: float, params: DynParams) -> float:
    """Minimum arc traversal time under ``|u| <= u_max`` exactly (quadrature + root find)."""
    from scipy.integrate import quad
    from scipy.optimize import brentq

    u, c = params.u_max, params.c_d
    if length == 0:
        return 0.0
    # exact pinch: C^2 v^4 = u^2 - v^4/rho^2
    v_e = (u * u / (c * c + 1.0 / (rho * rho))) ** 0.25
    w = lambda v: math.sqrt(max(u * u - v ** 4 / (rho * rho), 0.0))
    a_up = lambda v: -c * v * v + w(v)
    a_dn = lambda v: -c * v * v - w(v)
    opts = dict(epsabs=1e-13, epsrel=1e-11, limit=200)

    # accelerating integrals in x = -log(v_e - v).  a_up has a simple zero at
    # v_e; dividing it out analytically keeps the integrand smooth and free of
    # cancellation up to the pinch.
    K = c * c + 1.0 / (rho * rho)

    def gap_over_a_up(v):
        return (w(v) + c * v * v) / (K * (v_e + v) * (v_e * v_e + v * v))

    def _acc_integral(g, s):
        if s <= v0:
            return 0.0
        f = lambda x: g(v_e - math.exp(-x)) * gap_over_a_up(v_e - math.exp(-x))
        return quad(f, -math.log(v_e - v0), -math.log(v_e - s), **opts)[0]

    def d_acc(s):
        return _acc_integral(lambda v: v, s)

    def d_dec(s):
        return quad(lambda v: -v / a_dn(v), vf, s, **opts)[0] if s > vf else 0.0

    def t_acc(s):
        return _acc_integral(lambda v: 1.0, s)

    def t_dec(s):
        return quad(lambda v: -1.0 / a_dn(v), vf, s, **opts)[0] if s > vf else 0.0

    lo = max(v0, vf)
    f = lambda s: d_acc(s) + d_dec(s) - length
    if f(lo) > 1e-12 * max(1.0, length):
        raise ValueError("terminal speeds infeasible even under the exact bound")
    # the accelerating distance diverges only logarithmically at the pinch,
    # so bracket by stepping toward it geometrically
    hi = None
    for k in range(1, 14):
        cand = v_e * (1.0 - 10.0 ** -k)
        if cand <= lo:
            continue
        if f(cand) >= 0:
            hi = cand
            break
        lo = cand
    if hi is None:
        # acceleration never closes the gap before the pinch: cruise there
        s = lo
        return t_acc(s) + t_dec(s) - f(s) / s
    s = brentq(f, lo, hi, xtol=1e-15, rtol=1e-14, maxiter=200)
    return t_acc(s) + t_dec(s)


# ---------------------------------------------------------------------------
# dense direct transcription on a fixed path


def direct_collocation_time(path, params: DynParams, v_start: float = 0.0, v_end: float = 0.0,
                            n_points: int = 2000, solver: Optional[str] = None) -> float:
    """Numerically optimal traversal time of ``path`` under the exact norm bound.

    Convex reformulation in ``b = v^2`` over a grid in arc length: the
    command ``u = f'(a + C b) + f'' b`` is affine in ``(a, b)`` with
    ``a = db/(2 dgamma)`` piecewise constant, so the norm bound is a
    second-order cone at both ends of every interval.  The objective
    ``sum 2 dgamma / (sqrt b_i + sqrt b_{i+1})`` becomes convex through
    auxiliary ``c_i <= sqrt(b_i)``.
    """
    import cvxpy as cp

    segs = list(path.segments)
    total = sum(s.length for s in segs)
    grids = []
    for s in segs:
        k = max(4, int(round(n_points * s.length / total)))
        grids.append(np.linspace(0.0, s.length, k + 1))
    m = sum(len(g) - 1 for g in grids)
    b = cp.Variable(m + 1, nonneg=True)
    c = cp.Variable(m + 1, nonneg=True)
    cons = [b[0] == v_start ** 2, b[m] == v_end ** 2, c <= cp.sqrt(b)]
    obj = 0
    k0 = 0
    u, cd = params.u_max, params.c_d
    for s, grid in zip(segs, grids):
        dg = np.diff(grid)
        nk = len(dg)
        idx = np.arange(k0, k0 + nk)
        heading_l = np.asarray(s.heading_at(grid[:-1]))
        heading_r = np.asarray(s.heading_at(grid[1:]))
        a = cp.multiply(b[idx + 1] - b[idx], 1.0 / (2.0 * dg))
        for heading, bb in ((heading_l, b[idx]), (heading_r, b[idx + 1])):
            tx, ty = np.cos(heading), np.sin(heading)
            if s.radius is None:
                kx = ky = np.zeros(nk)
            else:
                # curvature vector f'' points to the left/right of travel
                kx, ky = -s.direction * ty / s.radius, s.direction * tx / s.radius
            tang = a + cd * bb
            ux = cp.multiply(tx, tang) + cp.multiply(kx, bb)
            uy = cp.multiply(ty, tang) + cp.multiply(ky, bb)
            cons.append(cp.norm(cp.vstack([ux, uy]), 2, axis=0) <= u)
        obj = obj + cp.sum(cp.multiply(2.0 * dg, cp.inv_pos(c[idx] + c[idx + 1])))
        k0 += nk
    prob = cp.Problem(cp.Minimize(obj), cons)
    prob.solve(solver=solver or cp.CLARABEL)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise RuntimeError(f"direct solve failed: {prob.status}")
    return float(prob.value)


# ---------------------------------------------------------------------------
# audit


@dataclass(frozen=True)
class AuditTolerances:
    control_rel: float = 1e-6
    arc_speed_abs: float = 1e-9
    clearance_floor: float = -1e-9
    deviation: float = 1e-6
    final_state: float = 1e-6

    def scaled(self, factor: float) -> "AuditTolerances":
        return AuditTolerances(self.control_rel * factor, self.arc_speed_abs * factor,
                               self.clearance_floor * factor, self.deviation * factor, self.final_state * factor)


@dataclass
class AuditReport:
    max_control: float
    control_limit: float
    min_clearance: float
    max_speed: float
    speed_limit: float
    max_arc_speed_excess: float
    max_deviation: float
    final_state_error: float
    monotone_time: bool
    checks: Dict[str, bool] = field(default_factory=dict)
    worst_index: Dict[str, int] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def lines(self):
        yield f"max |u|            {self.max_control:.9g} (limit {self.control_limit:.9g})"
        yield f"min clearance      {self.min_clearance:.9g}"
        yield f"max speed          {self.max_speed:.9g} (limit {self.speed_limit:.9g})"
        yield f"arc cap excess     {self.max_arc_speed_excess:.3g}"
        yield f"path deviation     {self.max_deviation:.3g}"
        yield f"final-state error  {self.final_state_error:.3g}"
        for k, ok in self.checks.items():
            where = f" (sample {self.worst_index[k]})" if not ok and k in self.worst_index else ""
            yield f"{k:18s} {'PASS' if ok else 'FAIL'}{where}"


def clearance_many(points: np.ndarray, obstacle) -> np.ndarray:
    """Signed distance from each point to an inflated convex polygon."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    v = obstacle.source.as_array()
    a = v
    b = np.roll(v, -1, axis=0)
    e = b - a                                             # (m, 2)
    rel = pts[:, None, :] - a[None, :, :]                 # (n, m, 2)
    cross = e[None, :, 0] * rel[..., 1] - e[None, :, 1] * rel[..., 0]
    inside = np.all(cross >= 0, axis=1)
    t = np.clip(np.sum(rel * e[None], axis=2) / np.sum(e * e, axis=1)[None], 0.0, 1.0)
    diff = rel - t[..., None] * e[None]
    d = np.sqrt(np.min(np.sum(diff * diff, axis=2), axis=1))
    # inside the core the nearest edge distance counts as extra depth
    d = np.where(inside, -d, d)
    return d - obstacle.radius


def audit_trajectory(trajectory, obstacles: Sequence, params: DynParams, path=None, goal=None,
                     v_end: Optional[float] = None, tolerances: AuditTolerances = None) -> AuditReport:
    """Check a sampled trajectory against every planner guarantee."""
    from .velocity import arc_speed_cap

    tol = tolerances or AuditTolerances()
    t = np.asarray(trajectory.t)
    pos = np.asarray(trajectory.position)
    vel = np.asarray(trajectory.velocity)
    ctl = np.asarray(trajectory.control)
    gam = np.asarray(trajectory.gamma)
    speed = np.hypot(vel[:, 0], vel[:, 1])
    unorm = np.hypot(ctl[:, 0], ctl[:, 1])
    checks, worst = {}, {}

    limit = params.u_max * (1.0 + tol.control_rel)
    checks["control bound"] = bool(np.all(unorm <= limit))
    worst["control bound"] = int(np.argmax(unorm))

    checks["speed < v_bar"] = bool(np.all(speed < params.v_bar))
    worst["speed < v_bar"] = int(np.argmax(speed))

    clear = np.full(len(t), math.inf)
    for obs in obstacles:
        clear = np.minimum(clear, clearance_many(pos, obs))
    checks["clearance"] = bool(np.all(clear >= tol.clearance_floor))
    worst["clearance"] = int(np.argmin(clear)) if len(t) else 0

    monotone = bool(np.all(np.diff(t) > 0))
    checks["time increasing"] = monotone

    dev = 0.0
    arc_excess = -math.inf
    if path is not None and len(t):
        L = path.total_length
        if path.segments:
            ref = np.array([path.point(min(max(g, 0.0), L)) for g in gam])
            devs = np.hypot(*(pos - ref).T)
            dev = float(np.max(devs))
            worst["path deviation"] = int(np.argmax(devs))
            breaks = np.asarray(path.cumulative_breaks)
            seg_idx = np.clip(np.searchsorted(breaks, gam, side="right") - 1, 0, len(path.segments) - 1)
            for i, s in enumerate(path.segments):
                if s.radius is None:
                    continue
                m = seg_idx == i
                # samples sitting exactly on a junction may belong to either neighbour
                m |= np.isclose(gam, breaks[i], rtol=0, atol=1e-12) | np.isclose(gam, breaks[i + 1], rtol=0, atol=1e-12)
                if np.any(m):
                    cap = arc_speed_cap(s.radius, params)
                    arc_excess = max(arc_excess, float(np.max(speed[m] - cap)))
        checks["path deviation"] = dev <= tol.deviation
        checks["arc speed cap"] = arc_excess <= tol.arc_speed_abs

    final_err = 0.0
    if goal is not None and len(t):
        final_err = math.dist(tuple(pos[-1]), goal)
        if v_end is not None:
            final_err = max(final_err, abs(float(speed[-1]) - v_end))
        checks["final state"] = final_err <= tol.final_state

    return AuditReport(
        max_control=float(np.max(unorm)) if len(t) else 0.0,
        control_limit=params.u_max,
        min_clearance=float(np.min(clear)) if len(t) else math.inf,
        max_speed=float(np.max(speed)) if len(t) else 0.0,
        speed_limit=params.v_bar,
        max_arc_speed_excess=arc_excess,
        max_deviation=dev,
        final_state_error=final_err,
        monotone_time=monotone,
        checks=checks,
        worst_index=worst,
    )
