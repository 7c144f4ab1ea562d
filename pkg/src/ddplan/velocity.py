"""Near time-optimal speed profiles along straight/arc paths.

The agent obeys ``r'' = u - C_D |v| v`` with ``|u| <= u_max``.  Along a path
parameterized by arc length the tangential acceleration ``a`` is bounded by

    straight:  -u_max - C_D v^2 <= a <= u_max - C_D v^2
    arc:       -C_D v^2 - w(v) <= a <= -C_D v^2 + w(v),  w = u_max - v^4 / (u_max rho^2)

(the arc bound is the conservative polynomial approximation of the exact
``sqrt(u_max^2 - v^4/rho^2)``).  Each segment is traversed bang-bang
(accelerate, optionally cruise at the arc speed cap, decelerate) and the
junction speeds come from a forward/backward reachability sweep.

All closed forms below were derived by integrating ``v dv/dgamma = a(v)`` and
``dt = dv / a(v)``; see the tests for the RK4 cross-checks.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import (InfeasibleEndpointsError, InfeasibleSpeedsError, TanhDomainError,
                     UnreachableError)

log = logging.getLogger(__name__)

CAP_SNAP = 1e-12      # relative distance to a speed cap treated as "at the cap"
FEAS_TOL = 1e-9       # relative slack on feasibility checks
ATANH_CLAMP = 1e-12


@dataclass(frozen=True)
class DynParams:
    u_max: float
    c_d: float

    def __post_init__(self):
        if not (self.u_max > 0 and math.isfinite(self.u_max)):
            raise ValueError(f"u_max must be positive, got {self.u_max}")
        if not (self.c_d > 0 and math.isfinite(self.c_d)):
            raise ValueError(f"c_d must be positive, got {self.c_d}")

    @property
    def v_bar(self) -> float:
        """Terminal speed sqrt(u_max / C_D); never reached in finite time."""
        return math.sqrt(self.u_max / self.c_d)

    @property
    def v_limit(self) -> float:
        """Largest float strictly below ``v_bar``."""
        return math.nextafter(self.v_bar, 0.0)

    @property
    def omega(self) -> float:
        return math.sqrt(self.u_max * self.c_d)


@dataclass(frozen=True)
class ArcConstants:
    rho: float
    u_max: float
    c_d: float
    lambda0: float
    lambda1: float
    lambda2: float
    lambda3: float
    lambda1c: float
    lambda2c: float
    kappa0: float
    kappa1: float
    kappa2: float
    v_c_max: float

    @classmethod
    def build(cls, rho: float, params: DynParams) -> "ArcConstants":
        if not rho > 0:
            raise ValueError(f"arc radius must be positive, got {rho}")
        u, c = params.u_max, params.c_d
        l0 = math.sqrt(rho * rho * c * c + 4.0)
        l1 = math.sqrt(rho * (l0 - rho * c))
        l2 = math.sqrt(rho * (l0 + rho * c))
        return cls(
            rho=rho, u_max=u, c_d=c,
            lambda0=l0, lambda1=l1, lambda2=l2,
            lambda3=(l0 / rho) * math.sqrt(u / 2.0),
            lambda1c=math.sqrt(2.0) / (l1 * math.sqrt(u)),
            lambda2c=math.sqrt(2.0) / (l2 * math.sqrt(u)),
            kappa0=rho / (2.0 * l0),
            kappa1=rho * u * l0,
            kappa2=c * rho * rho * u,
            v_c_max=arc_speed_cap(rho, params),
        )

    @property
    def s_plus(self) -> float:
        """Squared speed cap: positive root of s^2 + C u rho^2 s - u^2 rho^2."""
        return self.v_c_max ** 2

    @property
    def s_brake(self) -> float:
        """Positive root of s^2 - C u rho^2 s - u^2 rho^2 (braking never stalls below it)."""
        return 0.5 * self.u_max * self.lambda2 ** 2

    def accel(self, v):
        return self.u_max - self.c_d * v * v - v ** 4 / (self.u_max * self.rho ** 2)

    def decel(self, v):
        return -self.u_max - self.c_d * v * v + v ** 4 / (self.u_max * self.rho ** 2)


def arc_speed_cap(rho: float, params: DynParams) -> float:
    """Speed at which the approximate arc acceleration interval pinches to a = 0.

    Root of ``v^4 + C_D u rho^2 v^2 - u^2 rho^2 = 0``.
    """
    u, c = params.u_max, params.c_d
    l0 = math.sqrt(rho * rho * c * c + 4.0)
    # u*rho*(l0 - rho*c)/2 written without cancellation
    s = 2.0 * u * rho / (l0 + rho * c)
    return math.sqrt(s)


# ---------------------------------------------------------------------------
# straight segments


def _straight_accel_forward(v, length, p: DynParams):
    e = np.exp(-2.0 * p.c_d * length)
    return np.sqrt(np.maximum(e * v * v - p.u_max * np.expm1(-2.0 * p.c_d * length) / p.c_d, 0.0))


def _straight_brake_forward(v, length, p: DynParams):
    """Exit speed after braking from ``v`` over ``length`` (0 if it stalls earlier)."""
    e = np.exp(-2.0 * p.c_d * length)
    return np.sqrt(np.maximum(e * v * v + p.u_max * np.expm1(-2.0 * p.c_d * length) / p.c_d, 0.0))


def _straight_brake_backward(v, length, p: DynParams):
    e = np.exp(2.0 * p.c_d * length)
    return np.sqrt(e * v * v + p.u_max * np.expm1(2.0 * p.c_d * length) / p.c_d)


def straight_reach_speed(length: float, v_in: float, mode: str, params: DynParams) -> float:
    """Reachable speed at the far end of a straight.

    ``accel``: exit speed after full acceleration from ``v_in``.
    ``decel``: largest entry speed from which full braking ends at ``v_in``.
    ``brake``: exit speed after full braking from ``v_in`` (0 if it stops
    short), the inverse of ``decel``.
    Results are clipped to ``[0, v_bar)``.
    """
    if not 0 <= v_in < params.v_bar:
        raise ValueError(f"speed {v_in} outside [0, v_bar={params.v_bar})")
    if length == 0:
        return float(v_in)
    if mode == "accel":
        out = float(_straight_accel_forward(v_in, length, params))
    elif mode == "decel":
        e = math.exp(2.0 * params.c_d * length)
        rad = e * v_in * v_in + params.u_max * math.expm1(2.0 * params.c_d * length) / params.c_d
        if rad < 0:
            raise UnreachableError("cannot brake to requested speed", length=length, v_in=v_in)
        out = math.sqrt(rad)
    elif mode == "brake":
        out = float(_straight_brake_forward(v_in, length, params))
    else:
        raise ValueError(f"mode must be 'accel', 'decel' or 'brake', got {mode!r}")
    return min(max(out, 0.0), params.v_limit)


def straight_switch_speed(length: float, v0: float, vf: float, params: DynParams) -> float:
    """Unclamped switching speed of the accelerate-then-brake profile."""
    u, c = params.u_max, params.c_d
    e = math.exp(2.0 * c * length)
    # (lambda - 1)/C and (lambda + 1) without cancellation
    lm1_over_c = (u * math.expm1(2.0 * c * length) / c + vf * vf * e + v0 * v0) / (u - c * v0 * v0)
    lam = (u + c * vf * vf) * e / (u - c * v0 * v0)
    return math.sqrt(u * lm1_over_c / (lam + 1.0))


# ---------------------------------------------------------------------------
# arc segments


def _atanh_guarded(x, what: str):
    lim = 1.0 - ATANH_CLAMP
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) >= 1.0 + 1e-9) or np.any(np.isnan(xa)):
        raise TanhDomainError(f"inverse tanh argument out of (-1, 1) in {what}", value=x)
    over = np.abs(xa) - lim
    if np.any(over > 1e-9):
        log.warning("clamping inverse tanh argument in %s by %.3g", what, float(np.max(over)))
    return np.arctanh(np.clip(xa, -lim, lim))


def _arc_A(v, k: ArcConstants):
    """Distance potential for acceleration: gamma = (rho/lambda0) * A(v) + const."""
    return _atanh_guarded((k.kappa2 + 2.0 * v * v) / k.kappa1, "arc acceleration")


def _arc_D(v, k: ArcConstants):
    """Distance potential for braking: gamma = (rho/lambda0) * D(v) + const, D decreasing."""
    return _atanh_guarded((k.kappa2 - 2.0 * v * v) / k.kappa1, "arc braking")


def _arc_accel_forward(v, length, k: ArcConstants):
    v = np.asarray(v, dtype=float)
    at_cap = v >= k.v_c_max * (1.0 - CAP_SNAP)
    vv = np.where(at_cap, 0.0, v)
    arg = length * k.lambda0 / k.rho + _arc_A(vv, k)
    s = 0.5 * (k.kappa1 * np.tanh(arg) - k.kappa2)
    out = np.sqrt(np.clip(s, 0.0, k.s_plus))
    return np.where(at_cap, k.v_c_max, out)


def _arc_brake_forward(v, length, k: ArcConstants):
    arg = _arc_D(np.asarray(v, dtype=float), k) + length * k.lambda0 / k.rho
    s = 0.5 * (k.kappa2 - k.kappa1 * np.tanh(arg))
    return np.sqrt(np.maximum(s, 0.0))


def _arc_brake_backward(v, length, k: ArcConstants):
    arg = _arc_D(np.asarray(v, dtype=float), k) - length * k.lambda0 / k.rho
    s = 0.5 * (k.kappa2 - k.kappa1 * np.tanh(arg))
    return np.sqrt(np.maximum(s, 0.0))


def arc_reach_speed(length: float, v_in: float, mode: str, arc: ArcConstants, params: DynParams = None) -> float:
    """Arc analogue of :func:`straight_reach_speed`, clipped to ``[0, v_c_max]``."""
    if not 0 <= v_in <= arc.v_c_max * (1.0 + FEAS_TOL):
        raise TanhDomainError(f"speed {v_in} above arc cap {arc.v_c_max}", v_in=v_in)
    v_in = min(v_in, arc.v_c_max)
    if length == 0:
        return float(v_in)
    if mode == "accel":
        out = float(_arc_accel_forward(v_in, length, arc))
    elif mode == "decel":
        out = float(_arc_brake_backward(v_in, length, arc))
    elif mode == "brake":
        out = float(_arc_brake_forward(v_in, length, arc))
    else:
        raise ValueError(f"mode must be 'accel', 'decel' or 'brake', got {mode!r}")
    return min(max(out, 0.0), arc.v_c_max)


def arc_switch_speed(length: float, v0: float, vf: float, arc: ArcConstants) -> float:
    """Switching speed on an arc (smaller root of the switching quadratic)."""
    k = arc
    v0c = v0 >= k.v_c_max * (1.0 - CAP_SNAP)
    x = math.inf if v0c else length / k.kappa0 + 2.0 * float(_arc_A(v0, k)) - 2.0 * float(_arc_D(vf, k))
    q = math.exp(-x)
    one_m_q = -math.expm1(-x) if math.isfinite(x) else 1.0
    bs = k.s_plus * k.s_brake
    disc = ((1.0 + q) * k.kappa1) ** 2 - 4.0 * one_m_q ** 2 * bs
    s = 2.0 * one_m_q * bs / ((1.0 + q) * k.kappa1 + math.sqrt(max(disc, 0.0)))
    return math.sqrt(min(s, k.s_plus))


def _arc_accel_time(v0, v1, dist, k: ArcConstants):
    """Time to accelerate from v0 to v1 covering ``dist``.

    Uses the distance relation to eliminate the divergent inverse tanh at the
    speed cap, so it stays finite when v1 rounds onto the cap.
    """
    vc = k.v_c_max
    b = k.s_brake
    hyper = np.log((vc + v1) / (vc + v0)) - 0.5 * np.log((v1 * v1 + b) / (v0 * v0 + b)) + dist * k.lambda0 / k.rho
    circ = np.arctan(k.lambda2c * v1) - np.arctan(k.lambda2c * v0)
    return (k.rho / k.lambda0) * (k.lambda1c * hyper + k.lambda2c * circ)


def _arc_brake_time(v_hi, v_lo, k: ArcConstants):
    hyper = np.arctanh(k.lambda2c * v_hi) - np.arctanh(k.lambda2c * v_lo)
    circ = np.arctan(k.lambda1c * v_hi) - np.arctan(k.lambda1c * v_lo)
    return (k.rho / k.lambda0) * (k.lambda2c * hyper + k.lambda1c * circ)


# ---------------------------------------------------------------------------
# per-segment plans


@dataclass(frozen=True)
class SegmentPlan:
    """Bang-bang schedule on one segment.

    Phases in order: accelerate over ``d_acc``, cruise at ``v_sw`` over
    ``d_cruise`` (arcs at their speed cap only), brake over ``d_dec``.
    """

    kind: str                  # "straight" | "arc"
    length: float
    v0: float
    vf: float
    v_sw: float
    d_acc: float
    d_cruise: float
    d_dec: float
    t_acc: float
    t_cruise: float
    t_dec: float
    params: DynParams
    arc: Optional[ArcConstants] = None

    @property
    def duration(self) -> float:
        return self.t_acc + self.t_cruise + self.t_dec

    @property
    def gamma_sw(self) -> float:
        """Distance from the segment start at which braking begins."""
        return self.d_acc + self.d_cruise

    @property
    def phase_kind(self) -> str:
        if self.length == 0:
            return "empty"
        if self.t_cruise > 0:
            return "cruise-capped"
        if self.t_acc > 0 and self.t_dec > 0:
            return "accel-then-decel"
        if self.t_acc > 0:
            return "accel-only"
        return "decel-only"

    def accel_bounds(self, v):
        p = self.params
        if self.arc is None:
            return p.u_max - p.c_d * v * v, -p.u_max - p.c_d * v * v
        return self.arc.accel(v), self.arc.decel(v)

    def state_at(self, t):
        """Distance from segment start, speed and tangential acceleration at local time(s) t."""
        t = np.clip(np.atleast_1d(np.asarray(t, dtype=float)), 0.0, self.duration)
        gam = np.empty_like(t)
        v = np.empty_like(t)
        a = np.empty_like(t)
        acc = t <= self.t_acc
        cru = (~acc) & (t <= self.t_acc + self.t_cruise)
        dec = ~(acc | cru)
        if np.any(acc):
            g_, v_ = self._accel_state(t[acc])
            gam[acc], v[acc] = g_, v_
            a[acc] = self.accel_bounds(v_)[0]
        if np.any(cru):
            gam[cru] = self.d_acc + self.v_sw * (t[cru] - self.t_acc)
            v[cru] = self.v_sw
            a[cru] = 0.0
        if np.any(dec):
            g_, v_ = self._brake_state(t[dec] - self.t_acc - self.t_cruise)
            gam[dec], v[dec] = self.d_acc + self.d_cruise + g_, v_
            a[dec] = self.accel_bounds(v_)[1]
        return np.minimum(gam, self.length), v, a

    def _accel_state(self, t):
        p = self.params
        if self.arc is None:
            w = p.omega
            x0 = math.atanh(self.v0 / p.v_bar)
            x = x0 + w * t
            v = p.v_bar * np.tanh(x)
            g = (_logcosh(x) - _logcosh(x0)) / p.c_d
            return np.minimum(g, self.d_acc), np.minimum(v, self.v_sw)
        k = self.arc
        lo = np.zeros_like(t)
        hi = np.full_like(t, self.d_acc)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            tm = _arc_accel_time(self.v0, _arc_accel_forward(self.v0, mid, k), mid, k)
            below = tm < t
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        g = 0.5 * (lo + hi)
        return g, np.minimum(_arc_accel_forward(self.v0, g, k), self.v_sw)

    def _brake_state(self, t):
        p = self.params
        if self.arc is None:
            w = p.omega
            th0 = math.atan(self.v_sw / p.v_bar)
            th = np.maximum(th0 - w * t, math.atan(self.vf / p.v_bar))
            v = p.v_bar * np.tan(th)
            g = np.log(np.cos(th) / math.cos(th0)) / p.c_d
            return np.minimum(g, self.d_dec), v
        k = self.arc
        lo = np.full_like(t, self.vf)
        hi = np.full_like(t, self.v_sw)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            tm = _arc_brake_time(self.v_sw, mid, k)
            # larger speed means less elapsed time
            early = tm < t
            hi = np.where(early, mid, hi)
            lo = np.where(early, lo, mid)
        v = 0.5 * (lo + hi)
        g = (k.rho / k.lambda0) * (_arc_D(v, k) - _arc_D(self.v_sw, k))
        return np.clip(g, 0.0, self.d_dec), v


def _logcosh(x):
    x = np.abs(x)
    return x + np.log1p(np.exp(-2.0 * x)) - math.log(2.0)


def _check_speed(v, upper, name):
    if not (v >= 0 and math.isfinite(v)):
        raise InfeasibleSpeedsError(f"{name}={v} must be a non-negative finite speed")
    if v > upper:
        raise InfeasibleSpeedsError(f"{name}={v} exceeds the speed bound {upper}", binding=f"{name} <= {upper}")


def plan_straight(length: float, v0: float, vf: float, params: DynParams) -> SegmentPlan:
    if length < 0:
        raise ValueError("segment length must be non-negative")
    _check_speed(v0, params.v_limit, "v0")
    _check_speed(vf, params.v_limit, "vf")
    p = params
    if length == 0:
        if abs(v0 - vf) > FEAS_TOL * max(1.0, v0):
            raise InfeasibleSpeedsError("zero-length segment needs equal terminal speeds")
        return SegmentPlan("straight", 0.0, v0, vf, max(v0, vf), 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, p)
    v_sw = straight_switch_speed(length, v0, vf, p)
    hi = max(v0, vf)
    if v_sw < hi * (1.0 - FEAS_TOL) - 1e-12:
        if vf > v0:
            binding = "vf exceeds the full-acceleration reach over the segment"
        else:
            binding = "full braking from v0 cannot reach vf within the segment"
        raise InfeasibleSpeedsError(binding, length=length, v0=v0, vf=vf, v_sw=v_sw, binding=binding)
    v_sw = min(max(v_sw, hi), p.v_limit)
    c, u = p.c_d, p.u_max
    d_dec = math.log1p(c * (v_sw * v_sw - vf * vf) / (u + c * vf * vf)) / (2.0 * c)
    d_dec = min(d_dec, length)
    d_acc = length - d_dec
    vb = p.v_bar
    t_acc = (math.log((vb + v_sw) / (vb + v0)) + c * d_acc) / p.omega
    t_dec = (math.atan(v_sw / vb) - math.atan(vf / vb)) / p.omega
    if v_sw == v0:
        t_acc, d_acc, d_dec = 0.0, 0.0, length
    return SegmentPlan("straight", length, v0, vf, v_sw, d_acc, 0.0, d_dec, max(t_acc, 0.0), 0.0, max(t_dec, 0.0), p)


def straight_min_time(length: float, v0: float, vf: float, params: DynParams) -> float:
    """Minimum traversal time of a straight with terminal speeds v0, vf."""
    return plan_straight(length, v0, vf, params).duration


def plan_arc(length: float, v0: float, vf: float, arc: ArcConstants, params: DynParams) -> SegmentPlan:
    if length < 0:
        raise ValueError("segment length must be non-negative")
    k = arc
    vc = k.v_c_max
    _check_speed(v0, vc * (1.0 + FEAS_TOL), "v0")
    _check_speed(vf, vc * (1.0 + FEAS_TOL), "vf")
    v0 = vc if v0 >= vc * (1.0 - CAP_SNAP) else v0
    vf = vc if vf >= vc * (1.0 - CAP_SNAP) else vf
    if length == 0:
        if abs(v0 - vf) > FEAS_TOL * max(1.0, v0):
            raise InfeasibleSpeedsError("zero-length segment needs equal terminal speeds")
        return SegmentPlan("arc", 0.0, v0, vf, max(v0, vf), 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, params, k)
    v_sw = arc_switch_speed(length, v0, vf, k)
    hi = max(v0, vf)
    if v_sw < hi * (1.0 - FEAS_TOL) - 1e-12:
        if vf > v0:
            binding = "vf exceeds the full-acceleration reach over the arc"
        else:
            binding = "full braking from v0 cannot reach vf within the arc"
        raise InfeasibleSpeedsError(binding, length=length, v0=v0, vf=vf, v_sw=v_sw, binding=binding)
    v_sw = min(max(v_sw, hi), vc)
    d_dec = float((k.rho / k.lambda0) * (_arc_D(vf, k) - _arc_D(v_sw, k)))
    if d_dec > length * (1.0 + FEAS_TOL) + 1e-12:
        raise InfeasibleSpeedsError("arc too short to brake from the cap", length=length, v0=v0, vf=vf)
    d_dec = min(max(d_dec, 0.0), length)
    t_dec = float(_arc_brake_time(v_sw, vf, k))
    if v0 == vc:
        d_acc, t_acc = 0.0, 0.0
        d_cruise = length - d_dec
        t_cruise = d_cruise / vc
    elif v_sw == v0:
        d_acc = t_acc = d_cruise = t_cruise = 0.0
        d_dec = length
    else:
        d_acc = length - d_dec
        t_acc = float(_arc_accel_time(v0, v_sw, d_acc, k))
        d_cruise = t_cruise = 0.0
    return SegmentPlan("arc", length, v0, vf, v_sw, d_acc, d_cruise, d_dec,
                       max(t_acc, 0.0), t_cruise, max(t_dec, 0.0), params, k)


def arc_min_time(length: float, v0: float, vf: float, arc: ArcConstants, params: DynParams) -> float:
    """Minimum arc traversal time under the approximate acceleration bounds."""
    return plan_arc(length, v0, vf, arc, params).duration


# ---------------------------------------------------------------------------
# whole-path profile


def _segment_kind(seg) -> str:
    return "straight" if getattr(seg, "radius", None) is None else "arc"


@dataclass(frozen=True)
class SpeedProfile:
    terminal_speeds: Tuple[float, ...]
    plans: Tuple[SegmentPlan, ...]
    forward: Tuple[float, ...] = ()
    backward: Tuple[float, ...] = ()
    caps: Tuple[float, ...] = ()

    @property
    def durations(self) -> np.ndarray:
        return np.array([p.duration for p in self.plans])

    @property
    def start_times(self) -> np.ndarray:
        d = self.durations
        return np.concatenate([[0.0], np.cumsum(d)])

    @property
    def total_time(self) -> float:
        return float(sum(p.duration for p in self.plans))


def solve_terminal_speeds(path, v_start: float = 0.0, v_end: float = 0.0, params: DynParams = None) -> SpeedProfile:
    """Junction speeds maximizing speed everywhere, by forward/backward sweeps.

    The forward sweep propagates full-acceleration reach from ``v_start``, the
    backward sweep full-braking reach from ``v_end``; both are capped at each
    arc's speed cap.  Junction speeds are the pointwise minimum.
    """
    if params is None:
        raise ValueError("params are required")
    segs = list(path.segments)
    n = len(segs)
    consts: List[Optional[ArcConstants]] = [
        None if _segment_kind(s) == "straight" else ArcConstants.build(s.radius, params) for s in segs
    ]
    caps = [params.v_limit] * (n + 1)
    for i, k in enumerate(consts):
        if k is not None:
            caps[i] = min(caps[i], k.v_c_max)
            caps[i + 1] = min(caps[i + 1], k.v_c_max)
    if n == 0:
        if abs(v_start - v_end) > FEAS_TOL * max(1.0, v_start):
            raise InfeasibleEndpointsError("empty path requires v_start == v_end")
        return SpeedProfile((v_start,), (), (v_start,), (v_start,), (caps[0],))
    for name, v, cap in (("v_start", v_start, caps[0]), ("v_end", v_end, caps[-1])):
        if not 0 <= v <= cap * (1.0 + FEAS_TOL):
            raise InfeasibleEndpointsError(f"{name}={v} outside [0, {cap}]", binding=name)

    fwd = [0.0] * (n + 1)
    fwd[0] = min(v_start, caps[0])
    for i, (s, k) in enumerate(zip(segs, consts)):
        if k is None:
            nxt = straight_reach_speed(s.length, fwd[i], "accel", params)
        else:
            nxt = arc_reach_speed(s.length, fwd[i], "accel", k)
        fwd[i + 1] = min(nxt, caps[i + 1])
    bwd = [0.0] * (n + 1)
    bwd[n] = min(v_end, caps[n])
    for i in range(n - 1, -1, -1):
        s, k = segs[i], consts[i]
        if k is None:
            prv = straight_reach_speed(s.length, bwd[i + 1], "decel", params)
        else:
            prv = arc_reach_speed(s.length, bwd[i + 1], "decel", k)
        bwd[i] = min(prv, caps[i])
    if v_end > fwd[n] * (1.0 + FEAS_TOL) + 1e-12:
        raise InfeasibleEndpointsError(f"v_end={v_end} not reachable; max is {fwd[n]}", binding="v_end")
    if v_start > bwd[0] * (1.0 + FEAS_TOL) + 1e-12:
        raise InfeasibleEndpointsError(f"cannot brake from v_start={v_start}; max is {bwd[0]}", binding="v_start")

    speeds = [min(f, b) for f, b in zip(fwd, bwd)]
    speeds[0], speeds[n] = min(v_start, caps[0]), min(v_end, caps[n])
    plans = []
    for i, (s, k) in enumerate(zip(segs, consts)):
        if k is None:
            plans.append(plan_straight(s.length, speeds[i], speeds[i + 1], params))
        else:
            plans.append(plan_arc(s.length, speeds[i], speeds[i + 1], k, params))
    return SpeedProfile(tuple(speeds), tuple(plans), tuple(fwd), tuple(bwd), tuple(caps))


def total_time(path, profile: SpeedProfile, params: DynParams = None) -> float:
    """Sum of per-segment minimum times under the profile's junction speeds."""
    segs = list(path.segments)
    v = profile.terminal_speeds
    tau = 0.0
    for i, s in enumerate(segs):
        if _segment_kind(s) == "straight":
            tau += straight_min_time(s.length, v[i], v[i + 1], params)
        else:
            tau += arc_min_time(s.length, v[i], v[i + 1], ArcConstants.build(s.radius, params), params)
    return tau


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    position: np.ndarray
    velocity: np.ndarray
    control: np.ndarray
    gamma: np.ndarray
    speed: np.ndarray
    segment: np.ndarray

    def __len__(self):
        return len(self.t)


def evaluate_profile(path, profile: SpeedProfile, t) -> Trajectory:
    """State of the planned motion at arbitrary times (clipped to [0, total_time])."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    starts = profile.start_times
    n = len(profile.plans)
    N = len(t)
    pos = np.zeros((N, 2))
    vel = np.zeros((N, 2))
    ctl = np.zeros((N, 2))
    gam = np.zeros(N)
    spd = np.zeros(N)
    idx = np.zeros(N, dtype=int)
    if n == 0:
        p0 = np.asarray(path.point(0.0))
        pos[:] = p0
        spd[:] = profile.terminal_speeds[0]
        return Trajectory(t, pos, vel, ctl, gam, spd, idx)
    seg_of = np.clip(np.searchsorted(starts, t, side="right") - 1, 0, n - 1)
    breaks = np.asarray(path.cumulative_breaks)
    segs = list(path.segments)
    for i in np.unique(seg_of):
        m = seg_of == i
        plan = profile.plans[i]
        s = segs[i]
        g_loc, v, a = plan.state_at(t[m] - starts[i])
        xy, heading = s.point_at(g_loc), s.heading_at(g_loc)
        tx, ty = np.cos(heading), np.sin(heading)
        tang = a + plan.params.c_d * v * v
        ux, uy = tang * tx, tang * ty
        if plan.arc is not None:
            cx, cy = s.center
            # centripetal term v^2 / rho toward the center
            ux = ux + (cx - xy[:, 0]) / s.radius ** 2 * v * v
            uy = uy + (cy - xy[:, 1]) / s.radius ** 2 * v * v
        pos[m] = xy
        vel[m, 0], vel[m, 1] = v * tx, v * ty
        ctl[m, 0], ctl[m, 1] = ux, uy
        gam[m] = breaks[i] + g_loc
        spd[m] = v
        idx[m] = i
    return Trajectory(t, pos, vel, ctl, gam, spd, idx)


def sample_trajectory(path, profile: SpeedProfile, params: DynParams = None, dt: float = 1e-3) -> Trajectory:
    """Uniform-in-time samples of the planned motion, ending exactly at the goal."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    tau = profile.total_time
    n = int(math.floor(tau / dt))
    ts = np.arange(n + 1) * dt
    ts = ts[ts < tau - 1e-12]
    ts = np.append(ts, tau) if tau > 0 or len(ts) == 0 else ts
    return evaluate_profile(path, profile, ts)
