"""Command line entry point: ``ddplan plan`` and ``ddplan verify``.

Exit codes: 0 success, 1 audit failure, 2 no path, 3 invalid input or
scenario/trajectory hash mismatch.  The log level is read from
``DDPLAN_LOG_LEVEL`` (default WARNING).
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np

from .errors import NoPathError, PlannerError
from .roadmap import ArcSeg
from .scenario import (PlanResult, ScenarioError, fmt, load_scenario, load_trajectory, plan_scenario,
                       trajectory_text)
from .sim_oracle import AuditTolerances, audit_trajectory

log = logging.getLogger("ddplan")

EXIT_OK, EXIT_AUDIT, EXIT_NO_PATH, EXIT_INVALID = 0, 1, 2, 3


def report_text(res: PlanResult, audit=None) -> str:
    sc = res.scenario
    lines = [
        "ddplan plan report",
        f"scenario sha256     {sc.sha256()}",
        f"obstacles           {len(sc.obstacles)} (inflation {sc.inflation:g} m)",
        f"u_max, c_d          {sc.u_max:g} m/s^2, {sc.c_d:g} 1/m (speed limit {sc.params.v_bar:.6g} m/s)",
        f"K_m                 {res.kappa:.6f}",
        f"roadmap nodes/edges {len(res.roadmap_full.nodes)}/{len(res.roadmap_full.edges)} before filter, "
        f"{len(res.roadmap.nodes)}/{len(res.roadmap.edges)} searched",
        f"path length         {res.path.total_length:.9f} m "
        f"({res.path.n_straights} straight, {res.path.n_arcs} arc)",
        f"total time          {res.total_time:.9f} s",
        f"samples             {len(res.trajectory)} at dt {res.dt:g} s",
        "",
        " #  kind      length      v_in      v_out     v_switch  phase             time",
    ]
    for i, p in enumerate(res.profile.plans):
        lines.append(f"{i:2d}  {p.kind:8s} {p.length:9.5f} {p.v0:9.5f} {p.vf:9.5f} {p.v_sw:9.5f}  "
                     f"{p.phase_kind:16s} {p.duration:9.5f}")
    if audit is not None:
        lines.append("")
        lines.append("audit")
        lines.extend("  " + s for s in audit.lines())
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# SVG


def _pts(arr, tf) -> str:
    return " ".join(f"{x:.4f},{y:.4f}" for x, y in (tf(p) for p in arr))


def svg_text(res: PlanResult, width: int = 900) -> str:
    obs = res.obstacles
    pts: List = [res.scenario.start, res.scenario.goal]
    for o in obs:
        pts.extend(map(tuple, o.sample(64)))
    xy = np.array(pts)
    lo = xy.min(axis=0) - 0.5
    hi = xy.max(axis=0) + 0.5
    scale = width / (hi[0] - lo[0])
    height_map = int(math.ceil((hi[1] - lo[1]) * scale))
    inset_h = 160
    height = height_map + inset_h + 30

    def tf(p):
        return (p[0] - lo[0]) * scale, (hi[1] - p[1]) * scale

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           '<rect width="100%" height="100%" fill="white"/>']
    for o in obs:
        out.append(f'<polygon points="{_pts(o.sample(180), tf)}" fill="#d0d0d0" stroke="#909090"/>')
        out.append(f'<polygon points="{_pts(o.source.vertices, tf)}" fill="#808080"/>')
    for e in res.roadmap.edges:
        if e.kind == "arc":
            continue
        (x0, y0), (x1, y1) = tf(e.p_from), tf(e.p_to)
        out.append(f'<line x1="{x0:.4f}" y1="{y0:.4f}" x2="{x1:.4f}" y2="{y1:.4f}" '
                   f'stroke="#9ec5ea" stroke-width="0.6"/>')
    L = res.path.total_length
    if L > 0:
        gs = np.linspace(0.0, L, 800)
        out.append(f'<polyline points="{_pts([res.path.point(g) for g in gs], tf)}" fill="none" '
                   f'stroke="#c0392b" stroke-width="2"/>')
    for p, col in ((res.scenario.start, "#27ae60"), (res.scenario.goal, "#2c3e50")):
        x, y = tf(p)
        out.append(f'<circle cx="{x:.4f}" cy="{y:.4f}" r="5" fill="{col}"/>')

    # speed against distance
    top = height_map + 20
    tr = res.trajectory
    vmax = max(float(np.max(tr.speed)), 1e-9)
    gmax = max(float(tr.gamma[-1]), 1e-9)
    left, right = 50, width - 20
    out.append(f'<rect x="{left}" y="{top}" width="{right - left}" height="{inset_h - 20}" '
               f'fill="none" stroke="#555"/>')
    for b, s in zip(res.path.cumulative_breaks[:-1], res.path.segments):
        if isinstance(s, ArcSeg):
            x0 = left + (right - left) * b / gmax
            x1 = left + (right - left) * (b + s.length) / gmax
            out.append(f'<rect x="{x0:.3f}" y="{top}" width="{x1 - x0:.3f}" height="{inset_h - 20}" '
                       f'fill="#f4e3c1"/>')
    step = max(1, len(tr) // 1500)
    sel = slice(None, None, step)
    line = " ".join(f"{left + (right - left) * g / gmax:.3f},{top + (inset_h - 20) * (1 - v / vmax):.3f}"
                    for g, v in zip(tr.gamma[sel], tr.speed[sel]))
    out.append(f'<polyline points="{line}" fill="none" stroke="#2c3e50" stroke-width="1.5"/>')
    out.append(f'<text x="{left}" y="{top - 4}" font-size="12" font-family="sans-serif">'
               f'speed (max {vmax:.3f} m/s) vs distance ({gmax:.3f} m), arcs shaded</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# commands


def plan_command(args) -> int:
    try:
        sc = load_scenario(args.scenario)
        res = plan_scenario(sc, dt=args.dt, use_filter=not args.no_filter)
    except OSError as exc:
        print(f"error: cannot read scenario: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NoPathError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_NO_PATH
    except PlannerError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_INVALID
    # timings go to the log so that output files stay byte-identical across runs
    log.info("timings: %s", ", ".join(f"{k} {v * 1e3:.1f} ms" for k, v in res.timings.items()))
    audit = audit_trajectory(res.trajectory, res.obstacles, sc.params, res.path, sc.goal, sc.v_end)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / "trajectory.txt").write_text(trajectory_text(res), encoding="utf-8")
    (out / "report.txt").write_text(report_text(res, audit), encoding="utf-8")
    if args.svg:
        (out / "plan.svg").write_text(svg_text(res), encoding="utf-8")
    print(f"total time {fmt(res.total_time)} s, path length {fmt(res.path.total_length)} m -> {out}")
    if not audit.passed:
        log.warning("planner output failed its own audit")
    return EXIT_OK


def verify_command(args) -> int:
    try:
        sc = load_scenario(args.scenario)
        tf = load_trajectory(args.trajectory)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PlannerError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if tf.metadata.get("scenario_sha256") != sc.sha256():
        print("error: trajectory was not produced from this scenario (hash mismatch)", file=sys.stderr)
        return EXIT_INVALID
    try:
        res = plan_scenario(sc, dt=float(tf.metadata.get("dt", "1e-3")),
                            use_filter=tf.metadata.get("filter", "on") == "on")
    except NoPathError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_NO_PATH
    except PlannerError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_INVALID
    tol = AuditTolerances().scaled(args.tol_scale)
    traj = tf.as_trajectory()
    audit = audit_trajectory(traj, res.obstacles, sc.params, res.path, sc.goal, sc.v_end, tol)
    for line in audit.lines():
        print(line)
    for key, i in audit.worst_index.items():
        if not audit.checks.get(key, True):
            print(f"  {key}: worst at sample {i}, t = {traj.t[i]:.9g} s")
    print("PASS" if audit.passed else "FAIL")
    return EXIT_OK if audit.passed else EXIT_AUDIT


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ddplan", description="time-optimal planning among convex obstacles")
    sub = ap.add_subparsers(dest="command", required=True)
    p = sub.add_parser("plan", help="plan a trajectory for a scenario file")
    p.add_argument("scenario")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--dt", type=float, default=1e-3, help="sampling step in seconds")
    p.add_argument("--no-filter", action="store_true", help="search the full roadmap")
    p.add_argument("--svg", action="store_true", help="also write plan.svg")
    p.set_defaults(func=plan_command)
    v = sub.add_parser("verify", help="audit a trajectory file against its scenario")
    v.add_argument("trajectory")
    v.add_argument("scenario")
    v.add_argument("--tol-scale", type=float, default=1.0, help="multiply every audit tolerance")
    v.set_defaults(func=verify_command)
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=os.environ.get("DDPLAN_LOG_LEVEL", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    if getattr(args, "dt", 1.0) <= 0:
        print("error: --dt must be positive", file=sys.stderr)
        return EXIT_INVALID
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
