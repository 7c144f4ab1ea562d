"""Tangent roadmap over inflated obstacles, ellipse pruning and shortest paths.

Every tangency anchor ``(obstacle, gamma)`` is split into two directed nodes,
one per boundary traversal sense (+1 counterclockwise, -1 clockwise).  A
tangent segment with direction ``d`` enters/leaves an anchor with sense
``sign(d . t)`` where ``t`` is the counterclockwise boundary tangent, so every
path in the graph is C1 by construction.
"""

from __future__ import annotations

import heapq
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import NoPathError, OutOfRangeError
from .geometry import Arc, InflatedObstacle, Point, min_inradius
from .tangents import Anchor, TangentEdge, Terminal, common_tangents, point_tangents, segment_collides

log = logging.getLogger(__name__)

ANCHOR_MERGE_TOL = 1e-9
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Node:
    kind: str                 # "terminal" | "anchor"
    point: Point
    obstacle: Optional[int] = None
    gamma: float = 0.0
    sense: int = 0
    name: str = ""

    @property
    def key(self):
        return (self.obstacle, self.gamma, self.sense)


@dataclass(frozen=True)
class ArcEdge:
    obstacle: int
    gamma_from: float
    gamma_to: float
    direction: int
    length: float


@dataclass(frozen=True)
class Edge:
    src: int
    dst: int
    length: float
    kind: str                 # "tangent" | "terminal" | "direct" | "arc"
    data: Union[TangentEdge, ArcEdge, None] = None
    p_from: Optional[Point] = None
    p_to: Optional[Point] = None


@dataclass(frozen=True)
class Roadmap:
    obstacles: Tuple[InflatedObstacle, ...]
    nodes: Tuple[Node, ...]
    edges: Tuple[Edge, ...]
    tangents: Tuple[TangentEdge, ...] = ()
    terminal_edges: Tuple[TangentEdge, ...] = ()
    terminals: Tuple[Terminal, ...] = ()
    _adjacency: Dict[int, List[int]] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        adj: Dict[int, List[int]] = {i: [] for i in range(len(self.nodes))}
        for k, e in enumerate(self.edges):
            adj[e.src].append(k)
        object.__setattr__(self, "_adjacency", adj)

    def out_edges(self, node: int) -> List[Edge]:
        return [self.edges[k] for k in self._adjacency[node]]

    def terminal_index(self, name: str) -> int:
        for i, n in enumerate(self.nodes):
            if n.kind == "terminal" and n.name == name:
                return i
        raise KeyError(name)

    @property
    def n_anchor_nodes(self) -> int:
        return sum(1 for n in self.nodes if n.kind == "anchor")


# ---------------------------------------------------------------------------
# construction


def _sense(obs: InflatedObstacle, gamma: float, d: Point) -> int:
    tx, ty = obs.tangent(gamma)
    return 1 if d[0] * tx + d[1] * ty > 0 else -1


def _canonical_gammas(obs: InflatedObstacle, gammas: Sequence[float]) -> List[float]:
    """Sorted anchor parameters with near-duplicates merged (cyclically)."""
    out: List[float] = []
    for g in sorted(obs.wrap(g) for g in gammas):
        if out and g - out[-1] <= ANCHOR_MERGE_TOL:
            continue
        out.append(g)
    if len(out) > 1 and out[0] + obs.perimeter - out[-1] <= ANCHOR_MERGE_TOL:
        out.pop()
    return out


def _snap(canon: List[float], obs: InflatedObstacle, g: float) -> float:
    g = obs.wrap(g)
    P = obs.perimeter
    return min(canon, key=lambda c: min(abs(c - g), P - abs(c - g)))


def _assemble(obstacles, tangents, terminal_edges=(), terminals=(), direct=True) -> Roadmap:
    per_obs: Dict[int, List[float]] = {}
    for te in tangents:
        per_obs.setdefault(te.a.obstacle, []).append(te.a.gamma)
        per_obs.setdefault(te.b.obstacle, []).append(te.b.gamma)
    for te in terminal_edges:
        per_obs.setdefault(te.b.obstacle, []).append(te.b.gamma)
    canon = {k: _canonical_gammas(obstacles[k], gs) for k, gs in per_obs.items()}

    nodes: List[Node] = [Node("terminal", t.point, name=t.name) for t in terminals]
    index: Dict[Tuple[int, float, int], int] = {}
    for k in sorted(canon):
        obs = obstacles[k]
        for g in canon[k]:
            for s in (-1, 1):
                index[(k, g, s)] = len(nodes)
                nodes.append(Node("anchor", obs.point(g), k, g, s))

    def anchor_node(a: Anchor, d: Point) -> Tuple[int, float]:
        obs = obstacles[a.obstacle]
        g = _snap(canon[a.obstacle], obs, a.gamma)
        return index[(a.obstacle, g, _sense(obs, g, d))], g

    edges: List[Edge] = []
    for te in tangents:
        d = te.direction
        back = (-d[0], -d[1])
        ia, _ = anchor_node(te.a, d)
        ib, _ = anchor_node(te.b, d)
        edges.append(Edge(ia, ib, te.length, "tangent", te, te.pa, te.pb))
        ib2, _ = anchor_node(te.b, back)
        ia2, _ = anchor_node(te.a, back)
        edges.append(Edge(ib2, ia2, te.length, "tangent", te, te.pb, te.pa))

    term_idx = {t.name: i for i, t in enumerate(terminals)}
    for te in terminal_edges:
        d = te.direction
        if te.a.name == "start":
            ib, _ = anchor_node(te.b, d)
            edges.append(Edge(term_idx["start"], ib, te.length, "terminal", te, te.pa, te.pb))
        else:
            ib, _ = anchor_node(te.b, (-d[0], -d[1]))
            edges.append(Edge(ib, term_idx[te.a.name], te.length, "terminal", te, te.pb, te.pa))

    if direct and "start" in term_idx and "goal" in term_idx:
        ps, pg = terminals[term_idx["start"]].point, terminals[term_idx["goal"]].point
        L = math.dist(ps, pg)
        if L > 0 and not segment_collides((ps, pg), obstacles):
            edges.append(Edge(term_idx["start"], term_idx["goal"], L, "direct", None, ps, pg))

    for k in sorted(canon):
        gs = canon[k]
        obs = obstacles[k]
        m = len(gs)
        if m < 2:
            continue
        for i in range(m):
            g0, g1 = gs[i], gs[(i + 1) % m]
            length = obs.wrap(g1 - g0) if m > 1 else 0.0
            if length <= 0:
                continue
            edges.append(Edge(index[(k, g0, 1)], index[(k, g1, 1)], length, "arc",
                              ArcEdge(k, g0, g1, 1, length), obs.point(g0), obs.point(g1)))
            edges.append(Edge(index[(k, g1, -1)], index[(k, g0, -1)], length, "arc",
                              ArcEdge(k, g1, g0, -1, length), obs.point(g1), obs.point(g0)))
    return Roadmap(tuple(obstacles), tuple(nodes), tuple(edges), tuple(tangents),
                   tuple(terminal_edges), tuple(terminals))


def build_roadmap(obstacles: Sequence[InflatedObstacle]) -> Roadmap:
    """Tangent graph over pairwise-disjoint inflated obstacles (no terminals yet)."""
    obstacles = tuple(obstacles)
    kept = []
    for i in range(len(obstacles)):
        for j in range(i + 1, len(obstacles)):
            for te in common_tangents(obstacles[i], obstacles[j], (i, j)):
                if segment_collides((te.pa, te.pb), obstacles):
                    log.debug("tangent %s-%s blocked", i, j)
                    continue
                kept.append(te)
    return _assemble(obstacles, kept)


def attach_terminals(roadmap: Roadmap, start: Point, goal: Point) -> Roadmap:
    """Add start/goal nodes, their tangent segments and the direct segment if free."""
    start = (float(start[0]), float(start[1]))
    goal = (float(goal[0]), float(goal[1]))
    obstacles = roadmap.obstacles
    term_edges = []
    for name, q in (("start", start), ("goal", goal)):
        for k, obs in enumerate(obstacles):
            for te in point_tangents(q, obs, k, name):
                if not segment_collides((te.pa, te.pb), obstacles):
                    term_edges.append(te)
    terminals = (Terminal("start", start), Terminal("goal", goal))
    return _assemble(obstacles, roadmap.tangents, term_edges, terminals)


def kappa_m(obstacles: Sequence[InflatedObstacle]) -> float:
    """Worst perimeter-to-inradius ratio, perimeter / (4 * inradius), over obstacles."""
    if not obstacles:
        return 1.0
    return max(o.perimeter / (4.0 * min_inradius(o)) for o in obstacles)


def ellipse_filter(roadmap: Roadmap, obstacles: Sequence[InflatedObstacle], start: Point, goal: Point) -> Roadmap:
    """Drop anchor nodes outside the closed ellipse with foci start/goal."""
    K = kappa_m(obstacles)
    L = math.dist(start, goal)
    bound = K * L
    slack = 1e-12 * max(1.0, bound)
    keep = [n.kind == "terminal" or math.dist(n.point, start) + math.dist(n.point, goal) <= bound + slack
            for n in roadmap.nodes]
    remap = {}
    nodes = []
    for i, n in enumerate(roadmap.nodes):
        if keep[i]:
            remap[i] = len(nodes)
            nodes.append(n)
    edges = [Edge(remap[e.src], remap[e.dst], e.length, e.kind, e.data, e.p_from, e.p_to)
             for e in roadmap.edges if keep[e.src] and keep[e.dst]]
    log.debug("ellipse filter kept %d of %d nodes (K_m=%.4f)", len(nodes), len(roadmap.nodes), K)
    return Roadmap(roadmap.obstacles, tuple(nodes), tuple(edges), roadmap.tangents,
                   roadmap.terminal_edges, roadmap.terminals)


def c1_defect(roadmap: Roadmap) -> float:
    """Largest heading mismatch (radians) between an edge and the node it touches."""
    worst = 0.0
    for e in roadmap.edges:
        if e.kind == "arc":
            continue
        if e.length == 0:
            continue
        dx, dy = e.p_to[0] - e.p_from[0], e.p_to[1] - e.p_from[1]
        h = math.atan2(dy, dx)
        for ni in (e.src, e.dst):
            n = roadmap.nodes[ni]
            if n.kind != "anchor":
                continue
            tx, ty = roadmap.obstacles[n.obstacle].tangent(n.gamma)
            hn = math.atan2(n.sense * ty, n.sense * tx)
            worst = max(worst, abs(math.remainder(h - hn, TWO_PI)))
    return worst


# ---------------------------------------------------------------------------
# path geometry


@dataclass(frozen=True)
class Straight:
    start: Point
    end: Point

    radius = None

    @property
    def length(self) -> float:
        return math.dist(self.start, self.end)

    @property
    def heading(self) -> float:
        return math.atan2(self.end[1] - self.start[1], self.end[0] - self.start[0])

    def point_at(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        L = self.length
        f = s / L if L > 0 else np.zeros_like(s)
        x = self.start[0] + f * (self.end[0] - self.start[0])
        y = self.start[1] + f * (self.end[1] - self.start[1])
        return np.column_stack([x, y])

    def heading_at(self, s):
        return np.full(np.shape(np.atleast_1d(s)), self.heading)

    def reversed(self) -> "Straight":
        return Straight(self.end, self.start)


@dataclass(frozen=True)
class ArcSeg:
    """Piece of a vertex circle; ``sweep`` is signed (positive counterclockwise)."""

    obstacle: int
    center: Point
    radius: float
    start_angle: float
    sweep: float
    gamma_from: float = 0.0
    gamma_to: float = 0.0

    @property
    def length(self) -> float:
        return self.radius * abs(self.sweep)

    @property
    def direction(self) -> int:
        return 1 if self.sweep > 0 else -1

    def point_at(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        phi = self.start_angle + self.direction * s / self.radius
        return np.column_stack([self.center[0] + self.radius * np.cos(phi),
                                self.center[1] + self.radius * np.sin(phi)])

    def heading_at(self, s):
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return self.start_angle + self.direction * (s / self.radius + 0.5 * math.pi)

    def reversed(self) -> "ArcSeg":
        return ArcSeg(self.obstacle, self.center, self.radius, self.start_angle + self.sweep, -self.sweep,
                      self.gamma_to, self.gamma_from)

    @property
    def ccw_interval(self) -> Tuple[float, float]:
        lo = self.start_angle if self.sweep > 0 else self.start_angle + self.sweep
        return lo, abs(self.sweep)


PathSegment = Union[Straight, ArcSeg]


@dataclass(frozen=True)
class PlannedPath:
    segments: Tuple[PathSegment, ...]
    start: Point
    goal: Point
    nodes: Tuple[int, ...] = ()

    @property
    def total_length(self) -> float:
        return float(sum(s.length for s in self.segments))

    @property
    def cumulative_breaks(self) -> Tuple[float, ...]:
        out = [0.0]
        for s in self.segments:
            out.append(out[-1] + s.length)
        return tuple(out)

    @property
    def n_arcs(self) -> int:
        return sum(1 for s in self.segments if isinstance(s, ArcSeg))

    @property
    def n_straights(self) -> int:
        return sum(1 for s in self.segments if isinstance(s, Straight))

    def _locate(self, gamma: float) -> Tuple[int, float]:
        L = self.total_length
        if not (-1e-12 * max(1.0, L) <= gamma <= L * (1 + 1e-12) + 1e-12):
            raise OutOfRangeError(f"gamma={gamma} outside [0, {L}]", gamma=gamma, length=L)
        breaks = self.cumulative_breaks
        i = int(np.searchsorted(breaks, gamma, side="right")) - 1
        i = min(max(i, 0), len(self.segments) - 1)
        s = min(max(gamma - breaks[i], 0.0), self.segments[i].length)
        return i, s

    def point(self, gamma: float) -> Point:
        if not self.segments:
            if abs(gamma) > 1e-12:
                raise OutOfRangeError(f"gamma={gamma} outside [0, 0]")
            return self.start
        i, s = self._locate(gamma)
        x, y = self.segments[i].point_at(s)[0]
        return (float(x), float(y))

    def heading(self, gamma: float) -> float:
        if not self.segments:
            raise OutOfRangeError("empty path has no heading")
        i, s = self._locate(gamma)
        return float(math.remainder(float(self.segments[i].heading_at(s)[0]), TWO_PI))


def path_point(path: PlannedPath, gamma: float) -> Point:
    return path.point(gamma)


def path_heading(path: PlannedPath, gamma: float) -> float:
    return path.heading(gamma)


def _boundary_pieces(obs: InflatedObstacle, obs_id: int, g_from: float, length: float) -> List[PathSegment]:
    """Counterclockwise boundary traversal of ``length`` starting at ``g_from``."""
    out: List[PathSegment] = []
    g = obs.wrap(g_from)
    remaining = length
    guard = 0
    while remaining > 1e-12 and guard < 4 * len(obs.pieces) + 4:
        guard += 1
        i = obs.piece_index(g)
        piece = obs.pieces[i]
        local = min(max(g - piece.gamma0, 0.0), piece.length)
        take = min(piece.length - local, remaining)
        if take > 0:
            if isinstance(piece, Arc):
                a0 = piece.start_angle + local / piece.radius
                out.append(ArcSeg(obs_id, piece.center, piece.radius, a0, take / piece.radius,
                                  piece.gamma0 + local, piece.gamma0 + local + take))
            else:
                x0, y0, _, _, _ = piece.frame(local)
                x1, y1, _, _, _ = piece.frame(local + take)
                out.append(Straight((x0, y0), (x1, y1)))
        remaining -= take
        g = obs.wrap(piece.gamma0 + piece.length) if take == piece.length - local else obs.wrap(g + take)
    return out


def _merge(segs: List[PathSegment]) -> List[PathSegment]:
    out: List[PathSegment] = []
    for s in segs:
        if s.length <= 1e-12:
            continue
        if out and isinstance(s, Straight) and isinstance(out[-1], Straight):
            prev = out[-1]
            out[-1] = Straight(prev.start, s.end)
            continue
        if out and isinstance(s, ArcSeg) and isinstance(out[-1], ArcSeg):
            prev = out[-1]
            if prev.obstacle == s.obstacle and math.dist(prev.center, s.center) < 1e-12 and prev.direction == s.direction:
                out[-1] = ArcSeg(prev.obstacle, prev.center, prev.radius, prev.start_angle,
                                 prev.sweep + s.sweep, prev.gamma_from, s.gamma_to)
                continue
        out.append(s)
    return out


def _path_from_edges(roadmap: Roadmap, node_seq: List[int], edge_seq: List[Edge], start, goal) -> PlannedPath:
    raw: List[PathSegment] = []
    for e in edge_seq:
        if e.kind == "arc":
            a: ArcEdge = e.data
            obs = roadmap.obstacles[a.obstacle]
            if a.direction > 0:
                raw.extend(_boundary_pieces(obs, a.obstacle, a.gamma_from, a.length))
            else:
                pieces = _boundary_pieces(obs, a.obstacle, a.gamma_to, a.length)
                raw.extend(p.reversed() for p in reversed(pieces))
        else:
            raw.append(Straight(e.p_from, e.p_to))
    return PlannedPath(tuple(_merge(raw)), start, goal, tuple(node_seq))


def _dijkstra(roadmap: Roadmap, src: int, dst: int):
    n = len(roadmap.nodes)
    dist = [math.inf] * n
    hops = [0] * n
    pred: List[Optional[Tuple[int, int]]] = [None] * n
    done = [False] * n
    dist[src] = 0.0
    heap = [(0.0, 0, src)]
    while heap:
        d, h, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u == dst:
            break
        for k in roadmap._adjacency[u]:
            e = roadmap.edges[k]
            v = e.dst
            if done[v]:
                continue
            nd = d + e.length
            eps = 1e-12 * (1.0 + nd)
            better = nd < dist[v] - eps
            if not better and abs(nd - dist[v]) <= eps:
                better = h + 1 < hops[v] or (h + 1 == hops[v] and pred[v] is not None and u < pred[v][0])
            if better:
                dist[v], hops[v], pred[v] = nd, h + 1, (u, k)
                heapq.heappush(heap, (nd, h + 1, v))
    return dist, pred


def shortest_path(roadmap: Roadmap, start: Point, goal: Point) -> PlannedPath:
    """Minimum-length C1 path between the roadmap's terminals."""
    start = (float(start[0]), float(start[1]))
    goal = (float(goal[0]), float(goal[1]))
    if not roadmap.terminals:
        roadmap = attach_terminals(roadmap, start, goal)
    if math.dist(start, goal) == 0.0:
        return PlannedPath((), start, goal, ())
    si, gi = roadmap.terminal_index("start"), roadmap.terminal_index("goal")
    if math.dist(roadmap.nodes[si].point, start) > 1e-12 or math.dist(roadmap.nodes[gi].point, goal) > 1e-12:
        raise ValueError("roadmap terminals do not match the requested start/goal")
    dist, pred = _dijkstra(roadmap, si, gi)
    if not math.isfinite(dist[gi]):
        raise NoPathError("start and goal are not connected in the roadmap", start=start, goal=goal)
    node_seq = [gi]
    edge_seq = []
    while node_seq[-1] != si:
        u, k = pred[node_seq[-1]]
        edge_seq.append(roadmap.edges[k])
        node_seq.append(u)
    node_seq.reverse()
    edge_seq.reverse()
    return _path_from_edges(roadmap, node_seq, edge_seq, start, goal)


def plan_path(obstacles: Sequence[InflatedObstacle], start: Point, goal: Point, use_filter: bool = True):
    """Convenience pipeline: build, attach, optionally filter, search."""
    rm = attach_terminals(build_roadmap(obstacles), start, goal)
    if use_filter:
        rm = ellipse_filter(rm, obstacles, start, goal)
    return shortest_path(rm, start, goal), rm


# ---------------------------------------------------------------------------
# intersection counting

INTERSECT_TOL = 1e-9


def _param_on(seg: PathSegment, p) -> float:
    """Local arc-length parameter of point ``p`` (assumed on ``seg``)."""
    if isinstance(seg, Straight):
        L = seg.length
        dx, dy = seg.end[0] - seg.start[0], seg.end[1] - seg.start[1]
        return min(max(((p[0] - seg.start[0]) * dx + (p[1] - seg.start[1]) * dy) / L, 0.0), L)
    phi = math.atan2(p[1] - seg.center[1], p[0] - seg.center[0])
    rel = math.remainder(phi - seg.start_angle, TWO_PI) * seg.direction
    return min(max(rel * seg.radius, 0.0), seg.length)


def _on_arc(seg: ArcSeg, phi: float) -> bool:
    lo, span = seg.ccw_interval
    rel = (phi - lo) % TWO_PI
    tol = INTERSECT_TOL / seg.radius
    return rel <= span + tol or rel >= TWO_PI - tol


def _seg_seg(s1: Straight, s2: Straight):
    a = np.array(s1.start)
    r = np.array(s1.end) - a
    c = np.array(s2.start)
    q = np.array(s2.end) - c
    L1, L2 = np.linalg.norm(r), np.linalg.norm(q)
    rxq = r[0] * q[1] - r[1] * q[0]
    cma = c - a
    if abs(rxq) <= 1e-12 * L1 * L2:
        # parallel: overlap only if collinear
        if abs(r[0] * cma[1] - r[1] * cma[0]) / L1 > INTERSECT_TOL:
            return []
        t0 = float(np.dot(cma, r) / L1)
        t1 = float(np.dot(cma + q, r) / L1)
        lo, hi = max(0.0, min(t0, t1)), min(L1, max(t0, t1))
        return [(lo, hi)] if hi >= lo - INTERSECT_TOL else []
    t = (cma[0] * q[1] - cma[1] * q[0]) / rxq
    u = (cma[0] * r[1] - cma[1] * r[0]) / rxq
    if -INTERSECT_TOL / L1 <= t <= 1 + INTERSECT_TOL / L1 and -INTERSECT_TOL / L2 <= u <= 1 + INTERSECT_TOL / L2:
        s = min(max(t, 0.0), 1.0) * L1
        return [(s, s)]
    return []


def _line_circle_points(s: Straight, arc: ArcSeg):
    a = np.array(s.start)
    d = np.array(s.end) - a
    L = np.linalg.norm(d)
    d = d / L
    m = a - np.array(arc.center)
    b = float(np.dot(m, d))
    c = float(np.dot(m, m)) - arc.radius ** 2
    disc = b * b - c
    # distance from center to the line, compared with the radius
    perp = abs(m[0] * d[1] - m[1] * d[0])
    if perp > arc.radius + INTERSECT_TOL:
        return []
    if disc <= 0 or perp >= arc.radius - INTERSECT_TOL:
        ts = [-b]
    else:
        root = math.sqrt(disc)
        ts = [-b - root, -b + root]
    out = []
    for t in ts:
        if -INTERSECT_TOL <= t <= L + INTERSECT_TOL:
            p = a + min(max(t, 0.0), L) * d
            phi = math.atan2(p[1] - arc.center[1], p[0] - arc.center[0])
            if _on_arc(arc, phi):
                out.append((float(p[0]), float(p[1])))
    return out


def _arc_arc(a1: ArcSeg, a2: ArcSeg):
    """Returns ("points", [...]) or ("overlap", [(s_lo, s_hi) on a1])."""
    c1, c2 = np.array(a1.center), np.array(a2.center)
    dvec = c2 - c1
    D = float(np.linalg.norm(dvec))
    if D <= INTERSECT_TOL and abs(a1.radius - a2.radius) <= INTERSECT_TOL:
        lo1, span1 = a1.ccw_interval
        lo2, span2 = a2.ccw_interval
        off = (lo2 - lo1) % TWO_PI
        ivs = []
        tol = INTERSECT_TOL / a1.radius
        for shift in (off, off - TWO_PI):
            lo, hi = max(0.0, shift), min(span1, shift + span2)
            if hi >= lo - tol:
                ivs.append((lo, max(lo, hi)))
        out = []
        for lo, hi in ivs:
            # ccw-relative angles on a1 -> local arc length along a1's own direction
            if a1.direction > 0:
                out.append((lo * a1.radius, hi * a1.radius))
            else:
                out.append(((span1 - hi) * a1.radius, (span1 - lo) * a1.radius))
        return "overlap", out
    r1, r2 = a1.radius, a2.radius
    if D > r1 + r2 + INTERSECT_TOL or D < abs(r1 - r2) - INTERSECT_TOL or D == 0:
        return "points", []
    x = (D * D + r1 * r1 - r2 * r2) / (2 * D)
    h2 = r1 * r1 - x * x
    ex = dvec / D
    ey = np.array([-ex[1], ex[0]])
    base = c1 + x * ex
    if h2 <= (INTERSECT_TOL * max(r1, 1.0)) ** 2:
        cands = [base]
    else:
        h = math.sqrt(h2)
        cands = [base + h * ey, base - h * ey]
    out = []
    for p in cands:
        phi1 = math.atan2(p[1] - c1[1], p[0] - c1[0])
        phi2 = math.atan2(p[1] - c2[1], p[0] - c2[0])
        if _on_arc(a1, phi1) and _on_arc(a2, phi2):
            out.append((float(p[0]), float(p[1])))
    return "points", out


def _pair_intervals(s1: PathSegment, s2: PathSegment):
    """Intersection of two pieces as local-parameter intervals on ``s1``."""
    if isinstance(s1, Straight) and isinstance(s2, Straight):
        return _seg_seg(s1, s2)
    if isinstance(s1, Straight) and isinstance(s2, ArcSeg):
        return [(_param_on(s1, p),) * 2 for p in _line_circle_points(s1, s2)]
    if isinstance(s1, ArcSeg) and isinstance(s2, Straight):
        return [(_param_on(s1, p),) * 2 for p in _line_circle_points(s2, s1)]
    kind, res = _arc_arc(s1, s2)
    if kind == "overlap":
        return res
    return [(_param_on(s1, p),) * 2 for p in res]


def _bbox(seg: PathSegment):
    if isinstance(seg, Straight):
        xs, ys = (seg.start[0], seg.end[0]), (seg.start[1], seg.end[1])
        return min(xs), min(ys), max(xs), max(ys)
    cx, cy = seg.center
    r = seg.radius
    return cx - r, cy - r, cx + r, cy + r


def count_path_intersections(path1: PlannedPath, path2: PlannedPath) -> int:
    """Connected components of the intersection of the two traces."""
    if not path1.segments or not path2.segments:
        pts1 = [path1.start] if not path1.segments else None
        pts2 = [path2.start] if not path2.segments else None
        if pts1 and pts2:
            return int(math.dist(pts1[0], pts2[0]) <= INTERSECT_TOL)
        path, p = (path2, pts1[0]) if pts1 else (path1, pts2[0])
        probe = Straight(p, (p[0] + INTERSECT_TOL, p[1]))
        return int(any(_pair_intervals(probe, s) for s in path.segments))
    breaks = path1.cumulative_breaks
    boxes2 = [_bbox(s) for s in path2.segments]
    intervals = []
    for i, s1 in enumerate(path1.segments):
        b1 = _bbox(s1)
        for s2, b2 in zip(path2.segments, boxes2):
            if b1[0] > b2[2] + INTERSECT_TOL or b2[0] > b1[2] + INTERSECT_TOL or \
                    b1[1] > b2[3] + INTERSECT_TOL or b2[1] > b1[3] + INTERSECT_TOL:
                continue
            for lo, hi in _pair_intervals(s1, s2):
                intervals.append((breaks[i] + lo, breaks[i] + hi))
    if not intervals:
        return 0
    intervals.sort()
    count = 1
    cur_hi = intervals[0][1]
    for lo, hi in intervals[1:]:
        if lo > cur_hi + INTERSECT_TOL:
            count += 1
            cur_hi = hi
        else:
            cur_hi = max(cur_hi, hi)
    return count
