"""Match a sketched stroke to a walk on the roadmap.

The similarity measure is a component-wise path distance: the stroke is
resampled to N points and a candidate walk is stretched to the same
length by repeating nodes; the cost is the sum over positions of the
distance from the i-th stroke point to the edge the walk is traversing
there.  ``find_bmp`` searches for a least-cost walk either with the
per-node greedy table (``mode="paper"``) or with an exact dynamic program
keyed by the walk's last directed edge (``mode="exact"``).  Walks may be
cyclic and may revisit nodes, so plain shortest-path search does not
apply.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Sequence

from .geometry import (
    Point,
    SamplingParams,
    Segment,
    dist,
    point_segment_distance,
    sample_stroke,
)
from .roadmap import Roadmap, TransitionSystem

ORACLE_LIMIT = 10_000_000

__all__ = [
    "MatchError",
    "SampledPath",
    "MatchConfig",
    "build_sampled_path",
    "cwpd",
    "find_bmp",
    "brute_force_bmp",
    "is_walk",
]


class MatchError(ValueError):
    pass


@dataclass(frozen=True)
class SampledPath:
    """A resampled stroke with its endpoints snapped to roadmap nodes.

    The first point sits at the position of ``q_start`` and the last at
    ``q_end``.
    """

    points: tuple[Point, ...]
    q_start: str
    q_end: str

    def __post_init__(self) -> None:
        if len(self.points) < 2:
            raise MatchError("sampled path needs at least 2 points")

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True)
class MatchConfig:
    mode: str = "paper"  # "paper" (greedy per-node table) or "exact"
    forbid_immediate_edge_repeat: bool = True
    snap_radius: float = 50.0

    def __post_init__(self) -> None:
        if self.mode not in ("paper", "exact"):
            raise ValueError(f"unknown match mode {self.mode!r}")
        if not self.snap_radius > 0:
            raise ValueError("snap_radius must be > 0")


def _nearest_node(r: Roadmap, p: Point) -> tuple[str, float]:
    best = min(((dist(p, n.pos), n.id) for n in r.nodes))
    return best[1], best[0]


def build_sampled_path(
    raw: Sequence[Point],
    r: Roadmap,
    params: SamplingParams | None = None,
    cfg: MatchConfig | None = None,
) -> SampledPath:
    """Resample a raw stroke and snap its endpoints to the nearest nodes."""
    params = params or SamplingParams()
    cfg = cfg or MatchConfig()
    if not r.nodes:
        raise MatchError("no nodes")
    if not raw:
        raise ValueError("empty stroke")
    q_start, d_start = _nearest_node(r, raw[0])
    q_end, d_end = _nearest_node(r, raw[-1])
    if d_start > cfg.snap_radius or d_end > cfg.snap_radius:
        raise MatchError("unsnappable endpoint")
    sampled = sample_stroke(raw, params)
    positions = r.positions()
    points = (positions[q_start], *sampled, positions[q_end])
    return SampledPath(points=points, q_start=q_start, q_end=q_end)


def is_walk(nodes: Sequence[str], adj: dict[str, tuple[str, ...]]) -> bool:
    """True iff consecutive entries are equal or adjacent and all exist."""
    if not nodes:
        return False
    if any(q not in adj for q in nodes):
        return False
    for a, b in zip(nodes, nodes[1:]):
        if a != b and b not in adj[a]:
            return False
    return True


def _points_of(p0) -> list[Point]:
    if isinstance(p0, SampledPath):
        return list(p0.points)
    return list(p0)


def cwpd(p0, walk: Sequence[str], r: Roadmap) -> float:
    """Component-wise path distance between a point sequence and an
    equal-length walk.

    Each stroke point is measured against the segment from the walk's
    last distinct node to its current node; while the walk has not yet
    moved, the degenerate segment at the current node is used.
    """
    pts = _points_of(p0)
    if len(walk) != len(pts):
        raise MatchError("walk/path length mismatch")
    positions = r.positions()
    neighbors: dict[str, set[str]] = {n.id: set() for n in r.nodes}
    for a, b in r.edges:
        neighbors[a].add(b)
        neighbors[b].add(a)
    for q in walk:
        if q not in positions:
            raise MatchError("not a walk")
    for a, b in zip(walk, walk[1:]):
        if a != b and b not in neighbors[a]:
            raise MatchError("not a walk")

    total = 0.0
    prev: str | None = None
    for i, node in enumerate(walk):
        if i > 0 and walk[i - 1] != node:
            prev = walk[i - 1]
        src = prev if prev is not None else node
        total += point_segment_distance(pts[i], Segment(positions[src], positions[node]))
    return total


def _segment(ts: TransitionSystem, a: str, b: str) -> Segment:
    return Segment(ts.positions[a], ts.positions[b])


def find_bmp(
    p0: SampledPath,
    ts: TransitionSystem,
    cfg: MatchConfig | None = None,
) -> tuple[list[str], float]:
    """Best matching walk of length N from ``q_start`` to ``q_end``.

    ``mode="paper"`` runs the greedy table keyed by end node only; its
    stay cost depends on the stored walk's arrival edge, so the table is
    not Markovian and the result may be suboptimal.  ``mode="exact"``
    keys the table by (position, last directed edge) and returns the
    global minimum.  Ties prefer staying over moving, then the lowest
    source node id.
    """
    cfg = cfg or MatchConfig()
    if p0.q_start not in ts.adj or p0.q_end not in ts.adj:
        raise MatchError("endpoint not in transition system")
    if cfg.mode == "exact":
        walk, value, _ = _exact_bmp(p0, ts)
        return walk, value
    return _paper_bmp(p0, ts, cfg.forbid_immediate_edge_repeat)


def _paper_bmp(
    p0: SampledPath, ts: TransitionSystem, forbid_repeat: bool
) -> tuple[list[str], float]:
    pts = p0.points
    n = len(pts)
    inf = float("inf")

    # Per node: cost, arrival edge (last-distinct predecessor, node), parent node.
    cost = {q: inf for q in ts.states}
    edge: dict[str, tuple[str, str]] = {}
    cost[p0.q_start] = 0.0
    edge[p0.q_start] = (p0.q_start, p0.q_start)
    parents: list[dict[str, str]] = []

    for i in range(1, n):
        new_cost = {q: inf for q in ts.states}
        new_edge: dict[str, tuple[str, str]] = {}
        parent: dict[str, str] = {}
        # Stays first so that on ties a repetition beats a move.
        for j in ts.states:
            if cost[j] == inf:
                continue
            e_prev = edge[j]
            c = cost[j] + point_segment_distance(pts[i], _segment(ts, *e_prev))
            if c < new_cost[j]:
                new_cost[j] = c
                new_edge[j] = e_prev
                parent[j] = j
        for j in ts.states:
            if cost[j] == inf:
                continue
            e_prev = edge[j]
            base = cost[j]
            for k in ts.adj[j]:
                if forbid_repeat and {j, k} == set(e_prev):
                    continue
                c = base + point_segment_distance(pts[i], _segment(ts, j, k))
                if c < new_cost[k]:
                    new_cost[k] = c
                    new_edge[k] = (j, k)
                    parent[k] = j
        cost, edge = new_cost, new_edge
        parents.append(parent)

    if cost[p0.q_end] == float("inf"):
        raise MatchError("no feasible matching path")
    walk = [p0.q_end]
    for parent in reversed(parents):
        walk.append(parent[walk[-1]])
    walk.reverse()
    return walk, cost[p0.q_end]


def _exact_bmp(
    p0: SampledPath, ts: TransitionSystem
) -> tuple[list[str], float, list[float]]:
    """Exact DP over (current node, last distinct predecessor) states.

    Also returns the per-position table minima, which are non-decreasing
    because all cost terms are non-negative.
    """
    pts = p0.points
    n = len(pts)

    State = tuple[str, str | None]
    start: State = (p0.q_start, None)
    cost: dict[State, float] = {
        start: point_segment_distance(pts[0], _segment(ts, p0.q_start, p0.q_start))
    }
    parents: list[dict[State, State]] = []
    minima = [min(cost.values())]

    for i in range(1, n):
        new_cost: dict[State, float] = {}
        parent: dict[State, State] = {}
        ordered = sorted(cost, key=lambda s: (s[0], s[1] or ""))
        for state in ordered:
            c_node, p_node = state
            src = p_node if p_node is not None else c_node
            c = cost[state] + point_segment_distance(pts[i], _segment(ts, src, c_node))
            if c < new_cost.get(state, float("inf")):
                new_cost[state] = c
                parent[state] = state
        for state in ordered:
            c_node, _ = state
            base = cost[state]
            for k in ts.adj[c_node]:
                nxt: State = (k, c_node)
                c = base + point_segment_distance(pts[i], _segment(ts, c_node, k))
                if c < new_cost.get(nxt, float("inf")):
                    new_cost[nxt] = c
                    parent[nxt] = state
        cost = new_cost
        parents.append(parent)
        if not cost:
            raise MatchError("no feasible matching path")
        minima.append(min(cost.values()))

    finals = [s for s in cost if s[0] == p0.q_end]
    if not finals:
        raise MatchError("no feasible matching path")
    best = min(finals, key=lambda s: (cost[s], s[1] or ""))
    value = cost[best]
    states = [best]
    for parent in reversed(parents):
        states.append(parent[states[-1]])
    states.reverse()
    walk = [s[0] for s in states]
    return walk, value, minima


def brute_force_bmp(
    p0: SampledPath, ts: TransitionSystem
) -> tuple[list[str], float]:
    """Exhaustive minimum over all length-N walks from q_start to q_end.

    Test oracle; ties break lexicographically on the node-id sequence.
    Refuses instances whose candidate count would exceed ORACLE_LIMIT.
    """
    pts = p0.points
    n = len(pts)
    branching = 1 + max((len(ts.adj[q]) for q in ts.states), default=0)
    if branching ** n > ORACLE_LIMIT:
        raise MatchError("oracle limit exceeded")

    # Hop distances to q_end for feasibility pruning (exactness preserved:
    # only provably dead branches are cut).
    hops = {p0.q_end: 0}
    frontier = [p0.q_end]
    while frontier:
        nxt = []
        for q in frontier:
            for u in ts.adj[q]:
                if u not in hops:
                    hops[u] = hops[q] + 1
                    nxt.append(u)
        frontier = nxt

    best_cost = float("inf")
    best_walk: list[str] | None = None
    positions = ts.positions

    def rec(node: str, idx: int, prev: str | None, acc: float, path: list[str]) -> None:
        nonlocal best_cost, best_walk
        src = prev if prev is not None else node
        acc += point_segment_distance(
            pts[idx], Segment(positions[src], positions[node])
        )
        if acc >= best_cost:
            return
        if idx == n - 1:
            if node == p0.q_end:
                best_cost = acc
                best_walk = list(path)
            return
        remaining = n - 1 - idx
        for nxt in sorted((node, *ts.adj[node])):
            if hops.get(nxt, n) > remaining:
                continue
            path.append(nxt)
            rec(nxt, idx + 1, prev if nxt == node else node, acc, path)
            path.pop()

    if hops.get(p0.q_start, n) <= n - 1:
        rec(p0.q_start, 0, None, 0.0, [p0.q_start])
    if best_walk is None:
        raise MatchError("no feasible matching path")
    return best_walk, best_cost


def match_stroke(
    raw: Sequence[Point],
    r: Roadmap,
    ts: TransitionSystem,
    params: SamplingParams | None = None,
    cfg: MatchConfig | None = None,
    max_densify: int = 3,
) -> tuple[SampledPath, list[str], float, float, SamplingParams]:
    """Sample, snap, and match a stroke, densifying on infeasibility.

    When no length-N walk exists the sample distance is halved and the
    stroke resampled, up to ``max_densify`` times.  Returns the sampled
    path, the walk, its distance value, the matching time in ms, and the
    sampling params actually used.
    """
    params = params or SamplingParams()
    cfg = cfg or MatchConfig()
    attempt = 0
    while True:
        sampled = build_sampled_path(raw, r, params, cfg)
        t0 = time.perf_counter()
        try:
            walk, value = find_bmp(sampled, ts, cfg)
        except MatchError as e:
            if "no feasible matching path" in str(e) and attempt < max_densify:
                attempt += 1
                params = replace(params, d_m=params.d_m / 2.0)
                continue
            raise
        bmp_ms = (time.perf_counter() - t0) * 1000.0
        return sampled, walk, value, bmp_ms, params
