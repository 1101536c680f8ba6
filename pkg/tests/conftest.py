"""Shared fixtures: the corridor-ring environment, spec graphs for the
two reference missions, and random instance generators."""

from __future__ import annotations

import math
import random

import pytest

from sketchplan.geometry import Point, dist
from sketchplan.ltl.formulas import Atom
from sketchplan.ltl.spec_graph import SpecEdge, SpecGraph, SpecNode
from sketchplan.roadmap import (
    Roadmap,
    add_edge,
    add_node,
    set_start,
    to_transition_system,
)


def build_roadmap(image_size, nodes, edges, start, image_path="corridor.png"):
    r = Roadmap(image_path=image_path, image_size=image_size)
    for node_id, x, y, props in nodes:
        r = add_node(r, Point(float(x), float(y)), props, node_id)
    for a, b in edges:
        r = add_edge(r, a, b)
    return set_start(r, start)


def corridor_ring() -> Roadmap:
    """Six-node two-lane corridor: start region q0 on the left, region q1
    on the lower lane, goal region q2 on the right."""
    return build_roadmap(
        image_size=(430, 185),
        nodes=[
            ("n0", 40, 90, {"q0"}),
            ("n1", 130, 40, set()),
            ("n2", 130, 140, {"q1"}),
            ("n3", 260, 40, set()),
            ("n4", 260, 140, set()),
            ("n5", 390, 90, {"q2"}),
        ],
        edges=[
            ("n0", "n1"),
            ("n0", "n2"),
            ("n1", "n3"),
            ("n2", "n4"),
            ("n3", "n4"),
            ("n3", "n5"),
            ("n4", "n5"),
        ],
        start="n0",
    )


@pytest.fixture
def ring_roadmap() -> Roadmap:
    return corridor_ring()


@pytest.fixture
def ring_ts(ring_roadmap):
    return to_transition_system(ring_roadmap)


def visit_sequence_spec() -> SpecGraph:
    """Head to q1 right after q0 and reach q2 eventually."""
    return SpecGraph(
        nodes=(
            SpecNode("v0", Point(40, 90), "green", Atom("q0")),
            SpecNode("v1", Point(130, 140), "green", Atom("q1")),
            SpecNode("v2", Point(390, 90), "green", Atom("q2")),
        ),
        edges=(
            SpecEdge("v0", "v1", bo2="IMPLIES", to2="NEXT", to1=None, order=0),
            SpecEdge("v0", "v2", bo2="AND", to2="FUTURE", to1=None, order=1),
        ),
        start="v0",
    )


def patrol_spec() -> SpecGraph:
    """Start at q0, then keep alternating visits to q1 and q2 forever."""
    return SpecGraph(
        nodes=(
            SpecNode("v0", Point(40, 90), "green", Atom("q0")),
            SpecNode("v1", Point(130, 140), "green", Atom("q1")),
            SpecNode("v2", Point(390, 90), "green", Atom("q2")),
        ),
        edges=(
            SpecEdge("v0", "v1", bo2="AND", to2="FUTURE", to1=None, order=0),
            SpecEdge("v1", "v2", bo2="AND", to2="FUTURE", to1=None, order=1),
            SpecEdge("v2", "v1", order=2),  # loop back: patrol forever
        ),
        start="v0",
    )


def polyline_points(waypoints, step=1.0) -> list[Point]:
    """Dense stroke along a polyline, one point every ``step`` pixels,
    corner points included exactly."""
    pts: list[Point] = []
    for a, b in zip(waypoints, waypoints[1:]):
        seg = dist(a, b)
        n = max(1, int(seg // step))
        for i in range(n):
            t = i / n
            p = Point(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t)
            if not pts or p != pts[-1]:
                pts.append(p)
    if not pts or pts[-1] != waypoints[-1]:
        pts.append(waypoints[-1])
    return pts


def resample_exact(waypoints, n) -> list[Point]:
    """Exactly ``n`` points spaced evenly by arc length along a polyline."""
    assert n >= 2
    lengths = [dist(a, b) for a, b in zip(waypoints, waypoints[1:])]
    total = sum(lengths)
    out = []
    for k in range(n):
        d = total * k / (n - 1)
        walked = 0.0
        for (a, b), seg in zip(zip(waypoints, waypoints[1:]), lengths):
            if walked + seg >= d or (a, b) == (waypoints[-2], waypoints[-1]):
                t = 0.0 if seg == 0 else min(1.0, (d - walked) / seg)
                out.append(Point(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t))
                break
            walked += seg
    return out


def random_connected_roadmap(
    rng: random.Random,
    n_nodes: int,
    image=(400, 300),
    extra_edges: int = 2,
    prop_assignment=None,
) -> Roadmap:
    """Random planar-ish geometry: a random spanning tree plus a few extra
    edges, guaranteed connected, nodes well separated."""
    nodes = []
    positions = []
    while len(positions) < n_nodes:
        p = (rng.uniform(5, image[0] - 5), rng.uniform(5, image[1] - 5))
        if all(math.hypot(p[0] - q[0], p[1] - q[1]) > 10 for q in positions):
            positions.append(p)
    for i, (x, y) in enumerate(positions):
        props = set()
        if prop_assignment:
            props = prop_assignment(i, n_nodes)
        nodes.append((f"n{i}", x, y, props))

    edges = set()
    ids = [f"n{i}" for i in range(n_nodes)]
    connected = [ids[0]]
    for node_id in ids[1:]:
        edges.add(tuple(sorted((node_id, rng.choice(connected)))))
        connected.append(node_id)
    attempts = 0
    while len(edges) < n_nodes - 1 + extra_edges and attempts < 50:
        a, b = rng.sample(ids, 2)
        edges.add(tuple(sorted((a, b))))
        attempts += 1
    return build_roadmap(image, nodes, sorted(edges), start=ids[0])


def random_walk(ts, rng: random.Random, length: int, start=None) -> list[str]:
    node = start or rng.choice(ts.states)
    walk = [node]
    while len(walk) < length:
        options = [node] + list(ts.adj[node])
        node = rng.choice(options)
        walk.append(node)
    return walk
