"""The editable, serializable roadmap and its transition-system view.

A roadmap is an undirected geometric graph drawn over a map image.  Nodes
carry proposition labels naming regions of interest; edge weights of the
derived transition system are Euclidean lengths.  Roadmap values are
immutable snapshots: every edit returns a new value.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from typing import Iterable

from .geometry import Point, dist

FORMAT_VERSION = 1

__all__ = [
    "RoadmapError",
    "RoadmapFormatError",
    "RoadmapNode",
    "Roadmap",
    "TransitionSystem",
    "add_node",
    "move_node",
    "remove_node",
    "add_edge",
    "remove_edge",
    "set_props",
    "set_start",
    "apply_edit",
    "save_roadmap",
    "load_roadmap",
    "to_transition_system",
]


class RoadmapError(ValueError):
    """An edit or derivation would violate a roadmap invariant."""


class RoadmapFormatError(ValueError):
    """A roadmap document could not be parsed."""


@dataclass(frozen=True, slots=True)
class RoadmapNode:
    id: str
    pos: Point
    props: frozenset[str] = frozenset()


@dataclass(frozen=True, slots=True)
class Roadmap:
    image_path: str = "map.png"
    image_size: tuple[int, int] = (800, 600)
    nodes: tuple[RoadmapNode, ...] = ()
    # Undirected edges stored as (min_id, max_id) pairs in insertion order.
    edges: tuple[tuple[str, str], ...] = ()
    start: str | None = None

    def node(self, node_id: str) -> RoadmapNode:
        for n in self.nodes:
            if n.id == node_id:
                return n
        raise RoadmapError("no such node")

    def has_node(self, node_id: str) -> bool:
        return any(n.id == node_id for n in self.nodes)

    def positions(self) -> dict[str, Point]:
        return {n.id: n.pos for n in self.nodes}


def _edge_key(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a <= b else (b, a)


def _check_bounds(r: Roadmap, pos: Point) -> None:
    w, h = r.image_size
    if not (0 <= pos.x <= w and 0 <= pos.y <= h):
        raise RoadmapError("position out of image bounds")


def _fresh_id(r: Roadmap) -> str:
    used = {n.id for n in r.nodes}
    k = len(r.nodes)
    while f"n{k}" in used:
        k += 1
    return f"n{k}"


def add_node(
    r: Roadmap,
    pos: Point,
    props: Iterable[str] = (),
    node_id: str | None = None,
) -> Roadmap:
    if node_id is None:
        node_id = _fresh_id(r)
    elif r.has_node(node_id):
        raise RoadmapError("node id exists")
    _check_bounds(r, pos)
    node = RoadmapNode(node_id, pos, frozenset(props))
    return replace(r, nodes=r.nodes + (node,))


def move_node(r: Roadmap, node_id: str, pos: Point) -> Roadmap:
    r.node(node_id)
    _check_bounds(r, pos)
    nodes = tuple(replace(n, pos=pos) if n.id == node_id else n for n in r.nodes)
    return replace(r, nodes=nodes)


def remove_node(r: Roadmap, node_id: str) -> Roadmap:
    r.node(node_id)
    nodes = tuple(n for n in r.nodes if n.id != node_id)
    edges = tuple(e for e in r.edges if node_id not in e)
    start = None if r.start == node_id else r.start
    return replace(r, nodes=nodes, edges=edges, start=start)


def add_edge(r: Roadmap, a: str, b: str) -> Roadmap:
    if a == b:
        raise RoadmapError("self-edge forbidden")
    r.node(a)
    r.node(b)
    key = _edge_key(a, b)
    if key in r.edges:
        raise RoadmapError("edge exists")
    return replace(r, edges=r.edges + (key,))


def remove_edge(r: Roadmap, a: str, b: str) -> Roadmap:
    key = _edge_key(a, b)
    if key not in r.edges:
        raise RoadmapError("no such edge")
    return replace(r, edges=tuple(e for e in r.edges if e != key))


def set_props(r: Roadmap, node_id: str, props: Iterable[str]) -> Roadmap:
    r.node(node_id)
    nodes = tuple(
        replace(n, props=frozenset(props)) if n.id == node_id else n for n in r.nodes
    )
    return replace(r, nodes=nodes)


def set_start(r: Roadmap, node_id: str | None) -> Roadmap:
    if node_id is not None:
        r.node(node_id)
    return replace(r, start=node_id)


def apply_edit(r: Roadmap, edit: dict) -> Roadmap:
    """Apply one edit described as a plain mapping (the wire form).

    Supported ops: add_node {x, y, props?, id?}, move_node {id, x, y},
    remove_node {id}, add_edge {a, b}, remove_edge {a, b},
    set_props {id, props}, set_start {id}.
    """
    op = edit.get("op")
    if op == "add_node":
        return add_node(
            r,
            Point(float(edit["x"]), float(edit["y"])),
            edit.get("props", ()),
            edit.get("id"),
        )
    if op == "move_node":
        return move_node(r, edit["id"], Point(float(edit["x"]), float(edit["y"])))
    if op == "remove_node":
        return remove_node(r, edit["id"])
    if op == "add_edge":
        return add_edge(r, edit["a"], edit["b"])
    if op == "remove_edge":
        return remove_edge(r, edit["a"], edit["b"])
    if op == "set_props":
        return set_props(r, edit["id"], edit["props"])
    if op == "set_start":
        return set_start(r, edit["id"])
    raise RoadmapError(f"unknown edit op {op!r}")


def roadmap_document(r: Roadmap) -> dict:
    return {
        "version": FORMAT_VERSION,
        "image": {
            "path": r.image_path,
            "width": r.image_size[0],
            "height": r.image_size[1],
        },
        "nodes": [
            {"id": n.id, "x": n.pos.x, "y": n.pos.y, "props": sorted(n.props)}
            for n in r.nodes
        ],
        "edges": [[a, b] for a, b in r.edges],
        "start": r.start,
    }


def save_roadmap(r: Roadmap) -> bytes:
    return (json.dumps(roadmap_document(r), indent=2, sort_keys=True) + "\n").encode(
        "utf-8"
    )


def _reject_unknown(obj: dict, allowed: set[str], ctx: str) -> None:
    for key in obj:
        if key not in allowed:
            raise RoadmapFormatError(f"unexpected key {key!r} in {ctx}")


def _require(obj: dict, key: str, ctx: str):
    if key not in obj:
        raise RoadmapFormatError(f"missing key {key!r} in {ctx}")
    return obj[key]


def _coord(value, ctx: str) -> float:
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise RoadmapFormatError(f"non-numeric coordinate in {ctx}")
    value = float(value)
    if not math.isfinite(value):
        raise RoadmapFormatError(f"non-finite coordinate in {ctx}")
    return value


def roadmap_from_document(doc) -> Roadmap:
    if not isinstance(doc, dict):
        raise RoadmapFormatError("document is not an object")
    _reject_unknown(doc, {"version", "image", "nodes", "edges", "start"}, "document")
    version = _require(doc, "version", "document")
    if version != FORMAT_VERSION:
        raise RoadmapFormatError("unsupported version")

    image = _require(doc, "image", "document")
    if not isinstance(image, dict):
        raise RoadmapFormatError("'image' is not an object")
    _reject_unknown(image, {"path", "width", "height"}, "image")
    path = _require(image, "path", "image")
    width = _require(image, "width", "image")
    height = _require(image, "height", "image")
    if not isinstance(path, str):
        raise RoadmapFormatError("image path is not a string")

    r = Roadmap(image_path=path, image_size=(width, height))

    nodes_doc = _require(doc, "nodes", "document")
    if not isinstance(nodes_doc, list):
        raise RoadmapFormatError("'nodes' is not a list")
    nodes = []
    seen = set()
    for nd in nodes_doc:
        if not isinstance(nd, dict):
            raise RoadmapFormatError("node entry is not an object")
        _reject_unknown(nd, {"id", "x", "y", "props"}, "node")
        node_id = _require(nd, "id", "node")
        if not isinstance(node_id, str) or not node_id:
            raise RoadmapFormatError("node id is not a non-empty string")
        if node_id in seen:
            raise RoadmapFormatError(f"duplicate node id {node_id!r}")
        seen.add(node_id)
        pos = Point(_coord(_require(nd, "x", "node"), f"node {node_id!r}"),
                    _coord(_require(nd, "y", "node"), f"node {node_id!r}"))
        props = nd.get("props", [])
        if not isinstance(props, list) or not all(isinstance(p, str) for p in props):
            raise RoadmapFormatError(f"props of node {node_id!r} is not a string list")
        nodes.append(RoadmapNode(node_id, pos, frozenset(props)))
    r = replace(r, nodes=tuple(nodes))
    for n in nodes:
        _check_bounds(r, n.pos)

    edges_doc = _require(doc, "edges", "document")
    if not isinstance(edges_doc, list):
        raise RoadmapFormatError("'edges' is not a list")
    edges = []
    for ed in edges_doc:
        if not isinstance(ed, list) or len(ed) != 2:
            raise RoadmapFormatError("edge entry is not a pair")
        a, b = ed
        if a not in seen or b not in seen:
            raise RoadmapFormatError("unknown node in edge")
        if a == b:
            raise RoadmapFormatError("self-edge forbidden")
        key = _edge_key(a, b)
        if key in edges:
            raise RoadmapFormatError("duplicate edge")
        edges.append(key)
    r = replace(r, edges=tuple(edges))

    start = _require(doc, "start", "document")
    if start is not None:
        if start not in seen:
            raise RoadmapFormatError("unknown start node")
    return replace(r, start=start)


def load_roadmap(data: bytes | str) -> Roadmap:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise RoadmapFormatError(f"invalid document: {e.msg} at offset {e.pos}") from e
    return roadmap_from_document(doc)


@dataclass(frozen=True)
class TransitionSystem:
    """Directed, weighted, proposition-labeled view of a roadmap.

    Node positions ride along because walk matching measures point-to-edge
    distances in the map plane.
    """

    states: tuple[str, ...]
    q_init: str
    transitions: tuple[tuple[str, str], ...]
    alphabet: frozenset[str]
    labels: dict[str, frozenset[str]]
    weights: dict[tuple[str, str], float]
    positions: dict[str, Point]
    adj: dict[str, tuple[str, ...]]


def to_transition_system(r: Roadmap) -> TransitionSystem:
    """Build the transition system: symmetric closure of the roadmap edges,
    Euclidean edge weights, node props as labels."""
    if r.start is None:
        raise RoadmapError("start node unset")
    positions = r.positions()
    states = tuple(sorted(positions))
    labels = {n.id: n.props for n in r.nodes}
    transitions: list[tuple[str, str]] = []
    weights: dict[tuple[str, str], float] = {}
    neighbors: dict[str, set[str]] = {q: set() for q in states}
    for a, b in r.edges:
        w = dist(positions[a], positions[b])
        if w <= 0.0:
            raise RoadmapError(f"zero-length edge {a}-{b}")
        for u, v in ((a, b), (b, a)):
            transitions.append((u, v))
            weights[(u, v)] = w
            neighbors[u].add(v)
    alphabet = frozenset().union(*labels.values()) if labels else frozenset()
    return TransitionSystem(
        states=states,
        q_init=r.start,
        transitions=tuple(sorted(transitions)),
        alphabet=alphabet,
        labels=labels,
        weights=weights,
        positions=positions,
        adj={q: tuple(sorted(neighbors[q])) for q in states},
    )
