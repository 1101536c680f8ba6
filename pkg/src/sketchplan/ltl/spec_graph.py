"""Graphical LTL specs: node/edge graphs with operator-labeled edges.

Nodes are colored green (visit) or red (avoid) and carry a formula
label.  Each edge carries up to three operator slots: a connective
``bo2``, an inner temporal operator ``to2`` applied to the target
subtree, and an outer temporal operator ``to1`` wrapping the whole
clause.  The allowed slot combinations are data-driven (see
``data/edge_ops.json``) so they can be adjusted without code changes.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

from ..geometry import Point
from ..roadmap import Roadmap
from .formulas import (
    Always,
    And,
    Atom,
    Formula,
    FormulaSyntaxError,
    Future,
    Implies,
    Next,
    Not,
    Or,
    Until,
    format_formula,
    parse_formula,
)

__all__ = [
    "SpecGraphError",
    "SpecGraphFormatError",
    "SpecNode",
    "SpecEdge",
    "SpecGraph",
    "LEGAL_EDGE_OPS",
    "validate_spec_graph",
    "graph_to_formula",
    "default_spec_graph",
    "spec_graph_document",
    "save_spec_graph",
    "load_spec_graph",
]

BO2_VALUES = (None, "AND", "OR", "IMPLIES")
TO2_VALUES = (None, "NEXT", "UNTIL", "FUTURE", "ALWAYS")
TO1_VALUES = (None, "FUTURE", "ALWAYS")


class SpecGraphError(ValueError):
    pass


class SpecGraphFormatError(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class SpecNode:
    id: str
    pos: Point
    color: str  # "green" (visit) or "red" (avoid)
    label: Formula


@dataclass(frozen=True, slots=True)
class SpecEdge:
    src: str
    dst: str
    bo2: str | None = None
    to2: str | None = None
    to1: str | None = None
    order: int = 0


@dataclass(frozen=True, slots=True)
class SpecGraph:
    nodes: tuple[SpecNode, ...] = ()
    edges: tuple[SpecEdge, ...] = ()
    start: str | None = None


def _load_edge_ops_table() -> frozenset[tuple[str | None, str | None, str | None]]:
    raw = resources.files("sketchplan").joinpath("data/edge_ops.json").read_text()
    doc = json.loads(raw)
    table = set()
    for bo2, to2, to1 in doc["allowed"]:
        table.add((bo2, to2, to1))
    return frozenset(table)


LEGAL_EDGE_OPS = _load_edge_ops_table()


def validate_spec_graph(g: SpecGraph, table=None) -> list[str]:
    """Structural violations as data; an empty list means translatable."""
    table = LEGAL_EDGE_OPS if table is None else table
    violations: list[str] = []
    ids = set()
    for n in g.nodes:
        if n.id in ids:
            violations.append(f"duplicate node id {n.id!r}")
        ids.add(n.id)
        if n.color not in ("green", "red"):
            violations.append(f"invalid color {n.color!r} on node {n.id!r}")
    if g.start is None:
        violations.append("start node unset")
    elif g.start not in ids:
        violations.append("unknown start node")
    colors = {n.id: n.color for n in g.nodes}
    for e in g.edges:
        if e.src not in ids or e.dst not in ids:
            violations.append("unknown node in edge")
            continue
        if (e.bo2, e.to2, e.to1) not in table:
            violations.append(
                f"illegal operator combination ({e.bo2}, {e.to2}, {e.to1}) "
                f"on edge {e.src}->{e.dst}"
            )
        if e.to2 == "UNTIL" and colors.get(e.src) == "red":
            violations.append("red node used as edge source of an UNTIL")
    return violations


def _node_formula(n: SpecNode) -> Formula:
    return n.label if n.color == "green" else Not(n.label)


def graph_to_formula(g: SpecGraph, table=None) -> Formula:
    """Translate a valid spec graph into a formula.

    Each tree edge u->v yields the clause to1( node(u) bo2 to2( sub(v) ) ),
    where sub(v) recurses over v's outgoing tree edges and sibling clauses
    are joined by AND.  An absent bo2 means AND; UNTIL builds
    (node(u) U sub(v)) in place of the connective.  A back-edge into an
    ancestor wraps that ancestor's to2-term in G; a back-edge into the
    start wraps the whole formula.
    """
    violations = validate_spec_graph(g, table)
    if violations:
        raise SpecGraphError("invalid spec graph: " + "; ".join(violations))

    nodes = {n.id: n for n in g.nodes}
    out_edges: dict[str, list[SpecEdge]] = {n.id: [] for n in g.nodes}
    for e in sorted(g.edges, key=lambda e: e.order):
        out_edges[e.src].append(e)

    back_targets: set[str] = set()
    visited: set[str] = set()
    on_stack: set[str] = set()

    def sub(u: str) -> Formula:
        visited.add(u)
        on_stack.add(u)
        clauses: list[Formula] = []
        for e in out_edges[u]:
            v = e.dst
            if v in on_stack:
                back_targets.add(v)
                continue
            if v in visited:
                raise SpecGraphError("unsupported cyclic structure")
            sv = sub(v)
            if e.to2 == "UNTIL":
                term: Formula = Until(_node_formula(nodes[u]), sv)
            elif e.to2 == "NEXT":
                term = Next(sv)
            elif e.to2 == "FUTURE":
                term = Future(sv)
            elif e.to2 == "ALWAYS":
                term = Always(sv)
            else:
                term = sv
            if v in back_targets:
                term = Always(term)
            if e.to2 == "UNTIL":
                clause = term
            else:
                nf = _node_formula(nodes[u])
                bo = e.bo2 or "AND"
                if bo == "AND":
                    clause = And(nf, term)
                elif bo == "OR":
                    clause = Or(nf, term)
                else:
                    clause = Implies(nf, term)
            if e.to1 == "FUTURE":
                clause = Future(clause)
            elif e.to1 == "ALWAYS":
                clause = Always(clause)
            clauses.append(clause)
        on_stack.discard(u)
        if not clauses:
            return _node_formula(nodes[u])
        out = clauses[0]
        for c in clauses[1:]:
            out = And(out, c)
        return out

    root = sub(g.start)
    if g.start in back_targets:
        root = Always(root)
    return root


def default_spec_graph(r: Roadmap, q_start: str, q_end: str) -> SpecGraph:
    """Guessed default spec for a sketch: visit the end region eventually,
    starting from the start region.  Both endpoints must be labeled."""

    def region_atom(node_id: str) -> Atom:
        props = sorted(r.node(node_id).props)
        if not props:
            raise SpecGraphError(f"node {node_id!r} carries no propositions")
        return Atom(props[0])

    start_node = SpecNode("v0", r.node(q_start).pos, "green", region_atom(q_start))
    if q_start == q_end:
        return SpecGraph(nodes=(start_node,), edges=(), start="v0")
    end_node = SpecNode("v1", r.node(q_end).pos, "green", region_atom(q_end))
    edge = SpecEdge("v0", "v1", bo2="AND", to2="FUTURE", to1=None, order=0)
    return SpecGraph(nodes=(start_node, end_node), edges=(edge,), start="v0")


def spec_graph_document(g: SpecGraph) -> dict:
    return {
        "nodes": [
            {
                "id": n.id,
                "x": n.pos.x,
                "y": n.pos.y,
                "color": n.color,
                "label": format_formula(n.label),
            }
            for n in g.nodes
        ],
        "edges": [
            {"from": e.src, "to": e.dst, "bo2": e.bo2, "to2": e.to2, "to1": e.to1}
            for e in sorted(g.edges, key=lambda e: e.order)
        ],
        "start": g.start,
    }


def save_spec_graph(g: SpecGraph) -> bytes:
    return (json.dumps(spec_graph_document(g), indent=2, sort_keys=True) + "\n").encode(
        "utf-8"
    )


def _reject_unknown(obj: dict, allowed: set[str], ctx: str) -> None:
    for key in obj:
        if key not in allowed:
            raise SpecGraphFormatError(f"unexpected key {key!r} in {ctx}")


def _require(obj: dict, key: str, ctx: str):
    if key not in obj:
        raise SpecGraphFormatError(f"missing key {key!r} in {ctx}")
    return obj[key]


def spec_graph_from_document(doc) -> SpecGraph:
    if not isinstance(doc, dict):
        raise SpecGraphFormatError("document is not an object")
    _reject_unknown(doc, {"nodes", "edges", "start"}, "document")
    nodes_doc = _require(doc, "nodes", "document")
    edges_doc = _require(doc, "edges", "document")
    start = _require(doc, "start", "document")
    if not isinstance(nodes_doc, list) or not isinstance(edges_doc, list):
        raise SpecGraphFormatError("'nodes' and 'edges' must be lists")

    nodes = []
    for nd in nodes_doc:
        if not isinstance(nd, dict):
            raise SpecGraphFormatError("node entry is not an object")
        _reject_unknown(nd, {"id", "x", "y", "color", "label"}, "node")
        node_id = _require(nd, "id", "node")
        color = _require(nd, "color", "node")
        label_text = _require(nd, "label", "node")
        try:
            label = parse_formula(label_text)
        except FormulaSyntaxError as e:
            raise SpecGraphFormatError(
                f"bad label on node {node_id!r}: {e}"
            ) from e
        nodes.append(
            SpecNode(
                node_id,
                Point(float(_require(nd, "x", "node")), float(_require(nd, "y", "node"))),
                color,
                label,
            )
        )

    edges = []
    for i, ed in enumerate(edges_doc):
        if not isinstance(ed, dict):
            raise SpecGraphFormatError("edge entry is not an object")
        _reject_unknown(ed, {"from", "to", "bo2", "to2", "to1"}, "edge")
        ops = {}
        for slot, allowed in (("bo2", BO2_VALUES), ("to2", TO2_VALUES), ("to1", TO1_VALUES)):
            value = ed.get(slot)
            if value not in allowed:
                raise SpecGraphFormatError(f"bad {slot} value {value!r}")
            ops[slot] = value
        edges.append(
            SpecEdge(
                _require(ed, "from", "edge"),
                _require(ed, "to", "edge"),
                bo2=ops["bo2"],
                to2=ops["to2"],
                to1=ops["to1"],
                order=i,
            )
        )
    return SpecGraph(nodes=tuple(nodes), edges=tuple(edges), start=start)


def load_spec_graph(data: bytes | str) -> SpecGraph:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as e:
        raise SpecGraphFormatError(
            f"invalid document: {e.msg} at offset {e.pos}"
        ) from e
    return spec_graph_from_document(doc)
