"""Preference-biased planning on the product automaton.

Preferred paths (matched sketches) get their endpoint transitions biased
to a tiny weight so the accepting-run search favors them, and are then
spliced into the plan wherever the automaton can stutter through their
interior labels.  The specification always wins: a substitution that
would break it is rejected and the plan falls back to roadmap shortest
paths, and the finished plan is re-checked against the formula.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field, replace

from .automata import (
    AcceptingLasso,
    BuchiAutomaton,
    ProductAutomaton,
    PState,
    UnsatisfiableError,
    plan_lasso,
)
from .ltl.formulas import Formula, eval_lasso
from .roadmap import TransitionSystem

__all__ = [
    "PreferredPath",
    "PlannerConfig",
    "PlanSegment",
    "Plan",
    "default_alpha",
    "bias_weights",
    "valid_substitution",
    "ts_shortest_path",
    "extended_planner",
    "plan_document",
    "plan_labels",
    "audit_plan",
]


@dataclass(frozen=True)
class PreferredPath:
    """A walk between two region nodes, endpoints included."""

    start: str
    end: str
    waypoints: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.waypoints) < 2:
            raise ValueError("preferred path needs at least 2 waypoints")
        if self.waypoints[0] != self.start or self.waypoints[-1] != self.end:
            raise ValueError("waypoints must start and end at the endpoints")


@dataclass(frozen=True)
class PlannerConfig:
    """``alpha`` is the bias weight; it must be small enough that a path
    of only biased edges always beats a single unbiased edge."""

    alpha: float

    def __post_init__(self) -> None:
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")


def default_alpha(pa: ProductAutomaton) -> float:
    w_min = min(pa.weights.values(), default=1.0)
    return w_min / (2.0 * (len(pa.weights) + 1))


def _alpha_bound(pa: ProductAutomaton) -> float:
    w_min = min(pa.weights.values(), default=1.0)
    return w_min / (len(pa.weights) + 1)


def bias_weights(
    pa: ProductAutomaton, preferred, cfg: PlannerConfig
) -> ProductAutomaton:
    """New product with every transition whose roadmap projection matches
    a preferred path's endpoints set to weight alpha.  Paths between
    non-adjacent regions change nothing.  Topology is untouched."""
    if not cfg.alpha < _alpha_bound(pa):
        raise ValueError("alpha too large for this product")
    endpoint_pairs = {(p.start, p.end) for p in preferred}
    weights = dict(pa.weights)
    for (a, b) in weights:
        if (a[0], b[0]) in endpoint_pairs:
            weights[(a, b)] = cfg.alpha
    return replace(pa, weights=weights)


def valid_substitution(
    path: PreferredPath,
    s_h: str,
    s_m: str,
    ba: BuchiAutomaton,
    labels: dict[str, frozenset[str]],
) -> bool:
    """Whether the automaton can consume the path's interior labels by
    stuttering at ``s_h`` and then reach ``s_m`` on the final node's
    label.  With no interior waypoints this is just the endpoint check."""
    loops = [g for (src, g, dst) in ba.transitions if src == s_h and dst == s_h]
    for node in path.waypoints[1:-1]:
        label = labels[node]
        if not any(g.satisfied_by(label) for g in loops):
            return False
    final_label = labels[path.waypoints[-1]]
    return any(
        g.satisfied_by(final_label)
        for (src, g, dst) in ba.transitions
        if src == s_h and dst == s_m
    )


def ts_shortest_path(ts: TransitionSystem, a: str, b: str) -> tuple[str, ...]:
    """Deterministic shortest path; ties prefer fewer hops, then the
    lexicographically smallest node sequence."""
    counter = itertools.count()
    heap = [(0.0, 1, (a,), next(counter))]
    settled: set[str] = set()
    while heap:
        cost, _, path, _ = heapq.heappop(heap)
        node = path[-1]
        if node == b:
            return path
        if node in settled:
            continue
        settled.add(node)
        for nxt in ts.adj[node]:
            if nxt not in settled:
                heapq.heappush(
                    heap,
                    (cost + ts.weights[(node, nxt)], len(path) + 1, path + (nxt,), next(counter)),
                )
    raise UnsatisfiableError(f"no path from {a} to {b} in the transition system")


@dataclass(frozen=True)
class PlanSegment:
    src: PState
    dst: PState
    source: str  # "preferred" | "fallback"
    waypoints: tuple[str, ...]


@dataclass
class Plan:
    prefix: tuple[str, ...]
    suffix: tuple[str, ...]
    formula: Formula | None
    segments: tuple[PlanSegment, ...]
    stats: dict = field(default_factory=dict)


def _expand(
    pairs,
    preferred,
    pa: ProductAutomaton,
    ts: TransitionSystem,
) -> list[PlanSegment]:
    segments = []
    for a, b in pairs:
        q_h, s_h = a
        q_m, s_m = b
        chosen = None
        for p in preferred:
            if (
                p.start == q_h
                and p.end == q_m
                and valid_substitution(p, s_h, s_m, pa.ba, ts.labels)
            ):
                chosen = p
                break
        if chosen is not None:
            segments.append(PlanSegment(a, b, "preferred", chosen.waypoints))
        else:
            segments.append(PlanSegment(a, b, "fallback", ts_shortest_path(ts, q_h, q_m)))
    return segments


def _assemble(segments, anchor_node: str) -> tuple[str, ...]:
    nodes: list[str] = []
    for seg in segments:
        nodes.extend(seg.waypoints[:-1])
    nodes.append(anchor_node)
    return tuple(nodes)


def plan_labels(
    plan: Plan, ts: TransitionSystem
) -> tuple[list[frozenset[str]], list[frozenset[str]]]:
    prefix = [ts.labels[q] for q in plan.prefix]
    if plan.suffix:
        cycle = [ts.labels[q] for q in plan.suffix]
    else:
        cycle = [ts.labels[plan.prefix[-1]]]
    return prefix, cycle


def audit_plan(plan: Plan, ts: TransitionSystem) -> bool:
    """Re-check the produced label sequence against the formula; a finite
    plan is audited as parking forever on its last node."""
    prefix, cycle = plan_labels(plan, ts)
    return eval_lasso(plan.formula, prefix, cycle)


def extended_planner(
    pa: ProductAutomaton,
    ts: TransitionSystem,
    preferred,
    cfg: PlannerConfig | None = None,
    formula: Formula | None = None,
) -> Plan:
    """Plan an accepting run on the bias-weighted product and splice in
    preferred paths wherever they validly substitute a run transition.

    The output label sequence is re-verified against the formula; if a
    substitution ever broke it the plan is rebuilt without preferences,
    so the returned plan always satisfies the specification.
    """
    preferred = tuple(preferred)
    cfg = cfg or PlannerConfig(alpha=default_alpha(pa))

    def build(with_preferred) -> Plan:
        biased = bias_weights(pa, with_preferred, cfg) if with_preferred else pa
        lasso = plan_lasso(biased)
        prefix_pairs = list(zip(lasso.prefix, lasso.prefix[1:]))
        segments = _expand(prefix_pairs, with_preferred, pa, ts)
        anchor = lasso.prefix[-1]
        prefix_nodes = _assemble(segments, anchor[0]) if segments else (anchor[0],)
        suffix_nodes: tuple[str, ...] = ()
        cycle_segments: list[PlanSegment] = []
        if lasso.suffix:
            cycle_pairs = list(zip((anchor,) + lasso.suffix, lasso.suffix))
            cycle_segments = _expand(cycle_pairs, with_preferred, pa, ts)
            # The cycle starts right after the anchor, which already ends
            # the prefix, and runs back around to it.
            suffix_nodes = _assemble(cycle_segments, anchor[0])[1:]
        plan = Plan(
            prefix=prefix_nodes,
            suffix=suffix_nodes,
            formula=formula,
            segments=tuple(segments + cycle_segments),
        )
        return plan

    plan = build(preferred)
    if formula is not None and not audit_plan(plan, ts):
        # The specification outranks the sketch: drop the preferences.
        plan = build(())
        if not audit_plan(plan, ts):
            raise UnsatisfiableError("plan fails its own specification audit")
    return plan


def plan_document(plan: Plan) -> dict:
    return {
        "prefix": list(plan.prefix),
        "suffix": list(plan.suffix),
        "formula": _formula_text(plan.formula),
        "segments": [
            {
                "from": seg.src[0],
                "to": seg.dst[0],
                "source": seg.source,
                "waypoints": list(seg.waypoints),
            }
            for seg in plan.segments
        ],
        "stats": {
            "bmp_ms": plan.stats.get("bmp_ms", 0.0),
            "plan_ms": plan.stats.get("plan_ms", 0.0),
            "cwpd": plan.stats.get("cwpd", []),
        },
    }


def _formula_text(f: Formula | None) -> str | None:
    from .ltl.formulas import format_formula

    return None if f is None else format_formula(f)
