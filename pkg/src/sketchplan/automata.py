"""Büchi automata: formula translation, roadmap product, accepting runs.

The translation builds the closure tableau: states are consistent truth
assignments to the formula's atoms and temporal subformulas, transitions
enforce the one-step expansion laws, and one acceptance set per
eventuality yields a generalized automaton that is then degeneralized
with a counter.  The construction is deliberately the simple, provable
one; automaton size is a non-goal.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass

from .ltl.formulas import (
    Always,
    And,
    Atom,
    Formula,
    Future,
    Implies,
    Next,
    Not,
    Or,
    Until,
    format_formula,
)
from .roadmap import TransitionSystem

__all__ = [
    "UnsatisfiableError",
    "Guard",
    "BuchiAutomaton",
    "ProductAutomaton",
    "AcceptingLasso",
    "ltl_to_buchi",
    "lasso_accepted",
    "build_product",
    "shortest_accepting_run",
    "stutter_accepting_states",
    "plan_lasso",
    "ba_to_dot",
    "product_to_dot",
]

MAX_ELEMENTARY = 10

PState = tuple[str, str]


class UnsatisfiableError(RuntimeError):
    pass


@dataclass(frozen=True, slots=True)
class Guard:
    """Conjunction of proposition literals; the letter alphabet 2^Pi is
    represented by which proposition sets satisfy the cube."""

    must_true: frozenset[str] = frozenset()
    must_false: frozenset[str] = frozenset()

    def satisfied_by(self, props) -> bool:
        return self.must_true <= props and not (self.must_false & props)

    def text(self) -> str:
        parts = [p for p in sorted(self.must_true)]
        parts += [f"!{p}" for p in sorted(self.must_false)]
        return " && ".join(parts) if parts else "true"


@dataclass(frozen=True)
class BuchiAutomaton:
    states: tuple[str, ...]
    initial: tuple[str, ...]
    transitions: tuple[tuple[str, Guard, str], ...]
    accepting: frozenset[str]
    atoms: frozenset[str]

    def by_src(self) -> dict[str, list[tuple[Guard, str]]]:
        out: dict[str, list[tuple[Guard, str]]] = {s: [] for s in self.states}
        for src, guard, dst in self.transitions:
            out[src].append((guard, dst))
        return out


def _subformulas(f: Formula) -> list[Formula]:
    seen: dict[Formula, None] = {}

    def walk(g: Formula) -> None:
        if g in seen:
            return
        if isinstance(g, (Not, Next, Future, Always)):
            walk(g.sub)
        elif isinstance(g, (And, Or, Implies, Until)):
            walk(g.left)
            walk(g.right)
        seen[g] = None

    walk(f)
    return list(seen)


def ltl_to_buchi(f: Formula) -> BuchiAutomaton:
    """Language-correct translation; states are pruned to those that can
    still contribute to an accepted run."""
    closure = _subformulas(f)
    base = [
        g for g in closure if isinstance(g, (Atom, Next, Future, Always, Until))
    ]
    base.sort(key=format_formula)
    if len(base) > MAX_ELEMENTARY:
        raise ValueError(
            f"formula too large for tableau translation "
            f"({len(base)} elementary subformulas, limit {MAX_ELEMENTARY})"
        )
    index = {g: i for i, g in enumerate(base)}

    def truth(g: Formula, bits: tuple[bool, ...]) -> bool:
        if isinstance(g, (Atom, Next, Future, Always, Until)):
            return bits[index[g]]
        if isinstance(g, Not):
            return not truth(g.sub, bits)
        if isinstance(g, And):
            return truth(g.left, bits) and truth(g.right, bits)
        if isinstance(g, Or):
            return truth(g.left, bits) or truth(g.right, bits)
        if isinstance(g, Implies):
            return (not truth(g.left, bits)) or truth(g.right, bits)
        raise TypeError(f"not a formula: {g!r}")

    futures = [g for g in base if isinstance(g, Future)]
    alwayses = [g for g in base if isinstance(g, Always)]
    untils = [g for g in base if isinstance(g, Until)]
    nexts = [g for g in base if isinstance(g, Next)]
    atoms = sorted(g.name for g in base if isinstance(g, Atom))

    def consistent(bits: tuple[bool, ...]) -> bool:
        for g in futures:
            if truth(g.sub, bits) and not bits[index[g]]:
                return False
        for g in alwayses:
            if bits[index[g]] and not truth(g.sub, bits):
                return False
        for g in untils:
            holds = bits[index[g]]
            if truth(g.right, bits) and not holds:
                return False
            if holds and not (truth(g.right, bits) or truth(g.left, bits)):
                return False
        return True

    assignments = [
        bits
        for bits in itertools.product((False, True), repeat=len(base))
        if consistent(bits)
    ]

    def follows(a: tuple[bool, ...], b: tuple[bool, ...]) -> bool:
        for g in nexts:
            if a[index[g]] != truth(g.sub, b):
                return False
        for g in futures:
            if a[index[g]] != (truth(g.sub, a) or b[index[g]]):
                return False
        for g in alwayses:
            if a[index[g]] != (truth(g.sub, a) and b[index[g]]):
                return False
        for g in untils:
            if a[index[g]] != (
                truth(g.right, a) or (truth(g.left, a) and b[index[g]])
            ):
                return False
        return True

    def guard_of(bits: tuple[bool, ...]) -> Guard:
        true = frozenset(p for p in atoms if bits[index[Atom(p)]])
        return Guard(must_true=true, must_false=frozenset(atoms) - true)

    initials = [bits for bits in assignments if truth(f, bits)]

    # Reachability over the generalized automaton.
    reachable: list[tuple[bool, ...]] = []
    seen = set()
    frontier = list(initials)
    for bits in frontier:
        seen.add(bits)
    while frontier:
        nxt = []
        for a in frontier:
            for b in assignments:
                if b not in seen and follows(a, b):
                    seen.add(b)
                    nxt.append(b)
        reachable.extend(frontier)
        frontier = nxt
    reachable.sort()

    # Eventualities owed along a run: a true F/U must reach its goal, and
    # a false G must reach a violation of its body.
    eventualities: list[tuple[str, Formula, Formula]] = [
        ("F", g, g.sub) for g in futures
    ]
    eventualities += [("U", g, g.right) for g in untils]
    eventualities += [("G", g, g.sub) for g in alwayses]
    eventualities.sort(key=lambda trip: format_formula(trip[1]))
    k = len(eventualities)

    def in_acc_set(bits: tuple[bool, ...], i: int) -> bool:
        kind, ev, goal = eventualities[i]
        if kind == "G":
            return bits[index[ev]] or not truth(goal, bits)
        return (not bits[index[ev]]) or truth(goal, bits)

    # Degeneralize with a counter waiting on acceptance set i; with no
    # eventualities every run is accepting.
    if k == 0:
        dg_states = [(bits, 0) for bits in reachable]
        dg_initial = [(bits, 0) for bits in initials if bits in seen]
        dg_accepting = set(dg_states)

        def advance(bits: tuple[bool, ...], i: int) -> int:
            return 0

    else:
        dg_states = [(bits, i) for bits in reachable for i in range(k)]
        dg_initial = [(bits, 0) for bits in initials if bits in seen]
        dg_accepting = {
            (bits, k - 1) for bits in reachable if in_acc_set(bits, k - 1)
        }

        def advance(bits: tuple[bool, ...], i: int) -> int:
            return (i + 1) % k if in_acc_set(bits, i) else i

    succ_bits: dict[tuple[bool, ...], list[tuple[bool, ...]]] = {
        a: [b for b in reachable if follows(a, b)] for a in reachable
    }
    dg_succ: dict[tuple, list[tuple]] = {}
    for a, i in dg_states:
        j = advance(a, i)
        dg_succ[(a, i)] = [(b, j) for b in succ_bits[a]]

    # Keep only states that can reach a cyclic strongly connected
    # component containing an accepting state; the rest cannot lie on an
    # accepted run.
    live = _productive_states(dg_states, dg_succ, dg_accepting)
    dg_states = [s for s in dg_states if s in live]
    dg_initial = [s for s in dg_initial if s in live]
    if not dg_initial:
        return BuchiAutomaton(
            states=(),
            initial=(),
            transitions=(),
            accepting=frozenset(),
            atoms=frozenset(atoms),
        )

    # Destination-read encoding: every transition is guarded by the claims
    # of the state being entered, and a dedicated entry state reads the
    # first letter.  A run therefore verifies each state's proposition
    # claims on entry, which is what lets product runs end (or stutter)
    # at a state without leaving guesses about the next label unchecked.
    names = {s: f"s{i}" for i, s in enumerate(sorted(dg_states))}
    entry = "init"
    transitions = [(entry, guard_of(s[0]), names[s]) for s in dg_initial]
    for s in dg_states:
        for t in dg_succ[s]:
            if t in live:
                transitions.append((names[s], guard_of(t[0]), names[t]))
    transitions.sort(key=lambda tr: (tr[0], tr[2], tr[1].text()))
    return BuchiAutomaton(
        states=tuple(sorted([entry, *(names[s] for s in dg_states)])),
        initial=(entry,),
        transitions=tuple(transitions),
        accepting=frozenset(names[s] for s in dg_accepting if s in live),
        atoms=frozenset(atoms),
    )


def _productive_states(states, succ, accepting) -> set:
    """States with a path to a cycle through an accepting state."""
    # Strongly connected components via Kosaraju (iterative).
    order = []
    seen = set()
    for root in states:
        if root in seen:
            continue
        stack = [(root, iter(succ[root]))]
        seen.add(root)
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append((nxt, iter(succ[nxt])))
                    advanced = True
                    break
            if not advanced:
                order.append(node)
                stack.pop()
    pred: dict = {s: [] for s in states}
    for s in states:
        for t in succ[s]:
            pred[t].append(s)
    comp: dict = {}
    for root in reversed(order):
        if root in comp:
            continue
        stack = [root]
        comp[root] = root
        members = [root]
        while stack:
            node = stack.pop()
            for p in pred[node]:
                if p not in comp:
                    comp[p] = root
                    stack.append(p)
                    members.append(p)

    members_of: dict = {}
    for s, c in comp.items():
        members_of.setdefault(c, []).append(s)
    viable_roots = set()
    for c, members in members_of.items():
        cyclic = len(members) > 1 or members[0] in succ[members[0]]
        if cyclic and any(m in accepting for m in members):
            viable_roots.add(c)

    # Backward closure from viable components.
    live = {s for s in states if comp[s] in viable_roots}
    frontier = list(live)
    while frontier:
        nxt = []
        for s in frontier:
            for p in pred[s]:
                if p not in live:
                    live.add(p)
                    nxt.append(p)
        frontier = nxt
    return live


def _letter_rows(
    ba: BuchiAutomaton, by_src: dict, idx: dict, letter: frozenset
) -> list[int]:
    rows = [0] * len(ba.states)
    for s, outs in by_src.items():
        mask = 0
        for guard, dst in outs:
            if guard.satisfied_by(letter):
                mask |= 1 << idx[dst]
        rows[idx[s]] = mask
    return rows


def _step(mask: int, rows: list[int]) -> int:
    out = 0
    while mask:
        low = mask & -mask
        out |= rows[low.bit_length() - 1]
        mask ^= low
    return out


def lasso_accepted(ba: BuchiAutomaton, prefix, cycle) -> bool:
    """Whether the automaton accepts the infinite word prefix·cycle^ω,
    where letters are proposition sets."""
    if not cycle:
        raise ValueError("cycle required")
    if not ba.states:
        return False
    idx = {s: i for i, s in enumerate(ba.states)}
    by_src = ba.by_src()
    n = len(ba.states)
    acc_mask = 0
    for s in ba.accepting:
        acc_mask |= 1 << idx[s]

    row_cache: dict[frozenset, list[int]] = {}

    def rows_for(letter) -> list[int]:
        key = frozenset(letter)
        rows = row_cache.get(key)
        if rows is None:
            rows = _letter_rows(ba, by_src, idx, key)
            row_cache[key] = rows
        return rows

    reach = 0
    for s in ba.initial:
        reach |= 1 << idx[s]
    for letter in prefix:
        reach = _step(reach, rows_for(letter))
        if not reach:
            return False

    # One-cycle-block relations: all paths, and paths visiting acceptance.
    a_rel = [1 << i for i in range(n)]
    b_rel = [(1 << i) & acc_mask for i in range(n)]
    for letter in cycle:
        rows = rows_for(letter)
        a_new = [_step(a_rel[i], rows) for i in range(n)]
        b_new = [_step(b_rel[i], rows) | (a_new[i] & acc_mask) for i in range(n)]
        a_rel, b_rel = a_new, b_new

    closure = [a_rel[i] | (1 << i) for i in range(n)]
    changed = True
    while changed:
        changed = False
        for i in range(n):
            merged = _step(closure[i], closure)
            if merged | closure[i] != closure[i]:
                closure[i] |= merged
                changed = True

    # Accepts iff some state reachable from the post-prefix set closes a
    # cycle of whole-cycle blocks at least one of which visits acceptance.
    candidates = _step(reach, closure)
    while candidates:
        low = candidates & -candidates
        q = low.bit_length() - 1
        candidates ^= low
        through_acc = _step(closure[q], b_rel)
        if _step(through_acc, closure) & (1 << q):
            return True
    return False


@dataclass(frozen=True)
class ProductAutomaton:
    """Synchronized composition of a transition system and an automaton.

    A product state pairs a roadmap node with an automaton state; moving
    along a roadmap edge consumes the label of the node being entered.
    The initial states are those the automaton can reach by consuming the
    initial node's label, so plans account for where the robot starts.
    """

    states: tuple[PState, ...]
    initial: tuple[PState, ...]
    transitions: dict[PState, tuple[PState, ...]]
    weights: dict[tuple[PState, PState], float]
    accepting: frozenset[PState]
    ts: TransitionSystem
    ba: BuchiAutomaton


@dataclass(frozen=True)
class AcceptingLasso:
    """A finite prefix plus an optional cycle; the cycle, when present,
    starts right after the prefix's last state and ends back at it."""

    prefix: tuple[PState, ...]
    suffix: tuple[PState, ...]


def build_product(
    ts: TransitionSystem, ba: BuchiAutomaton, prune: bool = True
) -> ProductAutomaton:
    by_src = ba.by_src()
    labels = ts.labels

    initial = sorted(
        {
            (ts.q_init, dst)
            for s0 in ba.initial
            for guard, dst in by_src.get(s0, ())
            if guard.satisfied_by(labels[ts.q_init])
        }
    )

    def successors(state: PState) -> list[PState]:
        q, s = state
        out = set()
        for q2 in ts.adj[q]:
            label = labels[q2]
            for guard, s2 in by_src.get(s, ()):
                if guard.satisfied_by(label):
                    out.add((q2, s2))
        return sorted(out)

    if prune:
        states = list(initial)
        seen = set(states)
        transitions: dict[PState, tuple[PState, ...]] = {}
        frontier = list(initial)
        while frontier:
            nxt = []
            for state in frontier:
                succ = tuple(successors(state))
                transitions[state] = succ
                for t in succ:
                    if t not in seen:
                        seen.add(t)
                        nxt.append(t)
            states.extend(nxt)
            frontier = nxt
        states = sorted(seen)
    else:
        states = sorted((q, s) for q in ts.states for s in ba.states)
        transitions = {state: tuple(successors(state)) for state in states}

    weights = {
        (a, b): ts.weights[(a[0], b[0])]
        for a, succ in transitions.items()
        for b in succ
    }
    accepting = frozenset(s for s in states if s[1] in ba.accepting)
    return ProductAutomaton(
        states=tuple(states),
        initial=tuple(initial),
        transitions=transitions,
        weights=weights,
        accepting=accepting,
        ts=ts,
        ba=ba,
    )


def _dijkstra(
    transitions: dict, weights: dict, sources
) -> tuple[dict, dict]:
    dist: dict = {}
    parent: dict = {}
    counter = itertools.count()
    heap = [(0.0, s, next(counter), None) for s in sorted(sources)]
    heapq.heapify(heap)
    while heap:
        d, state, _, par = heapq.heappop(heap)
        if state in dist:
            continue
        dist[state] = d
        parent[state] = par
        for succ in transitions.get(state, ()):
            if succ not in dist:
                heapq.heappush(
                    heap, (d + weights[(state, succ)], succ, next(counter), state)
                )
    return dist, parent


def _path_from_parents(parent: dict, end) -> list:
    path = [end]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    path.reverse()
    return path


def _stutter_guards(pa: ProductAutomaton, state: PState) -> bool:
    """Whether the automaton can keep consuming this node's label forever."""
    q, s = state
    label = pa.ts.labels[q]
    for src, guard, dst in pa.ba.transitions:
        if src == s and dst == s and guard.satisfied_by(label):
            return True
    return False


def stutter_accepting_states(pa: ProductAutomaton) -> list[PState]:
    """Accepting states where a finite run may legitimately end: the
    automaton must be able to park there, consuming the node's own label
    forever, so acceptance never rests on an unverified guess about the
    next label."""
    return sorted(s for s in pa.accepting if _stutter_guards(pa, s))


def shortest_accepting_run(pa: ProductAutomaton) -> list[PState]:
    """Minimum-weight path from an initial state to an accepting state
    where the run may end; an already-accepting initial state yields a
    single-state run."""
    if not pa.initial:
        raise UnsatisfiableError("specification unsatisfiable on this roadmap")
    dist, parent = _dijkstra(pa.transitions, pa.weights, pa.initial)
    hits = [s for s in stutter_accepting_states(pa) if s in dist]
    if not hits:
        raise UnsatisfiableError("specification unsatisfiable on this roadmap")
    best = min(hits, key=lambda s: (dist[s], s))
    return _path_from_parents(parent, best)


def plan_lasso(pa: ProductAutomaton) -> AcceptingLasso:
    """Cheapest accepting behavior: prefix cost plus cycle cost, where an
    accepting state whose automaton component can stutter on the node's
    label counts as a zero-cost cycle and yields a finite plan."""
    if not pa.initial:
        raise UnsatisfiableError("specification unsatisfiable")
    dist, parent = _dijkstra(pa.transitions, pa.weights, pa.initial)
    reachable_acc = sorted(s for s in pa.accepting if s in dist)
    if not reachable_acc:
        raise UnsatisfiableError("specification unsatisfiable")

    reverse: dict[PState, list[PState]] = {s: [] for s in pa.states}
    for a, succ in pa.transitions.items():
        for b in succ:
            reverse[b].append(a)
    rweights = {(b, a): w for (a, b), w in pa.weights.items()}

    best_key = None
    best: tuple | None = None
    for f in reachable_acc:
        if _stutter_guards(pa, f):
            key = (dist[f], 0, f)
            if best_key is None or key < best_key:
                best_key = key
                best = (f, None, None)
        rdist, rparent = _dijkstra(reverse, rweights, [f])
        cycle_cost = None
        first_hop = None
        for u in pa.transitions.get(f, ()):
            if u not in rdist:
                continue
            c = pa.weights[(f, u)] + rdist[u]
            if cycle_cost is None or (c, u) < (cycle_cost, first_hop):
                cycle_cost = c
                first_hop = u
        if cycle_cost is not None:
            key = (dist[f] + cycle_cost, 1, f)
            if best_key is None or key < best_key:
                best_key = key
                best = (f, first_hop, rparent)
    if best is None:
        raise UnsatisfiableError("specification unsatisfiable")

    f, first_hop, rparent = best
    prefix = tuple(_path_from_parents(parent, f))
    if first_hop is None:
        return AcceptingLasso(prefix=prefix, suffix=())
    back = _path_from_parents(rparent, first_hop)
    back.reverse()  # now first_hop ... f
    return AcceptingLasso(prefix=prefix, suffix=tuple(back))


def ba_to_dot(ba: BuchiAutomaton) -> str:
    lines = ["digraph buchi {", "  rankdir=LR;"]
    for s in ba.states:
        shape = "doublecircle" if s in ba.accepting else "circle"
        lines.append(f'  "{s}" [shape={shape}];')
    for i, s in enumerate(ba.initial):
        lines.append(f'  "_init{i}" [shape=point];')
        lines.append(f'  "_init{i}" -> "{s}";')
    for src, guard, dst in ba.transitions:
        lines.append(f'  "{src}" -> "{dst}" [label="{guard.text()}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def product_to_dot(pa: ProductAutomaton) -> str:
    def name(state: PState) -> str:
        return f"{state[0]}|{state[1]}"

    lines = ["digraph product {", "  rankdir=LR;"]
    for s in pa.states:
        shape = "doublecircle" if s in pa.accepting else "circle"
        lines.append(f'  "{name(s)}" [shape={shape}];')
    for i, s in enumerate(pa.initial):
        lines.append(f'  "_init{i}" [shape=point];')
        lines.append(f'  "_init{i}" -> "{name(s)}";')
    for a, succ in sorted(pa.transitions.items()):
        for b in succ:
            w = pa.weights[(a, b)]
            lines.append(f'  "{name(a)}" -> "{name(b)}" [label="{w:.1f}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
