"""Batch planner and benchmark harness.

``sketchplan plan`` runs the full pipeline on roadmap/spec/sketch files
and writes the plan document plus a timing report; ``sketchplan serve``
starts the HTTP service.  Exit codes: 0 success, 1 I/O or parse error,
2 planning infeasible (unsatisfiable spec or unmatchable sketch).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .automata import UnsatisfiableError, build_product, ltl_to_buchi
from .geometry import Point, SamplingParams
from .ltl.formulas import FormulaSyntaxError, parse_formula
from .ltl.spec_graph import (
    SpecGraphError,
    SpecGraphFormatError,
    graph_to_formula,
    load_spec_graph,
)
from .matching import MatchConfig, MatchError, match_stroke
from .planner import PreferredPath, extended_planner, plan_document
from .roadmap import RoadmapError, RoadmapFormatError, load_roadmap, to_transition_system

__all__ = ["main"]


class _InputError(Exception):
    pass


class _PlanningError(Exception):
    pass


def _read(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as e:
        raise _InputError(f"cannot read {path}: {e}") from e


def _load_sketches(path: str) -> tuple[list[list[Point]], SamplingParams | None]:
    try:
        doc = json.loads(_read(path).decode("utf-8"))
    except json.JSONDecodeError as e:
        raise _InputError(f"invalid sketch fixture {path}: {e.msg} at offset {e.pos}")
    if not isinstance(doc, dict) or "strokes" not in doc:
        raise _InputError(f"sketch fixture {path} needs a 'strokes' list")
    strokes = []
    for stroke in doc["strokes"]:
        try:
            strokes.append([Point(float(p["x"]), float(p["y"])) for p in stroke])
        except (KeyError, TypeError, ValueError) as e:
            raise _InputError(f"bad stroke point in {path}: {e}")
    params = None
    if doc.get("params") is not None:
        raw = doc["params"]
        try:
            params = SamplingParams(
                d_m=float(raw.get("d_m", 20.0)), theta_m=float(raw.get("theta_m", 20.0))
            )
        except (TypeError, ValueError) as e:
            raise _InputError(f"bad params in {path}: {e}")
    return strokes, params


def _collapse_repeats(walk) -> tuple[str, ...]:
    out = [walk[0]]
    for q in walk[1:]:
        if q != out[-1]:
            out.append(q)
    return tuple(out)


def _run_plan(args) -> int:
    try:
        roadmap = load_roadmap(_read(args.roadmap))
        if args.formula is not None:
            formula = parse_formula(args.formula)
        else:
            spec = load_spec_graph(_read(args.spec))
            formula = graph_to_formula(spec)
        ts = to_transition_system(roadmap)
    except (
        _InputError,
        RoadmapFormatError,
        RoadmapError,
        SpecGraphFormatError,
        SpecGraphError,
        FormulaSyntaxError,
    ) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    strokes: list[list[Point]] = []
    params = None
    if args.sketches:
        try:
            strokes, params = _load_sketches(args.sketches)
        except _InputError as e:
            print(f"error: {e}", file=sys.stderr)
            return 1

    cfg = MatchConfig(mode=args.mode)
    reps = args.reps

    preferred = []
    cwpds = []
    bmp_times = []
    sizes = []
    try:
        for stroke in strokes:
            sampled = walk = value = used = None
            for _ in range(reps):
                sampled, walk, value, bmp_ms, used = match_stroke(
                    stroke, roadmap, ts, params, cfg
                )
                bmp_times.append(bmp_ms)
            sizes.append(len(sampled.points))
            cwpds.append(value)
            waypoints = _collapse_repeats(walk)
            if len(waypoints) >= 2:
                preferred.append(
                    PreferredPath(sampled.q_start, sampled.q_end, waypoints)
                )
    except (MatchError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    try:
        ba = ltl_to_buchi(formula)
        pa = build_product(ts, ba)
        plan = None
        plan_times = []
        for _ in range(reps):
            t0 = time.perf_counter()
            plan = extended_planner(pa, ts, preferred, formula=formula)
            plan_times.append((time.perf_counter() - t0) * 1000.0)
    except UnsatisfiableError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    bmp_ms_mean = sum(bmp_times) / len(bmp_times) if bmp_times else 0.0
    plan_ms_mean = sum(plan_times) / len(plan_times)
    plan.stats = {"bmp_ms": bmp_ms_mean, "plan_ms": plan_ms_mean, "cwpd": cwpds}

    doc = plan_document(plan)
    out_text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    try:
        Path(args.out).write_text(out_text, encoding="utf-8")
    except OSError as e:
        print(f"error: cannot write {args.out}: {e}", file=sys.stderr)
        return 1

    report = {
        "bmp_ms_mean": bmp_ms_mean,
        "plan_ms_mean": plan_ms_mean,
        "N": sum(sizes) / len(sizes) if sizes else 0,
        "M": len(ts.states),
        "reps": reps,
    }
    report_text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.stats:
        try:
            Path(args.stats).write_text(report_text, encoding="utf-8")
        except OSError as e:
            print(f"error: cannot write {args.stats}: {e}", file=sys.stderr)
            return 1
    else:
        sys.stdout.write(report_text)
    return 0


def _run_serve(args) -> int:
    import uvicorn

    from .service.api import create_app
    from .service.sessions import SessionStore

    app = create_app(SessionStore(snapshot_dir=args.snapshot_dir))
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sketchplan")
    sub = parser.add_subparsers(dest="command", required=True)

    plan = sub.add_parser("plan", help="run the batch planning pipeline")
    plan.add_argument("--roadmap", required=True, help="roadmap file")
    spec_group = plan.add_mutually_exclusive_group(required=True)
    spec_group.add_argument("--spec", help="spec graph file")
    spec_group.add_argument("--formula", help="formula text instead of a spec file")
    plan.add_argument("--sketches", help="sketch fixture file")
    plan.add_argument("--reps", type=int, default=1, help="timing repetitions")
    plan.add_argument("--mode", choices=("paper", "exact"), default="paper")
    plan.add_argument("--out", required=True, help="plan document output path")
    plan.add_argument("--stats", help="stats report output path (default: stdout)")
    plan.set_defaults(func=_run_plan)

    serve = sub.add_parser("serve", help="start the HTTP service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--snapshot-dir", default=None)
    serve.set_defaults(func=_run_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "plan" and args.reps < 1:
        print("error: --reps must be >= 1", file=sys.stderr)
        return 1
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
