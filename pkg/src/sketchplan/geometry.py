"""Planar geometry primitives and stroke resampling.

All coordinates are map-image pixels; the physical scale of the map is
metadata kept by callers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

__all__ = [
    "Point",
    "Segment",
    "SamplingParams",
    "dist",
    "point_segment_distance",
    "sample_stroke",
]


@dataclass(frozen=True, slots=True)
class Point:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")


@dataclass(frozen=True, slots=True)
class Segment:
    """Closed segment; a == b is allowed and stands in for a single node."""

    a: Point
    b: Point


@dataclass(frozen=True, slots=True)
class SamplingParams:
    """Stroke resampling thresholds.

    A raw point is kept once the arc length since the last kept point
    reaches ``d_m`` pixels or the accumulated heading change reaches
    ``theta_m`` degrees.
    """

    d_m: float = 20.0
    theta_m: float = 20.0

    def __post_init__(self) -> None:
        if not self.d_m > 0:
            raise ValueError("d_m must be > 0")
        if not 0 < self.theta_m < 180:
            raise ValueError("theta_m must be in (0, 180)")


def dist(p: Point, q: Point) -> float:
    return math.hypot(p.x - q.x, p.y - q.y)


def point_segment_distance(p: Point, s: Segment) -> float:
    """Euclidean distance from ``p`` to the closest point of the closed
    segment ``s``; for a degenerate segment this is the distance to its
    single point."""
    ax, ay = s.a.x, s.a.y
    dx, dy = s.b.x - ax, s.b.y - ay
    length_sq = dx * dx + dy * dy
    if length_sq == 0.0:
        return math.hypot(p.x - ax, p.y - ay)
    t = ((p.x - ax) * dx + (p.y - ay) * dy) / length_sq
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return math.hypot(p.x - (ax + t * dx), p.y - (ay + t * dy))


def _bearing(p: Point, q: Point) -> float:
    return math.degrees(math.atan2(q.y - p.y, q.x - p.x))


def _turn(b1: float, b2: float) -> float:
    d = abs(b2 - b1) % 360.0
    return min(d, 360.0 - d)


def sample_stroke(raw: Sequence[Point], params: SamplingParams) -> list[Point]:
    """Downsample a raw stroke by arc length and accumulated heading change.

    The first and last raw points are always kept.  Heading change is
    accumulated across the turn angles at the points visited since the
    last kept point and resets on every emission, as does arc length.
    Consecutive output points are always distinct (ignoring a singleton
    input).
    """
    if not raw:
        raise ValueError("empty stroke")
    if len(raw) == 1:
        return [raw[0]]

    out = [raw[0]]
    arc = 0.0
    turn = 0.0
    prev_bearing: float | None = None
    for i in range(1, len(raw) - 1):
        step = dist(raw[i - 1], raw[i])
        arc += step
        if step > 0.0:
            prev_bearing = _bearing(raw[i - 1], raw[i])
        out_step = dist(raw[i], raw[i + 1])
        if out_step > 0.0 and prev_bearing is not None:
            turn += _turn(prev_bearing, _bearing(raw[i], raw[i + 1]))
        if arc >= params.d_m or turn >= params.theta_m:
            if raw[i] != out[-1]:
                out.append(raw[i])
            arc = 0.0
            turn = 0.0
    if raw[-1] != out[-1]:
        out.append(raw[-1])
    return out
