"""Planar geometry: vectors, angle wrapping, segment visibility tests."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Vec2:
    """A point or vector in the plane, in meters (or meters/second)."""

    x: float
    y: float

    def __add__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: "Vec2") -> "Vec2":
        return Vec2(self.x - other.x, self.y - other.y)

    def __neg__(self) -> "Vec2":
        return Vec2(-self.x, -self.y)

    def __mul__(self, s: float) -> "Vec2":
        return Vec2(self.x * s, self.y * s)

    __rmul__ = __mul__

    def dot(self, other: "Vec2") -> float:
        return self.x * other.x + self.y * other.y

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def is_finite(self) -> bool:
        return math.isfinite(self.x) and math.isfinite(self.y)

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    @staticmethod
    def from_array(a: Sequence[float]) -> "Vec2":
        return Vec2(float(a[0]), float(a[1]))


ZERO = Vec2(0.0, 0.0)


def wrap_angle(angle: float) -> float:
    """Wrap an angle to the interval (-pi, pi]."""
    r = math.remainder(angle, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    return r


def wrap_positive(angle: float) -> float:
    """Wrap an angle to [0, 2*pi)."""
    r = math.fmod(angle, TWO_PI)
    if r < 0.0:
        r += TWO_PI
    if r >= TWO_PI:  # tiny negatives round up to exactly 2*pi
        r = 0.0
    return r


def rot2(angle: float) -> np.ndarray:
    """2x2 counterclockwise rotation matrix."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def _orient(a: Vec2, b: Vec2, c: Vec2) -> float:
    """Signed area of triangle abc (positive for counterclockwise)."""
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)


def _on_segment(a: Vec2, b: Vec2, p: Vec2) -> bool:
    """Whether collinear point p lies within the bounding box of segment ab."""
    return (
        min(a.x, b.x) <= p.x <= max(a.x, b.x)
        and min(a.y, b.y) <= p.y <= max(a.y, b.y)
    )


def segments_intersect(p1: Vec2, p2: Vec2, q1: Vec2, q2: Vec2) -> bool:
    """Closed-segment intersection test; touching endpoints count as hits."""
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True
    if d1 == 0 and _on_segment(q1, q2, p1):
        return True
    if d2 == 0 and _on_segment(q1, q2, p2):
        return True
    if d3 == 0 and _on_segment(p1, p2, q1):
        return True
    if d4 == 0 and _on_segment(p1, p2, q2):
        return True
    return False


def line_of_sight(a: Vec2, b: Vec2, obstacles: Iterable) -> bool:
    """Whether the sight line from a to b clears every wall segment.

    Grazing contact with a wall endpoint counts as blocked (conservative).
    A degenerate sight line (a == b) is blocked only if the point itself
    touches a wall.
    """
    if not (a.is_finite() and b.is_finite()):
        raise ValueError("line_of_sight requires finite endpoints")
    for obs in obstacles:
        if segments_intersect(a, b, obs.a, obs.b):
            return False
    return True
