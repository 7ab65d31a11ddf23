"""Planar positions, distances and the edge-vector angle used for forwarding inhibition."""

from __future__ import annotations

import math
from typing import NamedTuple


class DegenerateVertex(ValueError):
    pass


class Position(NamedTuple):
    x: float
    y: float


def distance(p, q) -> float:
    return math.hypot(q[0] - p[0], q[1] - p[1])


def angle_between(u, v) -> float:
    """Angle in degrees between two nonzero vectors, in [0, 180].

    Computed as arccos of the normalised dot product; the argument is clamped
    to [-1, 1] so collinear inputs do not produce NaN.
    """
    nu = math.hypot(u[0], u[1])
    nv = math.hypot(v[0], v[1])
    if nu == 0.0 or nv == 0.0:
        raise DegenerateVertex("zero-length edge vector")
    c = (u[0] * v[0] + u[1] * v[1]) / (nu * nv)
    if c > 1.0:
        c = 1.0
    elif c < -1.0:
        c = -1.0
    return math.degrees(math.acos(c))


def angle_at(vertex, a, b) -> float:
    """Angle at ``vertex`` between the rays towards ``a`` and ``b`` (degrees)."""
    return angle_between((a[0] - vertex[0], a[1] - vertex[1]),
                         (b[0] - vertex[0], b[1] - vertex[1]))


class Plane:
    """Unbounded flat plane."""

    ring_length = 0.0

    def delta(self, p, q) -> tuple[float, float]:
        return (q[0] - p[0], q[1] - p[1])

    def distance(self, p, q) -> float:
        return distance(p, q)

    def angle_at(self, vertex, a, b) -> float:
        return angle_between(self.delta(vertex, a), self.delta(vertex, b))


class RingStrip(Plane):
    """Strip whose x axis wraps with period ``length`` (a ring road).

    Displacements along x take the shortest way around the ring, which keeps
    distances and angles local near the wrap point.
    """

    def __init__(self, length: float):
        if not length > 0:
            raise ValueError("ring length must be positive")
        self.ring_length = float(length)

    def delta(self, p, q) -> tuple[float, float]:
        L = self.ring_length
        dx = (q[0] - p[0]) % L
        if dx > 0.5 * L:
            dx -= L
        return (dx, q[1] - p[1])

    def distance(self, p, q) -> float:
        dx, dy = self.delta(p, q)
        return math.hypot(dx, dy)
