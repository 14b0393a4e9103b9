"""Three-oscillator Kuramoto system on an isosceles triangle.

Oscillator 3 is the apex: it couples to oscillators 1 and 2 with strength
``k2``, while the base edge 1-2 carries strength ``k1``.  Either strength may
be negative (repulsive).  The flow is the negative gradient of

    V(theta) = -(k2 cos(t3 - t1) + k1 cos(t2 - t1) + k2 cos(t2 - t3)) / 3.

Phases are kept as unwrapped reals; wrapping happens only in
:func:`diff_coords` and when comparing points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidCoupling

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class Coupling:
    """Signed coupling strengths; ``k1`` on the base edge, ``k2`` on both legs."""

    k1: float
    k2: float

    def __post_init__(self):
        for name in ("k1", "k2"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise InvalidCoupling(f"{name} must be finite, got {value!r}")
            if value == 0:
                raise InvalidCoupling(f"{name} must be nonzero")
        object.__setattr__(self, "k1", float(self.k1))
        object.__setattr__(self, "k2", float(self.k2))


class DiffCoords(NamedTuple):
    """Translation-invariant coordinates ``(wrap(t1 - t3), wrap(t2 - t3))``."""

    x: float
    y: float


def as_state(state) -> np.ndarray:
    theta = np.asarray(state, dtype=float)
    if theta.shape != (3,):
        raise ValueError(f"phase state must have shape (3,), got {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("phase state must be finite")
    return theta


def rhs_components(t1, t2, t3, k1, k2):
    """Velocity components; works elementwise on floats or arrays."""
    s31 = np.sin(t3 - t1)
    s21 = np.sin(t2 - t1)
    s32 = np.sin(t3 - t2)
    return (
        (k2 * s31 + k1 * s21) / 3.0,
        (k2 * s32 - k1 * s21) / 3.0,
        -(k2 * s31 + k2 * s32) / 3.0,
    )


def rhs(state, coupling: Coupling) -> np.ndarray:
    """Velocity of each oscillator at ``state``."""
    t1, t2, t3 = as_state(state)
    return np.array(rhs_components(t1, t2, t3, coupling.k1, coupling.k2))


def energy(state, coupling: Coupling) -> float:
    t1, t2, t3 = as_state(state)
    k1, k2 = coupling.k1, coupling.k2
    return -(k2 * math.cos(t3 - t1) + k1 * math.cos(t2 - t1) + k2 * math.cos(t2 - t3)) / 3.0


def gradient(state, coupling: Coupling) -> np.ndarray:
    """Analytic gradient of :func:`energy`.

    Written out from the derivative of ``V`` rather than by negating
    :func:`rhs`, so the gradient identity is a genuine check.
    """
    t1, t2, t3 = as_state(state)
    k1, k2 = coupling.k1, coupling.k2
    d31 = k2 * math.sin(t3 - t1)
    d21 = k1 * math.sin(t2 - t1)
    d23 = k2 * math.sin(t2 - t3)
    return np.array([-(d31 + d21) / 3.0, (d21 + d23) / 3.0, (d31 - d23) / 3.0])


def jacobian(state, coupling: Coupling) -> np.ndarray:
    """Jacobian of the velocity field; symmetric with zero row sums."""
    t1, t2, t3 = as_state(state)
    k1, k2 = coupling.k1, coupling.k2
    a = k1 * math.cos(t2 - t1) / 3.0
    b = k2 * math.cos(t3 - t1) / 3.0
    c = k2 * math.cos(t3 - t2) / 3.0
    return np.array([
        [-(a + b), a, b],
        [a, -(a + c), c],
        [b, c, -(b + c)],
    ])


def wrap_angle(x):
    """Map angles into ``(-pi, pi]``; accepts scalars or arrays."""
    wrapped = math.pi - np.mod(math.pi - np.asarray(x, dtype=float), TWO_PI)
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def diff_coords(state) -> DiffCoords:
    t1, t2, t3 = as_state(state)
    return DiffCoords(wrap_angle(t1 - t3), wrap_angle(t2 - t3))


def torus_distance(p, q) -> float:
    """Euclidean distance between two points of the 2-torus of phase differences."""
    dx = wrap_angle(p[0] - q[0])
    dy = wrap_angle(p[1] - q[1])
    return math.hypot(dx, dy)
