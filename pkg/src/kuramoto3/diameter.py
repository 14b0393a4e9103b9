"""Phase-diameter decay toward the two mixed equilibria when ``k1 = -k2 < 0``.

With ``k1 = -k2`` the stable pair sits at ``(0, 2pi/3, pi/3)`` and
``(0, 4pi/3, 5pi/3)``.  Working in coordinates centred on one of them, the
spread ``max - min`` of the centred phases shrinks exponentially as long as
it starts below ``2pi/3``.  This module evaluates the exact upper Dini
derivative of that spread, the guaranteed decay rate, and checks both against
integrated trajectories.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .equilibria import CriticalPointId
from .errors import DomainError, PreconditionFailed
from .integrate import IntegratorConfig, solve_flow
from .model import Coupling, as_state

PI = math.pi
THIRD = PI / 3.0
DIAMETER_LIMIT = 2.0 * PI / 3.0
ENVELOPE_TOL = 1e-9
FIT_FLOOR = 1e-8

TARGETS = {
    CriticalPointId.STAR5: np.array([0.0, 2.0 * PI / 3.0, PI / 3.0]),
    CriticalPointId.STAR6: np.array([0.0, 4.0 * PI / 3.0, 5.0 * PI / 3.0]),
}

# index pairs (1-based) whose Dini value follows the cosine-product formula
# when centred on STAR5; the remaining three use the sine-sum formula
_PRODUCT_PAIRS = {(3, 1), (1, 2), (2, 3)}


def _check_target(target: CriticalPointId) -> None:
    if target not in TARGETS:
        raise ValueError(f"target must be STAR5 or STAR6, got {target}")


@dataclass(frozen=True)
class TranslatedState:
    theta_tilde: np.ndarray
    target: CriticalPointId = CriticalPointId.STAR5


@dataclass(frozen=True)
class DiniResult:
    """Upper Dini derivative of the diameter.

    ``pair`` is the (max, min) index pair attaining the value, 1-based.
    ``case_kind`` is 1 for the cosine-product formula and 2 for the sine-sum
    formula.  ``pairs`` lists every admissible pair at this instant; it has
    more than one entry only at index switches.
    """

    pair: tuple
    value: float
    case_kind: int
    pairs: tuple


@dataclass(frozen=True)
class DecayCertificate:
    delta: float
    rate: float
    initial_diameter: float
    verified: bool
    max_slack: float
    fitted_rate: float | None
    max_diameter: float
    times: np.ndarray
    diameters: np.ndarray


@dataclass(frozen=True)
class ProofMargins:
    min_margin_1: float
    min_margin_2: float
    margin_1_at_zero: float
    margin_2_at_zero: float


def translate(state, target: CriticalPointId = CriticalPointId.STAR5) -> TranslatedState:
    _check_target(target)
    return TranslatedState(as_state(state) - TARGETS[target], target)


def diameter(ts) -> float:
    theta = ts.theta_tilde if isinstance(ts, TranslatedState) else np.asarray(ts, dtype=float)
    return float(np.max(theta) - np.min(theta))


def translated_rhs(theta_tilde, coupling: Coupling, target: CriticalPointId = CriticalPointId.STAR5) -> np.ndarray:
    """Velocity field written in coordinates centred on ``target``.

    The lag terms are expanded explicitly instead of shifting back, so the
    result doubles as a check on the centred equations.
    """
    _check_target(target)
    t1, t2, t3 = np.asarray(theta_tilde, dtype=float)
    k1, k2 = coupling.k1, coupling.k2
    s = math.sin
    if target is CriticalPointId.STAR5:
        return np.array([
            k2 / 3 * s(t3 - t1 + THIRD) - k1 / 3 * s(t2 - t1 - THIRD),
            k2 / 3 * s(t3 - t2 - THIRD) - k1 / 3 * s(t1 - t2 + THIRD),
            k2 / 3 * s(t1 - t3 - THIRD) + k2 / 3 * s(t2 - t3 + THIRD),
        ])
    return np.array([
        k2 / 3 * s(t3 - t1 - THIRD) - k1 / 3 * s(t2 - t1 + THIRD),
        k2 / 3 * s(t3 - t2 + THIRD) - k1 / 3 * s(t1 - t2 - THIRD),
        k2 / 3 * s(t1 - t3 + THIRD) + k2 / 3 * s(t2 - t3 - THIRD),
    ])


def _extreme_set(theta, velocity, pick_max: bool) -> list[int]:
    edge = np.max(theta) if pick_max else np.min(theta)
    candidates = [i for i in range(3) if theta[i] == edge]
    v = [velocity[i] for i in candidates]
    best = max(v) if pick_max else min(v)
    return [i for i in candidates if velocity[i] == best]


def _case_value(theta, i: int, j: int, k2: float) -> tuple[float, int]:
    """Closed-form ``v_i - v_j`` for a STAR5-centred state with ``theta_i - theta_j = D``."""
    k = 3 - i - j
    d = theta[i] - theta[j]
    skew = math.cos(theta[k] - 0.5 * (theta[i] + theta[j]))
    if (i + 1, j + 1) in _PRODUCT_PAIRS:
        half = 0.5 * d + PI / 6.0
        return -2.0 * k2 / 3.0 * math.cos(half) * (2.0 * math.sin(half) - skew), 1
    return -2.0 * k2 / 3.0 * (math.sin(d - THIRD) + skew * math.sin(0.5 * d + THIRD)), 2


def dini_closed_form(ts: TranslatedState, k2: float) -> DiniResult:
    """Upper Dini derivative of the diameter from the two closed-form cases.

    Assumes ``k1 = -k2`` with ``k2 > 0``.  The (max, min) indices follow the
    phase ordering, ties broken by the larger (resp. smaller) velocity and
    then by the smaller index.  A STAR6-centred state is handled through the
    reflection ``theta -> -theta``, which maps it onto a STAR5-centred one and
    reverses the roles of max and min.
    """
    if not k2 > 0:
        raise DomainError("k2 must be positive")
    theta = np.asarray(ts.theta_tilde, dtype=float)
    coupling = Coupling(-k2, k2)
    velocity = translated_rhs(theta, coupling, ts.target)
    top = _extreme_set(theta, velocity, True)
    bottom = _extreme_set(theta, velocity, False)
    pairs = tuple((i + 1, j + 1) for i in top for j in bottom if i != j)

    mirrored = ts.target is CriticalPointId.STAR6
    work = -theta if mirrored else theta
    best = None
    for i1, j1 in pairs:
        i, j = i1 - 1, j1 - 1
        value, kind = _case_value(work, j, i, k2) if mirrored else _case_value(work, i, j, k2)
        if best is None or value > best[1]:
            best = ((i1, j1), value, kind)
    return DiniResult(best[0], best[1], best[2], pairs)


def dini_from_velocities(ts: TranslatedState, k2: float) -> float:
    """``max (v_i - v_j)`` over the admissible (max, min) pairs, from the raw field."""
    theta = np.asarray(ts.theta_tilde, dtype=float)
    velocity = translated_rhs(theta, Coupling(-k2, k2), ts.target)
    top = _extreme_set(theta, velocity, True)
    bottom = _extreme_set(theta, velocity, False)
    return max(velocity[i] - velocity[j] for i in top for j in bottom)


def decay_bound(delta: float, k2: float) -> float:
    """Guaranteed exponential rate ``(2 k2 / 15) sin(delta / 2)``."""
    if not 0.0 < delta <= DIAMETER_LIMIT:
        raise DomainError(f"delta must lie in (0, 2pi/3], got {delta}")
    if not k2 > 0:
        raise DomainError("k2 must be positive")
    return 2.0 * k2 / 15.0 * math.sin(0.5 * delta)


def inequality_margins(x):
    """Margins of the two elementary bounds behind the decay rate, on ``[0, pi]``.

    First: ``2 sin(x/2 + pi/6) - (x/5 + 1)``.
    Second: ``sin(x - pi/3) + cos(x/2) sin(x/2 + pi/3) - x/5``.
    """
    x = np.asarray(x, dtype=float)
    m1 = 2.0 * np.sin(0.5 * x + PI / 6.0) - (x / 5.0 + 1.0)
    m2 = np.sin(x - THIRD) + np.cos(0.5 * x) * np.sin(0.5 * x + THIRD) - x / 5.0
    return m1, m2


def check_proof_inequalities(samples: int = 1_000_000) -> ProofMargins:
    if samples < 2:
        raise ValueError("samples must be at least 2")
    m1, m2 = inequality_margins(np.linspace(0.0, PI, samples))
    return ProofMargins(float(m1.min()), float(m2.min()), float(m1[0]), float(m2[0]))


# open intervals on (t1 - t3, t2 - t3, t1 - t2)
REGION_BOXES = {
    CriticalPointId.STAR5: ((-PI, PI / 3), (-PI / 3, PI), (-4 * PI / 3, 0.0)),
    CriticalPointId.STAR6: ((-7 * PI / 3, -PI), (-PI, PI / 3), (-2 * PI, -2 * PI / 3)),
}


def region_membership(initial, which: CriticalPointId) -> bool:
    """Whether raw (unwrapped) phase differences lie in the box that guarantees convergence to ``which``."""
    _check_target(which)
    t1, t2, t3 = as_state(initial)
    diffs = (t1 - t3, t2 - t3, t1 - t2)
    return all(lo < d < hi for d, (lo, hi) in zip(diffs, REGION_BOXES[which]))


def fitted_decay_rate(times, diameters, floor: float = FIT_FLOOR) -> float | None:
    """Least-squares slope of ``-log D(t)`` over samples with ``D > floor``."""
    times = np.asarray(times)
    diameters = np.asarray(diameters)
    mask = diameters > floor
    if mask.sum() < 2:
        return None
    slope = np.polyfit(times[mask], np.log(diameters[mask]), 1)[0]
    return float(-slope)


def certify_decay(initial, target: CriticalPointId = CriticalPointId.STAR5, k2: float = 1.0,
                  config: IntegratorConfig | None = None) -> DecayCertificate:
    """Integrate the centred flow and check the exponential envelope on the diameter.

    ``delta`` is taken as large as allowed, ``2pi/3 - D(0)``.
    """
    config = config or IntegratorConfig(t_max=200.0)
    ts = translate(initial, target)
    d0 = diameter(ts)
    if d0 >= DIAMETER_LIMIT:
        raise PreconditionFailed(f"initial diameter {d0:.6g} is not below 2pi/3")
    coupling = Coupling(-k2, k2)
    delta = DIAMETER_LIMIT - d0
    rate = decay_bound(delta, k2)

    def field(a, b, c):
        return tuple(translated_rhs((a, b, c), coupling, target))

    times, states, _ = solve_flow(field, ts.theta_tilde, config)
    diameters = states.max(axis=1) - states.min(axis=1)
    excess = diameters - d0 * np.exp(-rate * times)
    max_slack = float(excess.max())
    fitted = fitted_decay_rate(times, diameters)
    verified = max_slack <= ENVELOPE_TOL and (fitted is None or fitted >= rate)
    return DecayCertificate(delta, rate, d0, verified, max_slack, fitted, float(diameters.max()), times, diameters)
