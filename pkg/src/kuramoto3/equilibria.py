"""Critical points, closed-form spectra and stability regimes.

Every equilibrium is reported with a representative in ``[0, 2pi)^3`` that
has ``theta_1 = 0``.  Stability is read off the closed-form eigenvalues; a
small Jacobi eigensolver supplies the independent numeric spectrum used to
cross-check them.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import NonSymmetric, NotPresent
from .model import TWO_PI, Coupling, diff_coords, energy, torus_distance

#: eigenvalues within this distance of zero are treated as zero
EIG_TOL = 1e-12
#: wrapped distance below which two enumerated points are the same class
MERGE_TOL = 1e-9


class CriticalPointId(enum.Enum):
    STAR1 = "star1"
    STAR2 = "star2"
    STAR3 = "star3"
    STAR4 = "star4"
    STAR5 = "star5"
    STAR6 = "star6"

    @property
    def index(self) -> int:
        return int(self.value[-1])

    @classmethod
    def from_index(cls, i: int) -> "CriticalPointId":
        return cls(f"star{i}")


class Stability(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    DEGENERATE = "degenerate"


class ParamRegion(enum.Enum):
    CASE2_STAR3_STABLE = "case2_star3_stable"
    CASE3_STAR4_STABLE = "case3_star4_stable"
    CASE4_STAR56_STABLE = "case4_star56_stable"
    BOUNDARY = "boundary"


@dataclass(frozen=True)
class ClosedFormSpectrum:
    """Eigenvalues ``(0, a, b)`` and matching eigenvectors (rows of ``eigenvectors``)."""

    eigenvalues: tuple
    eigenvectors: np.ndarray


@dataclass(frozen=True)
class CriticalPoint:
    id: CriticalPointId
    phases: np.ndarray
    spectrum: ClosedFormSpectrum
    stability: Stability


def half_angle(coupling: Coupling) -> float | None:
    """``arccos(-k2 / (2 k1))`` when the fifth and sixth points exist, else None."""
    ratio = -coupling.k2 / (2.0 * coupling.k1)
    if abs(coupling.k2) > 2.0 * abs(coupling.k1):
        return None
    return math.acos(min(1.0, max(-1.0, ratio)))


def _phases(cid: CriticalPointId, coupling: Coupling) -> np.ndarray:
    pi = math.pi
    fixed = {
        CriticalPointId.STAR1: (0.0, pi, 0.0),
        CriticalPointId.STAR2: (0.0, pi, pi),
        CriticalPointId.STAR3: (0.0, 0.0, 0.0),
        CriticalPointId.STAR4: (0.0, 0.0, pi),
    }
    if cid in fixed:
        return np.array(fixed[cid])
    alpha = half_angle(coupling)
    if alpha is None:
        raise NotPresent(f"{cid.value} requires |k2 / (2 k1)| <= 1")
    if cid is CriticalPointId.STAR5:
        raw = (0.0, 2.0 * alpha, alpha)
    else:
        raw = (0.0, TWO_PI - 2.0 * alpha, TWO_PI - alpha)
    return np.mod(np.array(raw), TWO_PI)


def closed_form_spectrum(cid: CriticalPointId, coupling: Coupling) -> ClosedFormSpectrum:
    """Exact eigenpairs of the Jacobian at a critical point.

    For the first two points the eigenvalues are ``(k1 +- sqrt(k1^2 + 3 k2^2)) / 3``.
    Their eigenvectors use the same radicand.  At ``STAR2`` they read
    ``(-q - 1, q - 1, 2)`` with ``q = (k1 +- r) / k2``; ``STAR1`` is its mirror
    image under swapping oscillators 1 and 2, so the first two entries trade
    places.
    """
    k1, k2 = coupling.k1, coupling.k2
    ones = np.array([1.0, 1.0, 1.0])
    antisym = np.array([-1.0, 1.0, 0.0])
    apex = np.array([-0.5, -0.5, 1.0])

    if cid in (CriticalPointId.STAR1, CriticalPointId.STAR2):
        r = math.sqrt(k1 * k1 + 3.0 * k2 * k2)
        values = (0.0, (k1 + r) / 3.0, (k1 - r) / 3.0)
        vecs = [ones]
        for q in ((k1 + r) / k2, (k1 - r) / k2):
            v = np.array([-q - 1.0, q - 1.0, 2.0])
            if cid is CriticalPointId.STAR1:
                v = v[[1, 0, 2]]
            vecs.append(v)
        return ClosedFormSpectrum(values, np.array(vecs))

    if cid is CriticalPointId.STAR3:
        values = (0.0, -(2.0 * k1 + k2) / 3.0, -k2)
    elif cid is CriticalPointId.STAR4:
        values = (0.0, (k2 - 2.0 * k1) / 3.0, k2)
    else:
        if half_angle(coupling) is None:
            raise NotPresent(f"{cid.value} requires |k2 / (2 k1)| <= 1")
        values = (0.0, (4.0 * k1 * k1 - k2 * k2) / (6.0 * k1), k2 * k2 / (2.0 * k1))
    return ClosedFormSpectrum(values, np.array([ones, antisym, apex]))


def classify_stability(eigenvalues) -> Stability:
    """Sign test on the eigenvalues other than the translation mode."""
    nonzero = eigenvalues[1:]
    if any(lam > EIG_TOL for lam in nonzero):
        return Stability.UNSTABLE
    if all(lam < -EIG_TOL for lam in nonzero):
        return Stability.STABLE
    return Stability.DEGENERATE


def enumerate_critical_points(coupling: Coupling) -> list[CriticalPoint]:
    """All equilibria modulo translation and 2pi shifts.

    When ``|k2| = 2 |k1|`` the fifth and sixth points collapse onto the third
    or fourth; duplicates are dropped and the survivor, being non-hyperbolic,
    is at best ``DEGENERATE``.
    """
    ids = [CriticalPointId.STAR1, CriticalPointId.STAR2, CriticalPointId.STAR3, CriticalPointId.STAR4]
    if half_angle(coupling) is not None:
        ids += [CriticalPointId.STAR5, CriticalPointId.STAR6]

    points: list[CriticalPoint] = []
    for cid in ids:
        phases = _phases(cid, coupling)
        here = diff_coords(phases)
        merged = next(
            (i for i, p in enumerate(points) if torus_distance(diff_coords(p.phases), here) < MERGE_TOL),
            None,
        )
        if merged is not None:
            survivor = points[merged]
            if survivor.stability is Stability.STABLE:
                points[merged] = CriticalPoint(survivor.id, survivor.phases, survivor.spectrum, Stability.DEGENERATE)
            continue
        spectrum = closed_form_spectrum(cid, coupling)
        points.append(CriticalPoint(cid, phases, spectrum, classify_stability(spectrum.eigenvalues)))
    return points


def numeric_spectrum(matrix, tol: float = 1e-13, max_sweeps: int = 50):
    """Eigen-decomposition of a small symmetric matrix by cyclic Jacobi rotations.

    Returns
    -------
    eigenvalues : ndarray, ascending
    eigenvectors : ndarray, orthonormal columns matching ``eigenvalues``
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if np.max(np.abs(a - a.T), initial=0.0) > 1e-12:
        raise NonSymmetric("matrix is not symmetric within 1e-12")
    a = 0.5 * (a + a.T)
    v = np.eye(n)
    scale = max(1.0, np.linalg.norm(a))

    for _ in range(max_sweeps):
        off = math.sqrt(np.sum(np.tril(a, -1) ** 2))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                g = 100.0 * abs(apq)
                if abs(a[p, p]) + g == abs(a[p, p]) and abs(a[q, q]) + g == abs(a[q, q]):
                    # below rounding of both diagonals: drop it
                    a[p, q] = a[q, p] = 0.0
                    continue
                gap = a[q, q] - a[p, p]
                if abs(gap) + g == abs(gap):
                    t = apq / gap
                else:
                    theta = 0.5 * gap / apq
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rot = np.eye(n)
                rot[p, p] = rot[q, q] = c
                rot[p, q] = s
                rot[q, p] = -s
                a = rot.T @ a @ rot
                v = v @ rot

    values = np.diag(a).copy()
    order = np.argsort(values, kind="stable")
    return values[order], v[:, order]


def classify_region(coupling: Coupling) -> ParamRegion:
    k1, k2 = coupling.k1, coupling.k2
    scale = max(abs(k1), abs(k2))
    plus = 2.0 * k1 + k2
    minus = 2.0 * k1 - k2
    if min(abs(k2), abs(plus), abs(minus)) <= 1e-12 * scale:
        return ParamRegion.BOUNDARY
    if k2 > 0 and plus > 0:
        return ParamRegion.CASE2_STAR3_STABLE
    if k2 < 0 and minus > 0:
        return ParamRegion.CASE3_STAR4_STABLE
    return ParamRegion.CASE4_STAR56_STABLE


#: points predicted stable in each regime
EXPECTED_STABLE = {
    ParamRegion.CASE2_STAR3_STABLE: {CriticalPointId.STAR3},
    ParamRegion.CASE3_STAR4_STABLE: {CriticalPointId.STAR4},
    ParamRegion.CASE4_STAR56_STABLE: {CriticalPointId.STAR5, CriticalPointId.STAR6},
}


@dataclass(frozen=True)
class Figure1Row:
    ratio: float
    point: CriticalPointId
    energy: float
    stability: Stability


def figure1_data(k1_sign: int, ratios) -> list[Figure1Row]:
    """Energy and stability of each equilibrium as ``k2 / k1`` varies, ``|k1| = 1``.

    A zero ratio would mean ``k2 = 0`` and is skipped.
    """
    if k1_sign not in (1, -1):
        raise ValueError("k1_sign must be +1 or -1")
    rows = []
    for r in ratios:
        r = float(r)
        if not math.isfinite(r):
            raise ValueError(f"ratio must be finite, got {r}")
        if r == 0.0:
            continue
        coupling = Coupling(float(k1_sign), r * k1_sign)
        for point in enumerate_critical_points(coupling):
            rows.append(Figure1Row(r, point.id, energy(point.phases, coupling), point.stability))
    return rows


def closed_form_energy(cid: CriticalPointId, coupling: Coupling) -> float:
    k1, k2 = coupling.k1, coupling.k2
    if cid in (CriticalPointId.STAR1, CriticalPointId.STAR2):
        return k1 / 3.0
    if cid is CriticalPointId.STAR3:
        return -(k1 + 2.0 * k2) / 3.0
    if cid is CriticalPointId.STAR4:
        return (2.0 * k2 - k1) / 3.0
    return k1 / 3.0 + k2 * k2 / (6.0 * k1)
