"""Property battery behind ``kuramoto3 verify``.

Each check samples its own inputs from a seeded generator, compares two
independent routes to the same quantity and returns a :class:`CheckResult`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .diameter import (
    DIAMETER_LIMIT,
    TARGETS,
    TranslatedState,
    certify_decay,
    check_proof_inequalities,
    diameter,
    dini_closed_form,
)
from .equilibria import (
    EXPECTED_STABLE,
    CriticalPointId,
    ParamRegion,
    Stability,
    classify_region,
    closed_form_spectrum,
    enumerate_critical_points,
    numeric_spectrum,
)
from .integrate import IntegratorConfig, model_field
from .model import Coupling, energy, gradient, jacobian, rhs

REGIONS = (ParamRegion.CASE2_STAR3_STABLE, ParamRegion.CASE3_STAR4_STABLE, ParamRegion.CASE4_STAR56_STABLE)


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)


def region_margin(coupling: Coupling) -> float:
    k1, k2 = coupling.k1, coupling.k2
    return min(abs(k2), abs(2 * k1 + k2), abs(2 * k1 - k2))


def random_couplings(rng: np.random.Generator, n: int, region: ParamRegion | None = None,
                     scale: float = 5.0, margin: float = 1e-6) -> list[Coupling]:
    """``n`` couplings drawn uniformly from ``[-scale, scale]^2``.

    Without ``region`` the draws cycle through the three open regimes so
    each gets an equal share.
    """
    out = []
    while len(out) < n:
        want = region if region is not None else REGIONS[len(out) % 3]
        k1, k2 = rng.uniform(-scale, scale, 2)
        if k1 == 0 or k2 == 0:
            continue
        c = Coupling(k1, k2)
        if classify_region(c) is want and region_margin(c) > margin:
            out.append(c)
    return out


def check_equilibria(couplings) -> CheckResult:
    worst = 0.0
    for c in couplings:
        for p in enumerate_critical_points(c):
            worst = max(worst, float(np.max(np.abs(rhs(p.phases, c)))))
    return CheckResult("equilibrium_exactness", worst < 1e-12, {"max_rhs_inf_norm": worst})


def check_spectra(couplings) -> CheckResult:
    """Closed-form eigenvalues against Jacobi, and predicted stability pattern."""
    worst = 0.0
    pattern_failures = []
    for c in couplings:
        region = classify_region(c)
        stable = set()
        for p in enumerate_critical_points(c):
            numeric, _ = numeric_spectrum(jacobian(p.phases, c))
            closed = np.sort(p.spectrum.eigenvalues)
            worst = max(worst, float(np.max(np.abs(numeric - closed))))
            if p.stability is Stability.STABLE:
                stable.add(p.id)
        if region in EXPECTED_STABLE and stable != EXPECTED_STABLE[region]:
            pattern_failures.append({"k1": c.k1, "k2": c.k2, "stable": sorted(s.value for s in stable)})
    passed = worst < 1e-9 and not pattern_failures
    return CheckResult("spectrum_agreement", passed,
                       {"max_eigenvalue_error": worst, "pattern_failures": pattern_failures[:10]})


def printed_eigenvectors(coupling: Coupling, radicand: float) -> tuple:
    """The two non-trivial eigenvectors at the first two points, transcribed
    literally with radicand ``k1^2 + radicand * k2^2``."""
    k1, k2 = coupling.k1, coupling.k2
    s = math.sqrt(k1 * k1 + radicand * k2 * k2)
    out = []
    for q in ((k1 + s) / k2, (k1 - s) / k2):
        out.append(np.array([-q - 1.0, q - 1.0, 2.0]))
    return tuple(out)


def eigen_residual(matrix, value, vector) -> float:
    v = np.asarray(vector, dtype=float)
    v = v / np.linalg.norm(v)
    return float(np.max(np.abs(matrix @ v - value * v)))


def check_eigenvectors(couplings, inject_typo: bool = False) -> CheckResult:
    """Residual of ``J v = lambda v`` for every closed-form eigenpair.

    ``inject_typo`` substitutes the literal radicand-2 vectors at the first
    two points, which must make the check fail.
    """
    worst = 0.0
    for c in couplings:
        for p in enumerate_critical_points(c):
            jac = jacobian(p.phases, c)
            vecs = list(p.spectrum.eigenvectors)
            if inject_typo and p.id in (CriticalPointId.STAR1, CriticalPointId.STAR2):
                vecs[1:] = printed_eigenvectors(c, 2.0)
            for lam, v in zip(p.spectrum.eigenvalues, vecs):
                worst = max(worst, eigen_residual(jac, lam, v))
    return CheckResult("eigenvector_residuals", worst < 1e-9,
                       {"max_residual": worst, "typo_injected": inject_typo})


def eigvec_radicand_verdict(couplings) -> CheckResult:
    """Which radicand makes the literal eigenvectors work at the first two points."""
    residuals = {}
    for cid in (CriticalPointId.STAR1, CriticalPointId.STAR2):
        for radicand in (2.0, 3.0):
            for swapped in (False, True):
                worst = 0.0
                for c in couplings:
                    jac = jacobian(closed_form_points(c)[cid], c)
                    lams = closed_form_spectrum(cid, c).eigenvalues[1:]
                    for lam, v in zip(lams, printed_eigenvectors(c, radicand)):
                        if swapped:
                            v = v[[1, 0, 2]]
                        worst = max(worst, eigen_residual(jac, lam, v))
                key = f"{cid.value}_radicand{int(radicand)}{'_swapped' if swapped else ''}"
                residuals[key] = worst
    ok = {k: v < 1e-9 for k, v in residuals.items()}
    if ok["star2_radicand3"] and ok["star1_radicand3_swapped"] and not ok["star2_radicand2"]:
        verdict = ("radicand k1^2+3k2^2 is correct; the printed vectors hold at star2 "
                   "and at star1 after swapping the first two entries")
        passed = True
    else:
        verdict = "inconclusive"
        passed = False
    return CheckResult("eigvec_typo_resolution", passed,
                       {"verdict": verdict, "residuals": residuals, "within_1e-9": ok})


def closed_form_points(coupling: Coupling) -> dict:
    return {p.id: p.phases for p in enumerate_critical_points(coupling)}


def check_gradient(rng: np.random.Generator, n: int, h: float = 1e-6) -> CheckResult:
    worst_identity = 0.0
    worst_fd = 0.0
    for _ in range(n):
        c = Coupling(*rng.choice([-1, 1], 2) * rng.uniform(0.1, 3.0, 2))
        theta = rng.uniform(-math.pi, math.pi, 3)
        g = gradient(theta, c)
        worst_identity = max(worst_identity, float(np.max(np.abs(g + rhs(theta, c)))))
        fd = np.empty(3)
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            fd[i] = (energy(theta + e, c) - energy(theta - e, c)) / (2 * h)
        worst_fd = max(worst_fd, float(np.max(np.abs(fd - g))))
    return CheckResult("gradient_identity", worst_identity < 1e-14 and worst_fd < 1e-8,
                       {"max_gradient_plus_rhs": worst_identity, "max_finite_difference_error": worst_fd})


def check_inequalities(samples: int = 1_000_000) -> CheckResult:
    m = check_proof_inequalities(samples)
    passed = (m.min_margin_1 >= -1e-12 and m.min_margin_2 >= -1e-12
              and abs(m.margin_1_at_zero) <= 1e-12 and abs(m.margin_2_at_zero) <= 1e-12)
    return CheckResult("proof_inequalities", passed, {
        "inequality1_min_margin": m.min_margin_1,
        "inequality2_min_margin": m.min_margin_2,
        "inequality1_margin_at_zero": m.margin_1_at_zero,
        "inequality2_margin_at_zero": m.margin_2_at_zero,
        "samples": samples,
    })


def _rk4_step(f, y, h):
    k1 = np.array(f(*y))
    k2 = np.array(f(*(y + 0.5 * h * k1)))
    k3 = np.array(f(*(y + 0.5 * h * k2)))
    k4 = np.array(f(*(y + h * k3)))
    return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def random_translated_states(rng: np.random.Generator, n: int, gap: float = 1e-3):
    """Centred states with diameter below pi and a unique max and min."""
    out = []
    while len(out) < n:
        target = CriticalPointId.STAR5 if len(out) % 2 == 0 else CriticalPointId.STAR6
        theta = rng.uniform(-0.5 * math.pi, 0.5 * math.pi, 3)
        s = np.sort(theta)
        if s[1] - s[0] > gap and s[2] - s[1] > gap:
            out.append(TranslatedState(theta, target))
    return out


def check_dini(rng: np.random.Generator, n: int, k2: float = 1.0, h: float = 1e-6) -> CheckResult:
    """Closed-form Dini value against a forward difference of the diameter.

    The forward step uses the untranslated model evaluated at the shifted
    state, independently of the centred equations.
    """
    coupling = Coupling(-k2, k2)
    worst = 0.0
    tested = 0
    for ts in random_translated_states(rng, n):
        theta = ts.theta_tilde
        f = model_field(coupling, offset=TARGETS[ts.target])
        moved = _rk4_step(f, theta, h)
        if np.argmax(moved) != np.argmax(theta) or np.argmin(moved) != np.argmin(theta):
            continue
        fd = (diameter(moved) - diameter(theta)) / h
        worst = max(worst, abs(dini_closed_form(ts, k2).value - fd))
        tested += 1
    return CheckResult("dini_consistency", worst < 1e-4 and tested > 0,
                       {"max_error": worst, "states_tested": tested})


def random_decay_initials(rng: np.random.Generator, n: int, fraction: float = 0.9):
    """Initial phases whose centred diameter is at most ``fraction * 2pi/3``."""
    half = 0.5 * fraction * DIAMETER_LIMIT
    out = []
    for i in range(n):
        target = CriticalPointId.STAR5 if i % 2 == 0 else CriticalPointId.STAR6
        theta_tilde = rng.uniform(-half, half, 3)
        shift = rng.uniform(-10.0, 10.0)
        out.append((theta_tilde + TARGETS[target] + shift, target))
    return out


def check_decay(rng: np.random.Generator, n: int, k2: float = 1.0,
                config: IntegratorConfig | None = None) -> CheckResult:
    failures = []
    worst_slack = -math.inf
    worst_growth = -math.inf
    min_ratio = math.inf
    for initial, target in random_decay_initials(rng, n):
        cert = certify_decay(initial, target, k2, config)
        worst_slack = max(worst_slack, cert.max_slack)
        worst_growth = max(worst_growth, cert.max_diameter - cert.initial_diameter)
        if cert.fitted_rate is not None:
            min_ratio = min(min_ratio, cert.fitted_rate / cert.rate)
        if not cert.verified or cert.max_diameter > cert.initial_diameter + 1e-9:
            failures.append({"initial": list(map(float, initial)), "target": target.value})
    return CheckResult("decay_certificates", not failures, {
        "trajectories": n,
        "max_envelope_excess": worst_slack,
        "max_diameter_growth": worst_growth,
        "min_fitted_over_certified_rate": min_ratio,
        "failures": failures[:10],
    })


def run_battery(coupling: Coupling, samples: int = 1000, seed: int = 0, inject_typo: bool = False,
                inequality_samples: int = 1_000_000, decay_trajectories: int = 20) -> list[CheckResult]:
    """Run every check; ``coupling`` sets the gauge for the decay checks when ``k1 = -k2 < 0``."""
    rng = np.random.default_rng(seed)
    couplings = random_couplings(rng, samples)
    results = [
        check_equilibria(couplings),
        check_spectra(couplings),
        check_eigenvectors(couplings, inject_typo),
        eigvec_radicand_verdict(couplings[:100]),
        check_gradient(rng, samples),
        check_inequalities(inequality_samples),
        check_dini(rng, samples),
    ]
    k2 = coupling.k2 if coupling.k1 == -coupling.k2 and coupling.k2 > 0 else 1.0
    results.append(check_decay(rng, decay_trajectories, k2))
    return results
