"""End-to-end acceptance gate: one test per criterion, each timed.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the pass/fail
lines as they are produced; they are repeated in the terminal summary.
"""
import json
import math
import time

import numpy as np
import pytest

from kuramoto3 import checks
from kuramoto3.basin import SweepConfig, basin_report, sweep, verify_region_subset
from kuramoto3.cli import main
from kuramoto3.equilibria import CriticalPointId, Stability, closed_form_energy, figure1_data
from kuramoto3.integrate import IntegratorConfig, Method, energy_monotonicity_check, integrate
from kuramoto3.model import Coupling, energy


@pytest.fixture(scope="module")
def couplings():
    return checks.random_couplings(np.random.default_rng(2024), 1000)


def test_equilibrium_exactness(couplings, report):
    start = time.perf_counter()
    result = checks.check_equilibria(couplings)
    elapsed = time.perf_counter() - start
    worst = result.details["max_rhs_inf_norm"]
    ok = result.passed and elapsed < 5
    report(1, "equilibrium exactness", ok, f"max |rhs| {worst:.2e}, {elapsed:.2f}s")
    assert ok


def test_spectrum_agreement(couplings, report):
    start = time.perf_counter()
    result = checks.check_spectra(couplings)
    elapsed = time.perf_counter() - start
    ok = result.passed and elapsed < 10
    report(2, "spectrum agreement", ok,
           f"max eigenvalue error {result.details['max_eigenvalue_error']:.2e}, {elapsed:.2f}s")
    assert ok, result.details


def test_gradient_identity(report):
    start = time.perf_counter()
    result = checks.check_gradient(np.random.default_rng(3), 10_000)
    elapsed = time.perf_counter() - start
    d = result.details
    ok = result.passed and elapsed < 5
    report(3, "gradient identity", ok,
           f"|grad + rhs| {d['max_gradient_plus_rhs']:.2e}, fd {d['max_finite_difference_error']:.2e}, {elapsed:.2f}s")
    assert ok, d


def test_dissipation_and_conservation(report):
    rng = np.random.default_rng(4)
    config = IntegratorConfig(method=Method.RK4_FIXED, dt=1e-2, t_max=200.0)
    worst_rise = 0.0
    worst_drift_ratio = 0.0
    runs = 0
    start = time.perf_counter()
    for region in checks.REGIONS:
        for c in checks.random_couplings(rng, 100, region=region, scale=3.0, margin=0.05):
            traj = integrate(rng.uniform(-math.pi, math.pi, 3), c, config)
            worst_rise = max(worst_rise, energy_monotonicity_check(traj))
            total = traj.states.sum(axis=1)
            drift = np.abs(total - total[0]) / (1.0 + traj.times)
            worst_drift_ratio = max(worst_drift_ratio, float(drift.max()))
            runs += 1
    elapsed = time.perf_counter() - start
    ok = worst_rise < 1e-8 and worst_drift_ratio < 1e-8 and runs == 300 and elapsed < 30
    report(4, "dissipation and conservation", ok,
           f"max energy rise {worst_rise:.2e}, max drift/(1+t) {worst_drift_ratio:.2e}, {elapsed:.2f}s")
    assert ok


def test_proof_inequalities(report):
    start = time.perf_counter()
    result = checks.check_inequalities(1_000_000)
    elapsed = time.perf_counter() - start
    d = result.details
    # 2 sin(pi/6) rounds to 1 - 2**-53, so "zero at x = 0" holds to rounding
    ok = result.passed and elapsed < 2
    report(5, "proof inequalities", ok,
           f"min margins {d['inequality1_min_margin']:.2e}, {d['inequality2_min_margin']:.2e}, at zero "
           f"{d['inequality1_margin_at_zero']:.2e}, {d['inequality2_margin_at_zero']:.2e}, {elapsed:.2f}s")
    assert ok, d


def test_dini_consistency(report):
    start = time.perf_counter()
    result = checks.check_dini(np.random.default_rng(6), 10_000, k2=1.0)
    elapsed = time.perf_counter() - start
    d = result.details
    ok = result.passed and d["states_tested"] >= 9_900 and elapsed < 10
    report(6, "dini consistency", ok,
           f"max error {d['max_error']:.2e} over {d['states_tested']} states, {elapsed:.2f}s")
    assert ok, d


def test_decay_certificate(report):
    start = time.perf_counter()
    result = checks.check_decay(np.random.default_rng(7), 200, k2=1.0)
    elapsed = time.perf_counter() - start
    d = result.details
    ok = result.passed and elapsed < 60
    report(7, "decay certificate", ok,
           f"max excess {d['max_envelope_excess']:.2e}, min fitted/certified "
           f"{d['min_fitted_over_certified_rate']:.2f}, {elapsed:.2f}s")
    assert ok, d


@pytest.mark.slow
def test_basin_containment(report):
    start = time.perf_counter()
    grid = sweep(SweepConfig(resolution=256, coupling=Coupling(-1.0, 1.0)))
    elapsed = time.perf_counter() - start
    rep = basin_report(grid)
    bad5 = verify_region_subset(grid, CriticalPointId.STAR5)
    bad6 = verify_region_subset(grid, CriticalPointId.STAR6)
    f5 = rep.area_fraction[CriticalPointId.STAR5]
    f6 = rep.area_fraction[CriticalPointId.STAR6]
    ok = (not bad5 and not bad6 and rep.unclassified_fraction < 0.005
          and abs(f5 - 0.5) <= 0.02 and abs(f6 - 0.5) <= 0.02 and elapsed < 300)
    report(8, "basin containment", ok,
           f"violations {len(bad5)}/{len(bad6)}, star5 {f5:.4f}, star6 {f6:.4f}, "
           f"unclassified {rep.unclassified_fraction:.4f}, {elapsed:.1f}s")
    assert ok


def test_figure1_transitions(report):
    ratios = np.round(np.arange(-300, 301, 5) / 100.0, 12)
    start = time.perf_counter()
    rows = figure1_data(-1, ratios)
    elapsed = time.perf_counter() - start

    stable = {}
    for r in rows:
        if r.stability is Stability.STABLE:
            stable.setdefault(r.ratio, set()).add(r.point)
    pattern_ok = True
    for ratio in ratios:
        if ratio == 0.0:
            continue
        got = stable.get(ratio, set())
        if abs(ratio) < 2:
            want = {CriticalPointId.STAR5, CriticalPointId.STAR6}
        elif abs(ratio) == 2:
            want = set()
        elif ratio > 2:
            want = {CriticalPointId.STAR4}
        else:
            want = {CriticalPointId.STAR3}
        pattern_ok &= got == want

    worst = 0.0
    for r in rows:
        if r.point is CriticalPointId.STAR5:
            c = Coupling(-1.0, -r.ratio)
            worst = max(worst, abs(r.energy - closed_form_energy(r.point, c)))
    ok = pattern_ok and worst <= 1e-12 and elapsed < 5
    report(9, "figure 1 transitions", ok,
           f"stable sets switch at +-2: {pattern_ok}, max energy error {worst:.2e}, {elapsed:.2f}s")
    assert ok


def test_eigenvector_radicand(tmp_path, report):
    couplings = checks.random_couplings(np.random.default_rng(10), 100)
    start = time.perf_counter()
    result = checks.eigvec_radicand_verdict(couplings)
    elapsed = time.perf_counter() - start

    code = main(["verify", "--samples", "60", "--inequality-samples", "1000",
                 "--decay-trajectories", "2", "--out", str(tmp_path)])
    recorded = json.loads((tmp_path / "verify.json").read_text())["eigvec_radicand_verdict"]
    residuals = result.details["residuals"]
    ok = (result.passed and code == 0 and recorded == result.details["verdict"]
          and residuals["star1_radicand3_swapped"] < 1e-9 and residuals["star1_radicand2"] > 1e-9
          and elapsed < 1)
    report(10, "eigenvector radicand", ok,
           f"{recorded}; literal radicand-2 residual {residuals['star1_radicand2']:.2e}, {elapsed:.2f}s")
    assert ok
