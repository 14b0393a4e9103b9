"""Command-line interface.

Exit codes: 0 success, 1 I/O failure, 2 invalid parameters, 3 a check or
theorem-containment test failed.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from pathlib import Path

from . import checks
from .basin import SweepConfig, basin_report, grid_to_csv, sweep, verify_region_subset
from .diameter import TARGETS, diameter
from .equilibria import CriticalPointId, enumerate_critical_points, figure1_data
from .errors import Kuramoto3Error
from .integrate import IntegratorConfig, Method, integrate, limit_point
from .model import Coupling, energy

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_CHECK = 0, 1, 2, 3
FORMATS = ("csv", "json", "svg")


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _diag(message: str) -> None:
    if sys.stderr.isatty() and "NO_COLOR" not in os.environ:
        message = f"\033[31m{message}\033[0m"
    print(message, file=sys.stderr)


def _write_all(out_dir: Path, files: dict) -> None:
    """Write every file via temp-then-rename; nothing is written until all content exists."""
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        fd, tmp = tempfile.mkstemp(dir=out_dir, prefix=f".{name}.", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            os.replace(tmp, out_dir / name)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def parse_theta(text: str) -> tuple:
    try:
        values = tuple(float(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageError(f"--theta0 expects three comma-separated numbers: {exc}") from None
    if len(values) != 3 or not all(math.isfinite(v) for v in values):
        raise UsageError("--theta0 expects three finite comma-separated numbers")
    return values


def parse_range(text: str) -> list[float]:
    """``start:stop:step``, stop included when within half a step."""
    try:
        start, stop, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise UsageError(f"range must look like start:stop:step, got {text!r}") from None
    if not step > 0 or stop < start:
        raise UsageError("range needs step > 0 and stop >= start")
    n = math.floor((stop - start) / step + 0.5) + 1
    return [round(start + i * step, 12) for i in range(n)]


def parse_formats(text: str) -> set:
    formats = {f.strip() for f in text.split(",") if f.strip()}
    if not formats or not formats <= set(FORMATS):
        raise UsageError(f"--format must be a non-empty subset of {','.join(FORMATS)}")
    return formats


def _coupling(args) -> Coupling:
    return Coupling(args.k1, args.k2)


def _integrator(args, **defaults) -> IntegratorConfig:
    base = IntegratorConfig(**defaults)
    changes = {}
    if args.dt is not None:
        changes["dt"] = args.dt
    if args.tmax is not None:
        changes["t_max"] = args.tmax
    if getattr(args, "method", None):
        changes["method"] = Method(args.method)
    try:
        return base.with_(**changes)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_equilibria(args) -> int:
    coupling = _coupling(args)
    rows = []
    for p in enumerate_critical_points(coupling):
        rows.append({
            "id": p.id.value,
            "theta": [float(v) for v in p.phases],
            "eigenvalues": [float(v) for v in p.spectrum.eigenvalues],
            "stability": p.stability.value,
            "energy": energy(p.phases, coupling),
        })
    files = {}
    if "csv" in args.formats:
        lines = ["id,theta1,theta2,theta3,lambda1,lambda2,lambda3,stability,energy"]
        for r in rows:
            nums = [_fmt(v) for v in r["theta"] + r["eigenvalues"]]
            lines.append(",".join([r["id"], *nums, r["stability"], _fmt(r["energy"])]))
        files["equilibria.csv"] = "\n".join(lines) + "\n"
    if "json" in args.formats:
        files["equilibria.json"] = _json({"k1": coupling.k1, "k2": coupling.k2, "points": rows})
    _write_all(args.out, files)
    return EXIT_OK


def cmd_simulate(args) -> int:
    coupling = _coupling(args)
    theta0 = parse_theta(args.theta0)
    config = _integrator(args)
    traj = integrate(theta0, coupling, config)
    ref = TARGETS[CriticalPointId(args.diameter_ref)] if args.diameter_ref != "raw" else (0.0, 0.0, 0.0)
    diameters = [diameter(s - ref) for s in traj.states]
    limit = limit_point(theta0, coupling, config)

    files = {}
    if "csv" in args.formats:
        lines = ["t,theta1,theta2,theta3,energy,diameter"]
        for t, s, e, d in zip(traj.times, traj.states, traj.energies, diameters):
            lines.append(",".join(_fmt(v) for v in (t, *s, e, d)))
        files["trajectory.csv"] = "\n".join(lines) + "\n"
    if "json" in args.formats:
        files["trajectory.json"] = _json({
            "k1": coupling.k1, "k2": coupling.k2, "theta0": list(theta0),
            "stop": traj.stop.value, "t_final": float(traj.times[-1]),
            "final_theta": [float(v) for v in traj.final],
            "final_diff_coords": list(limit.final_diff_coords),
            "limit": limit.label, "wrapped_distance": limit.wrapped_distance,
        })
    if "svg" in args.formats:
        from .plots import trajectory_svg
        files["trajectory.svg"] = trajectory_svg(traj.times, traj.energies, diameters, args.deterministic)
    _write_all(args.out, files)
    print(f"{traj.stop.value} at t={traj.times[-1]:g}; limit {limit.label}")
    return EXIT_OK


def cmd_basin(args) -> int:
    coupling = _coupling(args)
    if args.res < 2:
        raise UsageError("--res must be at least 2")
    integrator = _integrator(args, t_max=2000.0)
    grid = sweep(SweepConfig(args.res, coupling, integrator, workers=args.workers))
    report = basin_report(grid)
    violations = {}
    theorem_applies = coupling.k1 == -coupling.k2 and coupling.k1 < 0
    if args.check_theorem:
        if not theorem_applies:
            raise UsageError("--check-theorem requires k1 = -k2 < 0")
        for which in (CriticalPointId.STAR5, CriticalPointId.STAR6):
            violations[which.value] = verify_region_subset(grid, which)
        report.violations = [list(c) for v in violations.values() for c in v]

    files = {}
    if "csv" in args.formats:
        files["basin.csv"] = grid_to_csv(grid)
    if "json" in args.formats:
        files["basin_report.json"] = _json({
            "k1": coupling.k1, "k2": coupling.k2, "resolution": grid.resolution,
            "area_fraction": {k.value: float(v) for k, v in report.area_fraction.items()},
            "unclassified_fraction": float(report.unclassified_fraction),
            "theorem_checked": bool(args.check_theorem),
            "violations": {k: [list(c) for c in v] for k, v in violations.items()},
        })
    if "svg" in args.formats:
        from .plots import basin_svg
        files["basin.svg"] = basin_svg(grid, args.deterministic)
    _write_all(args.out, files)
    n_bad = len(report.violations)
    print(f"unclassified {report.unclassified_fraction:.4%}; violations {n_bad}")
    return EXIT_CHECK if n_bad else EXIT_OK


def cmd_verify(args) -> int:
    coupling = _coupling(args)
    results = checks.run_battery(
        coupling, samples=args.samples, seed=args.seed, inject_typo=args.inject_typo_eigvec,
        inequality_samples=args.inequality_samples, decay_trajectories=args.decay_trajectories,
    )
    by_name = {r.name: r for r in results}
    ineq = by_name["proof_inequalities"].details
    summary = {
        "k1": coupling.k1, "k2": coupling.k2, "seed": args.seed, "samples": args.samples,
        "all_passed": all(r.passed for r in results),
        "failed": [r.name for r in results if not r.passed],
        "inequality1_min_margin": ineq["inequality1_min_margin"],
        "inequality2_min_margin": ineq["inequality2_min_margin"],
        "eigvec_radicand_verdict": by_name["eigvec_typo_resolution"].details["verdict"],
        "checks": {r.name: {"passed": r.passed, **r.details} for r in results},
    }
    _write_all(args.out, {"verify.json": _json(summary)})
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}")
    return EXIT_OK if summary["all_passed"] else EXIT_CHECK


def cmd_figure1(args) -> int:
    if args.k1_sign not in (1, -1):
        raise UsageError("--k1-sign must be 1 or -1")
    ratios = parse_range(args.ratios)
    rows = figure1_data(args.k1_sign, ratios)
    files = {}
    if "csv" in args.formats:
        lines = ["ratio,id,energy,stability"]
        lines += [f"{_fmt(r.ratio)},{r.point.value},{_fmt(r.energy)},{r.stability.value}" for r in rows]
        files["figure1.csv"] = "\n".join(lines) + "\n"
    if "json" in args.formats:
        files["figure1.json"] = _json([
            {"ratio": r.ratio, "id": r.point.value, "energy": r.energy, "stability": r.stability.value}
            for r in rows
        ])
    if "svg" in args.formats:
        from .plots import figure1_svg
        files["figure1.svg"] = figure1_svg(rows, args.k1_sign, args.deterministic)
    _write_all(args.out, files)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--format", dest="format", default="csv,json,svg", help="subset of csv,json,svg")
    common.add_argument("--deterministic", action="store_true", help="omit timestamps from SVG output")

    coupling = argparse.ArgumentParser(add_help=False)
    coupling.add_argument("--k1", type=float, default=-1.0)
    coupling.add_argument("--k2", type=float, default=1.0)

    integ = argparse.ArgumentParser(add_help=False)
    integ.add_argument("--dt", type=float)
    integ.add_argument("--tmax", type=float)
    integ.add_argument("--method", choices=[m.value for m in Method])

    parser = argparse.ArgumentParser(prog="kuramoto3", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("equilibria", parents=[common, coupling], help="list critical points")
    p.set_defaults(func=cmd_equilibria)

    p = sub.add_parser("simulate", parents=[common, coupling, integ], help="integrate one trajectory")
    p.add_argument("--theta0", required=True, help="initial phases a,b,c")
    p.add_argument("--diameter-ref", choices=["raw", "star5", "star6"], default="raw",
                   help="phases the diameter column is measured relative to")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("basin", parents=[common, coupling, integ], help="basin sweep on the phase-difference torus")
    p.add_argument("--res", type=int, default=64)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--check-theorem", action="store_true", help="fail if a cell in a convergence box escapes")
    p.set_defaults(func=cmd_basin)

    p = sub.add_parser("verify", parents=[common, coupling], help="run the property battery")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inequality-samples", type=int, default=1_000_000)
    p.add_argument("--decay-trajectories", type=int, default=20)
    p.add_argument("--inject-typo-eigvec", action="store_true",
                   help="substitute the radicand-2 eigenvectors (negative-path test)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("figure1", parents=[common], help="energy/stability table against k2/k1")
    p.add_argument("--k1-sign", type=int, default=-1)
    p.add_argument("--ratios", default="-3:3:0.05", help="start:stop:step")
    p.set_defaults(func=cmd_figure1)
    return parser


def _glue_negative_values(argv: list[str]) -> list[str]:
    """Turn ``--ratios -3:3:1`` into ``--ratios=-3:3:1`` so argparse does not read the value as a flag."""
    out = []
    it = iter(argv)
    for token in it:
        if token in ("--ratios", "--theta0"):
            value = next(it, None)
            if value is not None and value.startswith("-"):
                token = f"{token}={value}"
            elif value is not None:
                out.append(token)
                token = value
        out.append(token)
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_glue_negative_values(argv))
    try:
        args.formats = parse_formats(args.format)
        if getattr(args, "seed", 0) < 0:
            raise UsageError("--seed must be non-negative")
        if getattr(args, "workers", 1) < 1:
            raise UsageError("--workers must be positive")
        return args.func(args)
    except (UsageError, Kuramoto3Error, ValueError) as exc:
        _diag(f"kuramoto3 {args.command}: error: {exc}")
        return EXIT_USAGE
    except OSError as exc:
        _diag(f"kuramoto3 {args.command}: I/O error: {exc}")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
