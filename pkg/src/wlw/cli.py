"""Command-line surface: integrate, classify, phase, mesh, sweep, check.

Exit codes: 0 success, 1 internal failure, 2 invalid input, 3 inconclusive
classification.  Errors are reported as machine-readable JSON on stdout.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import re
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import output
from .classify import classify_surface, nodoid_threshold, special_solutions
from .errors import Inconclusive, InvalidParameter, NearSingular, NoFullTurn, WlwError
from .integrate import (
    EventKind,
    IntegrationControls,
    check_horizontal_symmetry,
    detect_period,
    find_self_intersections,
    integrate,
)
from .model import InitialConditions, Params, ProfileState, first_integral_m
from .phaseplane import PortraitSpec, critical_points, find_separatrix, phase_portrait
from .variational import (
    ExpEnergyParams,
    PowerEnergyParams,
    el_residual_exp,
    el_residual_power,
    exponent_map,
)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2
EXIT_INCONCLUSIVE = 3

_ANGLE_RE = re.compile(r"^\s*([+-]?\d*\.?\d*)\s*pi\s*(?:/\s*(\d+\.?\d*))?\s*$")


def parse_angle(text: str) -> float:
    """Angles as plain radians or symbolic multiples of pi: '3pi/2', 'pi', '-pi/4'."""
    m = _ANGLE_RE.match(text)
    if m:
        num = m.group(1)
        k = float(num) if num not in ("", "+", "-") else float(num + "1")
        den = float(m.group(2)) if m.group(2) else 1.0
        return k * math.pi / den
    try:
        return float(text)
    except ValueError as exc:
        raise InvalidParameter(f"cannot parse angle {text!r}") from exc


def parse_range(text: str) -> list[float]:
    """'lo:hi:n' inclusive grids, or a single value."""
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise InvalidParameter(f"range must be 'lo:hi:count', got {text!r}")
    lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    if n < 1:
        raise InvalidParameter(f"range count must be >= 1, got {n}")
    if n == 1:
        return [lo]
    return list(np.linspace(lo, hi, n))


@dataclass(frozen=True)
class SweepSpec:
    """Inclusive parameter grid for batch classification."""

    a_values: Sequence[float]
    b_values: Sequence[float]
    x0_values: Sequence[float]
    theta0_values: Sequence[float]
    output_dir: Path

    def __post_init__(self):
        for name in ("a_values", "b_values", "x0_values", "theta0_values"):
            if len(getattr(self, name)) == 0:
                raise InvalidParameter(f"{name} must be non-empty")

    def cells(self):
        for ia, a in enumerate(self.a_values):
            for ib, b in enumerate(self.b_values):
                for ix, x0 in enumerate(self.x0_values):
                    for it, t0 in enumerate(self.theta0_values):
                        yield (ia, ib, ix, it), (a, b, x0, t0)


def _controls_from_args(args, **overrides) -> IntegrationControls:
    kw = dict(rel_tol=args.rel_tol, abs_tol=args.abs_tol)
    if args.max_arclength is not None:
        kw["max_arclength"] = args.max_arclength
    kw.update(overrides)
    return IntegrationControls(**kw)


def _add_common_flags(p: argparse.ArgumentParser, with_ic: bool = True) -> None:
    p.add_argument("-a", type=float, required=True, help="coefficient a (dimensionless)")
    p.add_argument("-b", type=float, required=True, help="coefficient b (1/length)")
    if with_ic:
        p.add_argument("--x0", type=float, required=True, help="initial radius, > 0")
        p.add_argument("--theta0", type=parse_angle, default=0.0,
                       help="initial tangent angle in radians; accepts pi/2, 3pi/2, ...")
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p.add_argument("--abs-tol", type=float, default=1e-12)
    p.add_argument("--max-arclength", type=float, default=None)
    p.add_argument("-o", "--out", type=Path, default=Path("."), help="output directory")


def cmd_integrate(args) -> int:
    params = Params(args.a, args.b)
    ic = InitialConditions(args.x0, args.theta0)
    controls = _controls_from_args(args)
    traj = integrate(params, ic, controls)
    crossings = find_self_intersections(traj)
    args.out.mkdir(parents=True, exist_ok=True)
    csv_path = args.out / "trajectory.csv"
    events_path = args.out / "events.json"
    output.write_trajectory_csv(traj, csv_path)
    output.write_events_json(traj, events_path, crossings)
    files = [str(csv_path), str(events_path)]
    if args.svg:
        svg_path = args.out / "profile.svg"
        output.write_profile_svg(traj, svg_path)
        files.append(str(svg_path))
    print(json.dumps({
        "termination": traj.termination.value,
        "termination_backward":
            traj.termination_backward.value if traj.termination_backward else None,
        "samples": len(traj.s),
        "events": len(traj.events) + len(crossings),
        "files": files,
    }, indent=2))
    return EXIT_OK


def cmd_classify(args) -> int:
    params = Params(args.a, args.b)
    ic = InitialConditions(args.x0, args.theta0)
    controls = None
    if args.max_arclength is not None or args.rel_tol != 1e-10 or args.abs_tol != 1e-12:
        controls = _controls_from_args(args, max_full_turns=3, max_vertical_tangents=12)
    report = classify_surface(params, ic, controls)
    doc = output.report_to_dict(report)
    print(json.dumps(doc, indent=2))
    if args.out != Path("."):
        args.out.mkdir(parents=True, exist_ok=True)
        output.write_report_json(report, args.out / "report.json")
    return EXIT_OK


def cmd_phase(args) -> int:
    params = Params(args.a, args.b)
    x_max = args.x_max
    if x_max is None:
        x_max = 2.5 * abs(params.a / params.b) if params.b != 0.0 else 5.0
    spec = PortraitSpec(x_max=x_max)
    portrait = phase_portrait(params, spec)
    points = critical_points(params)
    separatrix = None
    if args.separatrix:
        if params.b == 0.0:
            raise InvalidParameter("separatrix shooting requires b != 0")
        if args.bracket is not None:
            lo, hi = args.bracket
        else:
            ratio = abs(params.a / params.b)
            lo, hi = 0.5 * ratio, 6.0 * max(ratio, 1.0)
        xbar = find_separatrix(params, args.theta0, (lo, hi))
        separatrix = (args.theta0, xbar)
    args.out.mkdir(parents=True, exist_ok=True)
    svg_path = args.out / "phase.svg"
    json_path = args.out / "critical_points.json"
    output.write_phase_svg(portrait, points, svg_path, separatrix)
    doc = {
        "params": {"a": params.a, "b": params.b},
        "critical_points": [{
            "theta": p.theta,
            "x": p.x,
            "eigenvalues": [[z.real, z.imag] for z in (complex(e) for e in p.eigenvalues)],
            "kind": p.kind.value,
        } for p in points],
        "special_solutions": [{"class": s.tag.value, "radius": s.radius}
                              for s in special_solutions(params)],
    }
    if separatrix is not None:
        doc["separatrix"] = {"theta0": separatrix[0], "x_bar": separatrix[1]}
    with open(json_path, "w", newline="\n") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")
    print(json.dumps({"files": [str(svg_path), str(json_path)], **doc}, indent=2))
    return EXIT_OK


def cmd_mesh(args) -> int:
    params = Params(args.a, args.b)
    ic = InitialConditions(args.x0, args.theta0)
    report = classify_surface(params, ic)
    spec = output.MeshSpec(n_profile=args.n_profile, n_revolve=args.n_revolve)

    if report.period is not None:
        controls = _controls_from_args(args, max_full_turns=args.periods + 1,
                                       max_arclength=(args.periods + 1.5) * report.period * 4.0)
        traj = integrate(params, ic, controls)
        window = (0.0, args.periods * report.period)
    else:
        span = args.max_arclength
        if span is None and report.surface.tag.value == "Cylinder":
            span = 4.0 * ic.x0
        controls = _controls_from_args(args) if span is None \
            else _controls_from_args(args, max_arclength=span)
        traj = integrate(params, ic, controls)
        window = None
    args.out.mkdir(parents=True, exist_ok=True)
    obj_path = args.out / "surface.obj"
    output.write_obj_mesh(traj, obj_path, spec, window)
    print(json.dumps({
        "class": report.surface.tag.value,
        "files": [str(obj_path)],
        "n_profile": spec.n_profile,
        "n_revolve": spec.n_revolve,
        "periods": args.periods if report.period is not None else None,
    }, indent=2))
    return EXIT_OK


def _sweep_cell(a, b, x0, t0):
    try:
        report = classify_surface(Params(a, b), InitialConditions(x0, t0))
        return output.report_to_dict(report), str(report.surface.tag.value)
    except Inconclusive as exc:
        return {"error": "Inconclusive", "message": str(exc),
                "diagnostics": exc.diagnostics}, "Inconclusive"
    except WlwError as exc:
        return {"error": type(exc).__name__, "message": str(exc)}, f"Error:{type(exc).__name__}"


def run_sweep(spec: SweepSpec, max_workers: Optional[int] = None) -> Path:
    """Classify every grid cell; per-cell reports plus a summary CSV.

    Cells run concurrently (WLW_THREADS caps the pool) but the summary is
    assembled in grid order, so output is independent of the worker count.
    """
    if max_workers is None:
        max_workers = int(os.environ.get("WLW_THREADS", "0")) or min(os.cpu_count() or 1, 8)
    spec.output_dir.mkdir(parents=True, exist_ok=True)
    cells = list(spec.cells())
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        results = list(pool.map(lambda c: _sweep_cell(*c[1]), cells))
    rows = ["a,b,x0,theta0,class"]
    for (idx, (a, b, x0, t0)), (doc, label) in zip(cells, results):
        name = "report_a{}_b{}_x{}_t{}.json".format(*idx)
        with open(spec.output_dir / name, "w", newline="\n") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        rows.append(",".join([output.fnum(a), output.fnum(b), output.fnum(x0),
                              output.fnum(t0), label]))
    summary = spec.output_dir / "summary.csv"
    with open(summary, "w", newline="\n") as fh:
        fh.write("\n".join(rows) + "\n")
    return summary


def cmd_sweep(args) -> int:
    spec = SweepSpec(
        a_values=parse_range(args.a),
        b_values=parse_range(args.b),
        x0_values=parse_range(args.x0),
        theta0_values=[parse_angle(t) for t in args.theta0_list.split(",") if t.strip()],
        output_dir=args.out,
    )
    summary = run_sweep(spec)
    n = sum(1 for _ in spec.cells())
    print(json.dumps({"cells": n, "summary": str(summary)}, indent=2))
    return EXIT_OK


def cmd_check(args) -> int:
    """Consistency checks on one trajectory: EL residual, first integral,
    mirror symmetry at vertical tangents, translation periodicity."""
    params = Params(args.a, args.b)
    ic = InitialConditions(args.x0, args.theta0)
    controls = _controls_from_args(args, max_full_turns=3, max_vertical_tangents=12)
    traj = integrate(params, ic, controls)
    checks: dict[str, dict] = {}

    try:
        if args.p_override is not None:
            ep = PowerEnergyParams(p=args.p_override,
                                   mu=-params.b / (params.a - 1.0) if params.a != 1.0 else 0.0)
        elif args.nu_override is not None:
            ep = ExpEnergyParams(nu=args.nu_override)
        else:
            ep = exponent_map(params)
        prof = (el_residual_exp if isinstance(ep, ExpEnergyParams)
                else el_residual_power)(traj, ep)
        checks["euler_lagrange"] = {
            "max_relative_residual": prof.max_relative,
            "excluded_points": prof.n_excluded,
            "pass": bool(prof.max_relative < 1e-6),
        }
    except NearSingular as exc:
        checks["euler_lagrange"] = {"benign": str(exc), "pass": True}

    if params.b == 0.0:
        probes = np.linspace(traj.s_min, traj.s_max, 33)
        ms = []
        for s in probes:
            x, z, th = traj.eval(float(s))
            if abs(math.sin(th)) > 1e-8:
                ms.append(first_integral_m(params, ProfileState(float(s), float(x),
                                                                float(z), float(th))).m)
        drift = (max(ms) - min(ms)) / abs(np.median(ms)) if ms else 0.0
        checks["first_integral"] = {"relative_drift": drift, "pass": bool(drift < 1e-6)}

    tangents = traj.events_of(EventKind.VERTICAL_TANGENT)
    if tangents:
        worst = max(check_horizontal_symmetry(traj, e.s) for e in tangents)
        checks["horizontal_symmetry"] = {"max_residual": worst, "pass": bool(worst < 1e-6)}

    try:
        T, z_shift = detect_period(traj)
        checks["periodicity"] = {"period": T, "z_shift": z_shift, "pass": True}
    except NoFullTurn:
        pass

    ok = all(c.get("pass", True) for c in checks.values())
    print(json.dumps({"pass": ok, "checks": checks}, indent=2))
    return EXIT_OK if ok else EXIT_FAILURE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wlw",
        description="Rotational surfaces with kappa1 = a*kappa2 + b: "
                    "integration, phase plane, classification, export.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("integrate", help="integrate a profile curve, write CSV + events")
    _add_common_flags(p)
    p.add_argument("--svg", action="store_true", help="also write a profile plot")
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("classify", help="classify the surface for one initial condition")
    _add_common_flags(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("phase", help="phase portrait and critical points")
    _add_common_flags(p, with_ic=False)
    p.add_argument("--x-max", type=float, default=None)
    p.add_argument("--theta0", type=parse_angle, default=0.0,
                   help="shooting angle for --separatrix")
    p.add_argument("--separatrix", action="store_true")
    p.add_argument("--bracket", type=lambda s: tuple(float(t) for t in s.split(":")),
                   default=None, help="shooting bracket lo:hi")
    p.set_defaults(func=cmd_phase)

    p = sub.add_parser("mesh", help="export a revolved OBJ mesh")
    _add_common_flags(p)
    p.add_argument("--n-profile", type=int, default=96)
    p.add_argument("--n-revolve", type=int, default=48)
    p.add_argument("--periods", type=int, default=1)
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("sweep", help="classify a parameter grid")
    p.add_argument("-a", required=True, help="value or lo:hi:count")
    p.add_argument("-b", required=True, help="value or lo:hi:count")
    p.add_argument("--x0", required=True, help="value or lo:hi:count")
    p.add_argument("--theta0-list", default="pi/2", help="comma-separated angles")
    p.add_argument("-o", "--out", type=Path, required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check", help="verify invariants on one trajectory")
    _add_common_flags(p)
    p.add_argument("--p-override", type=float, default=None)
    p.add_argument("--nu-override", type=float, default=None)
    p.set_defaults(func=cmd_check)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except Inconclusive as exc:
        print(json.dumps({"error": "Inconclusive", "message": str(exc),
                          "diagnostics": exc.diagnostics}, indent=2))
        return EXIT_INCONCLUSIVE
    except InvalidParameter as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}, indent=2))
        return EXIT_INVALID
    except WlwError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}, indent=2))
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
