"""File emitters: trajectory CSV, report/event JSON, SVG plots, OBJ meshes.

Everything written here is byte-deterministic for identical inputs: floats
in CSV and JSON use the shortest round-trip decimal (repr), SVG coordinates
use a fixed six-decimal format, and no timestamps or environment data are
embedded.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from importlib import resources
from typing import Iterable, Optional, Sequence

import numpy as np

from .classify import ClassificationReport
from .errors import DegenerateProfile, InvalidParameter
from .integrate import EventRecord, IntersectionRecord, Trajectory
from .model import principal_curvatures
from .phaseplane import CriticalPoint, PhasePortrait

CSV_HEADER = "s,x,z,theta,kappa1,kappa2"


def fnum(v: float) -> str:
    """Shortest decimal that round-trips to the same binary64."""
    return repr(float(v))


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """One row per accepted integration step: s, x, z, theta, kappa1, kappa2."""
    lines = [CSV_HEADER]
    a, b = traj.params.a, traj.params.b
    for s, x, z, theta in zip(traj.s, traj.x, traj.z, traj.theta):
        k2 = math.sin(theta) / x
        k1 = a * k2 + b
        lines.append(",".join(fnum(v) for v in (s, x, z, theta, k1, k2)))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_trajectory_csv(path) -> dict[str, np.ndarray]:
    with open(path, "r", newline="\n") as fh:
        header = fh.readline().strip().split(",")
        rows = [[float(tok) for tok in line.strip().split(",")] for line in fh if line.strip()]
    data = np.array(rows) if rows else np.empty((0, len(header)))
    return {name: data[:, i] for i, name in enumerate(header)}


def rewrite_trajectory_csv(columns: dict[str, np.ndarray], path) -> None:
    names = list(columns)
    lines = [",".join(names)]
    for row in zip(*(columns[n] for n in names)):
        lines.append(",".join(fnum(v) for v in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def events_to_dict(traj: Trajectory,
                   intersections: Optional[Sequence[IntersectionRecord]] = None) -> dict:
    events = [{
        "kind": e.kind.value,
        "s": e.s,
        "state": {"s": e.state.s, "x": e.state.x, "z": e.state.z, "theta": e.state.theta},
    } for e in traj.events]
    if intersections:
        for r in intersections:
            events.append({
                "kind": "SelfIntersection",
                "s": r.s_a,
                "state": {"s": r.s_a, "x": r.x, "z": r.z,
                          "theta": float(traj.eval(r.s_a)[2])},
                "s_partner": r.s_b,
            })
    events.sort(key=lambda d: d["s"])
    return {
        "termination": traj.termination.value,
        "termination_backward":
            traj.termination_backward.value if traj.termination_backward else None,
        "events": events,
    }


def write_events_json(traj: Trajectory, path,
                      intersections: Optional[Sequence[IntersectionRecord]] = None) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(events_to_dict(traj, intersections), fh, indent=2)
        fh.write("\n")


def report_to_dict(report: ClassificationReport) -> dict:
    return {
        "class": report.surface.tag.value,
        "radius": report.surface.radius,
        "pole_z": list(report.pole_z) if report.pole_z is not None else None,
        "period": report.period,
        "z_shift": report.z_shift,
        "self_intersections": report.self_intersections,
        "theta_range": list(report.theta_range) if report.theta_range is not None else "unbounded",
        "asymptotic_radius": report.asymptotic_radius,
        "canonicalized_b": report.canonicalized_b,
        "params": {"a": report.params.a, "b": report.params.b},
        "initial_conditions": {"x0": report.ic.x0, "theta0": report.ic.theta0},
        "termination": report.termination.value,
    }


def write_report_json(report: ClassificationReport, path) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(report_to_dict(report), fh, indent=2)
        fh.write("\n")


def load_report_schema() -> dict:
    with resources.files("wlw.schemas").joinpath("report.schema.json").open("r") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# SVG
# ---------------------------------------------------------------------------

_SVG_STYLE = (
    "path.profile{fill:none;stroke:#1f4e80;stroke-width:1.5}"
    "line.axis{stroke:#888;stroke-dasharray:4 3;stroke-width:1}"
    "polyline.orbit{fill:none;stroke:#1f4e80;stroke-width:1}"
    "line.arrow{stroke:#b0b8c0;stroke-width:0.8}"
    "circle.AxisApproach{fill:#c03020}"
    "circle.VerticalTangent{fill:#208040}"
    "circle.FullTurn{fill:#8040a0}"
    "circle.EquilibriumHold{fill:#e0a020}"
    "circle.SelfIntersection{fill:#d06010}"
    "circle.Blowup{fill:#000}"
    "circle.Saddle,circle.ImproperSaddle{fill:#c03020}"
    "circle.Center{fill:#208040}"
    "circle.UnstableNode,circle.ImproperNode{fill:#8040a0}"
    "circle.StableNode{fill:#204080}"
    "line.separatrix{stroke:#c03020;stroke-width:1;stroke-dasharray:2 2}"
    "text{font-family:sans-serif;font-size:11px;fill:#333}"
)


def _f(v: float) -> str:
    return f"{v:.6f}"


class _Frame:
    """Affine data-to-screen map with equal or independent axis scales."""

    def __init__(self, xlim, ylim, width, height, margin=40.0, equal=True):
        self.width, self.height = width, height
        x_span = max(xlim[1] - xlim[0], 1e-12)
        y_span = max(ylim[1] - ylim[0], 1e-12)
        sx = (width - 2 * margin) / x_span
        sy = (height - 2 * margin) / y_span
        if equal:
            sx = sy = min(sx, sy)
        self.sx, self.sy = sx, sy
        self.x0 = margin - xlim[0] * sx
        self.y0 = height - margin + ylim[0] * sy

    def map(self, x, y):
        return self.x0 + self.sx * x, self.y0 - self.sy * y


def _svg_document(width, height, body: list[str]) -> str:
    head = (f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{width:g}" height="{height:g}" '
            f'viewBox="0 0 {width:g} {height:g}">')
    return "\n".join([head, f"<style>{_SVG_STYLE}</style>", *body, "</svg>"]) + "\n"


def write_profile_svg(traj: Trajectory, path, width: float = 640.0, height: float = 480.0,
                      n_samples: int = 1200) -> None:
    """Profile curve in the (x, z) half-plane with event markers."""
    pts = traj.resample(min(n_samples, max(64, 4 * len(traj.s))))
    x, z = pts[:, 1], pts[:, 2]
    xlim = (min(0.0, float(x.min())), float(x.max()) * 1.05 + 1e-9)
    zlim = (float(z.min()), float(z.max()) + 1e-9)
    fr = _Frame(xlim, zlim, width, height)

    ax_top = fr.map(0.0, zlim[1])
    ax_bot = fr.map(0.0, zlim[0])
    body = [f'<line class="axis" x1="{_f(ax_top[0])}" y1="{_f(ax_top[1])}" '
            f'x2="{_f(ax_bot[0])}" y2="{_f(ax_bot[1])}"/>']
    coords = [fr.map(xi, zi) for xi, zi in zip(x, z)]
    d = "M" + "L".join(f"{_f(u)} {_f(v)}" for u, v in coords)
    body.append(f'<path class="profile" d="{d}"/>')
    for e in traj.events:
        u, v = fr.map(e.state.x, e.state.z)
        body.append(f'<circle class="{e.kind.value}" cx="{_f(u)}" cy="{_f(v)}" r="3"/>')
    body.append(f'<text x="8" y="16">a={traj.params.a:g} b={traj.params.b:g} '
                f'x0={traj.ic.x0:g} theta0={traj.ic.theta0:g}</text>')
    with open(path, "w", newline="\n") as fh:
        fh.write(_svg_document(width, height, body))


def write_phase_svg(portrait: PhasePortrait, points: Sequence[CriticalPoint], path,
                    separatrix: Optional[tuple[float, float]] = None,
                    width: float = 720.0, height: float = 540.0) -> None:
    """Vector field, orbits and marked rest points; optional separatrix tick.

    separatrix, when given, is a (theta0, x_bar) pair drawn as a dashed
    vertical tick with its value annotated.
    """
    grid = portrait.grid
    tlim = (float(grid[:, 0].min()), float(grid[:, 0].max()))
    xlim = (0.0, float(grid[:, 1].max()) * 1.02 + 1e-9)
    fr = _Frame(tlim, xlim, width, height, equal=False)

    mags = np.hypot(grid[:, 2], grid[:, 3])
    scale = 0.35 * (tlim[1] - tlim[0]) / max(len(set(grid[:, 0])), 1)
    vmax = float(mags.max()) or 1.0
    body = []
    for th, xx, dth, dx in grid:
        m = math.hypot(dth, dx)
        if m == 0.0:
            continue
        L = scale * (0.2 + 0.8 * m / vmax)
        u0, v0 = fr.map(th, xx)
        u1, v1 = fr.map(th + L * dth / m, xx + L * dx / m * (tlim[1] - tlim[0]) / (xlim[1] - xlim[0]))
        body.append(f'<line class="arrow" x1="{_f(u0)}" y1="{_f(v0)}" '
                    f'x2="{_f(u1)}" y2="{_f(v1)}"/>')
    for orbit in portrait.orbits:
        inside = (orbit[:, 1] >= -1e-9) & (orbit[:, 1] <= xlim[1]) \
            & (orbit[:, 0] >= tlim[0] - 1e-9) & (orbit[:, 0] <= tlim[1] + 1e-9)
        arc = orbit[inside]
        if len(arc) < 2:
            continue
        pts = " ".join(f"{_f(u)},{_f(v)}" for u, v in (fr.map(t, xx) for t, xx in arc))
        body.append(f'<polyline class="orbit" points="{pts}"/>')
    for cp in points:
        u, v = fr.map(cp.theta, cp.x)
        body.append(f'<circle class="{cp.kind.value}" cx="{_f(u)}" cy="{_f(v)}" r="5"/>')
        body.append(f'<text x="{_f(u + 8)}" y="{_f(v - 6)}">{cp.kind.value}</text>')
    if separatrix is not None:
        th0, xbar = separatrix
        u0, v0 = fr.map(th0, 0.0)
        u1, v1 = fr.map(th0, xbar)
        body.append(f'<line class="separatrix" x1="{_f(u0)}" y1="{_f(v0)}" '
                    f'x2="{_f(u1)}" y2="{_f(v1)}"/>')
        body.append(f'<circle class="Saddle" cx="{_f(u1)}" cy="{_f(v1)}" r="3"/>')
        body.append(f'<text x="{_f(u1 + 6)}" y="{_f(v1 - 4)}">x&#773;={xbar:.4f}</text>')
    with open(path, "w", newline="\n") as fh:
        fh.write(_svg_document(width, height, body))


# ---------------------------------------------------------------------------
# OBJ
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MeshSpec:
    """Sampling density of the revolved triangle mesh."""

    n_profile: int = 96
    n_revolve: int = 48

    def __post_init__(self):
        if self.n_profile < 16:
            raise InvalidParameter("n_profile must be at least 16")
        if self.n_revolve < 8:
            raise InvalidParameter("n_revolve must be at least 8")


def write_obj_mesh(traj: Trajectory, path, spec: MeshSpec = MeshSpec(),
                   window: Optional[tuple[float, float]] = None) -> None:
    """Triangulated surface of revolution X(s, phi) = (x cos phi, x sin phi, z).

    The profile is resampled to n_profile points on the window, revolved at
    n_revolve angles (seam closed by index wrap-around), and written with
    per-vertex analytic normals and coherent winding.
    """
    lo = window[0] if window else traj.s_min
    hi = window[1] if window else traj.s_max
    pts = traj.resample(spec.n_profile, (lo, hi))
    usable = pts[:, 1] > 0.0
    if int(usable.sum()) < 16:
        raise DegenerateProfile(f"only {int(usable.sum())} usable profile samples")
    pts = pts[usable]
    n_prof = len(pts)
    phis = [2.0 * math.pi * j / spec.n_revolve for j in range(spec.n_revolve)]

    lines = [f"# surface of revolution: {n_prof} x {spec.n_revolve} vertices"]
    for _, x, z, theta in pts:
        st = math.sin(theta)
        ct = math.cos(theta)
        for phi in phis:
            lines.append(f"v {fnum(x * math.cos(phi))} {fnum(x * math.sin(phi))} {fnum(z)}")
    for _, x, z, theta in pts:
        st, ct = math.sin(theta), math.cos(theta)
        for phi in phis:
            lines.append(f"vn {fnum(st * math.cos(phi))} {fnum(st * math.sin(phi))} {fnum(-ct)}")

    def vid(i: int, j: int) -> int:
        return i * spec.n_revolve + (j % spec.n_revolve) + 1

    # winding chosen so face normals agree with the emitted vertex normals
    for i in range(n_prof - 1):
        for j in range(spec.n_revolve):
            a_ = vid(i, j)
            b_ = vid(i + 1, j)
            c_ = vid(i + 1, j + 1)
            d_ = vid(i, j + 1)
            lines.append(f"f {a_}//{a_} {c_}//{c_} {b_}//{b_}")
            lines.append(f"f {a_}//{a_} {d_}//{d_} {c_}//{c_}")
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_obj_mesh(path) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vertices, normals and triangle index array (0-based) from an OBJ file."""
    verts, norms, faces = [], [], []
    with open(path) as fh:
        for line in fh:
            tok = line.split()
            if not tok:
                continue
            if tok[0] == "v":
                verts.append([float(t) for t in tok[1:4]])
            elif tok[0] == "vn":
                norms.append([float(t) for t in tok[1:4]])
            elif tok[0] == "f":
                faces.append([int(t.split("/")[0]) - 1 for t in tok[1:4]])
    return np.array(verts), np.array(norms), np.array(faces, dtype=int)
