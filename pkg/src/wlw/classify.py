"""Surface taxonomy from integrated profile curves.

The decision tree follows the geometry: exact rest points and circles are
recognized algebraically, the pure linear case b = 0 is settled by the sign
of a, and everything else is read off one integration - axis hits with pole
ordering, bounded tangent oscillation, full tangent turns with translation
periodicity, or asymptotic capture by the interior saddle.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import quad

from .errors import Inconclusive, InvalidParameter, QuadratureFailure, WrongSignRegime
from .integrate import (
    EventKind,
    IntegrationControls,
    Termination,
    Trajectory,
    detect_period,
    find_self_intersections,
    integrate,
)
from .model import FirstIntegralValue, InitialConditions, Params, canonicalize, is_equilibrium

TWO_PI = 2.0 * math.pi

# Half-width of the pinched-spheroid band: the pole heights are declared
# equal when they differ by less than this times x0.
POLE_ORDER_TOL = 1e-5

# Saddle-capture band in theta (around 3*pi/2 mod 2*pi) and in x (around a/b).
CAPTURE_BAND = 1e-3


class SurfaceTag(str, enum.Enum):
    PLANE = "Plane"
    SPHERE = "Sphere"
    CYLINDER = "Cylinder"
    OVALOID = "Ovaloid"
    CATENOID_ENTIRE = "CatenoidEntire"
    CATENOID_BOUNDED = "CatenoidBounded"
    VESICLE = "Vesicle"
    PINCHED_SPHEROID = "PinchedSpheroid"
    IMMERSED_SPHEROID = "ImmersedSpheroid"
    CYLINDRICAL_ANTINODOID = "CylindricalAntinodoid"
    ANTINODOID = "Antinodoid"
    UNDULOID = "Unduloid"
    NODOID = "Nodoid"


@dataclass(frozen=True)
class SurfaceClass:
    """Taxonomy tag; spheres and cylinders carry their radius.

    radius is None either when the tag has no radius or, for the b = 0,
    a = 1 family, when round spheres of every radius qualify.
    """

    tag: SurfaceTag
    radius: Optional[float] = None

    def __post_init__(self):
        if self.radius is not None and not (self.radius > 0.0):
            raise InvalidParameter(f"radius must be > 0, got {self.radius}")

    def __str__(self):
        return self.tag.value if self.radius is None else f"{self.tag.value}({self.radius:g})"


@dataclass(frozen=True)
class ClassificationReport:
    surface: SurfaceClass
    pole_z: Optional[tuple[float, float]]      # (z at backward pole, z at forward pole)
    period: Optional[float]
    z_shift: Optional[float]
    self_intersections: int
    asymptotic_radius: Optional[float]
    theta_range: Optional[tuple[float, float]]  # None when the tangent winds unboundedly
    canonicalized_b: bool
    params: Params
    ic: InitialConditions
    termination: Termination


def special_solutions(params: Params) -> list[SurfaceClass]:
    """Isoparametric members of the family (a, b).

    b = 0: the plane always, plus round spheres of arbitrary radius when
    a = 1.  b != 0: the unique round sphere of radius |1-a|/|b| when a != 1,
    and the circular cylinder of radius |a/b|.
    """
    out: list[SurfaceClass] = []
    if params.b == 0.0:
        out.append(SurfaceClass(SurfaceTag.PLANE))
        if params.a == 1.0:
            out.append(SurfaceClass(SurfaceTag.SPHERE, radius=None))
        return out
    if params.a != 1.0:
        out.append(SurfaceClass(SurfaceTag.SPHERE, radius=abs(1.0 - params.a) / abs(params.b)))
    out.append(SurfaceClass(SurfaceTag.CYLINDER, radius=abs(params.a / params.b)))
    return out


def nodoid_threshold(params: Params) -> tuple[float, float]:
    """Initial radii (at theta0 = pi/2) separating the a < 0 classes.

    Returns (x_cyl, x_sph) = (-a/b, (1-a)/b): below x_cyl and between the
    two values the surface is unduloid-type, at x_cyl the cylinder, at x_sph
    the sphere, and beyond x_sph nodoid-type.
    """
    if params.a >= 0.0:
        raise WrongSignRegime(f"thresholds require a < 0, got a={params.a}")
    if not (params.b > 0.0):
        raise InvalidParameter(f"thresholds require b > 0, got b={params.b}")
    return -params.a / params.b, (1.0 - params.a) / params.b


def catenoid_asymptote(m: FirstIntegralValue, a: float) -> Optional[float]:
    """Height asymptote z1 of the b = 0, a < -1 catenoid-type profile.

    z as a graph over the radius satisfies z'(x) = sqrt(-m)/sqrt(m + x^(-2a)),
    so z1 = sqrt(-m) * integral over [x_min, inf) with x_min the neck radius
    (-m)^(-1/(2a)).  For -1 <= a < 0 the integral diverges and None is
    returned (the graph covers the whole axis).
    """
    if a >= 0.0:
        raise WrongSignRegime(f"asymptote applies to a < 0, got a={a}")
    if -1.0 <= a < 0.0:
        return None
    mval = m.m
    x_min = (-mval) ** (-1.0 / (2.0 * a))
    q = -2.0 * a  # > 2

    # Near the neck the integrand has an inverse-sqrt singularity; the
    # substitution t = x_min + u^2 makes it regular.
    def near(u):
        t = x_min + u * u
        return 2.0 * u / math.sqrt(mval + t**q)

    def far(t):
        return 1.0 / math.sqrt(mval + t**q)

    i1, e1 = quad(near, 0.0, math.sqrt(x_min), epsabs=1e-12, epsrel=1e-12, limit=400)
    i2, e2 = quad(far, 2.0 * x_min, np.inf, epsabs=1e-12, epsrel=1e-12, limit=400)
    total = i1 + i2
    if not math.isfinite(total) or (e1 + e2) > 1e-7 * max(1.0, abs(total)):
        raise QuadratureFailure(f"asymptote quadrature error {e1 + e2:.2e} too large")
    return math.sqrt(-mval) * total


def _default_controls(params: Params, ic: InitialConditions) -> IntegrationControls:
    scale = max(ic.x0, abs(params.a / params.b) if params.b != 0.0 else 0.0, 1.0)
    return IntegrationControls(max_arclength=200.0 * scale,
                               max_full_turns=3,
                               max_vertical_tangents=12)


def _capture_hold_needed(a: float) -> float:
    # The saddle's eigenvalues are +-sqrt(a): residence inside the capture
    # band is limited to about 2*ln(band/eps)/sqrt(a) in double precision,
    # so the required hold must shrink with a.
    return min(50.0, 16.0 / math.sqrt(a))


def _capture_window(traj: Trajectory, params: Params) -> Optional[tuple[float, float]]:
    """Longest samples window held inside the saddle band; None if too short."""
    if params.a <= 0.0 or params.b <= 0.0:
        return None
    x_star = params.a / params.b
    dist_theta = np.abs(np.remainder(traj.theta - 1.5 * math.pi, TWO_PI))
    dist_theta = np.minimum(dist_theta, TWO_PI - dist_theta)
    inside = (dist_theta < CAPTURE_BAND) & (np.abs(traj.x - x_star) < CAPTURE_BAND)
    if not inside.any():
        return None
    best = None
    start = None
    for i, flag in enumerate(inside):
        if flag and start is None:
            start = i
        elif not flag and start is not None:
            span = traj.s[i - 1] - traj.s[start]
            if best is None or span > best[1] - best[0]:
                best = (traj.s[start], traj.s[i - 1])
            start = None
    if start is not None:
        span = traj.s[-1] - traj.s[start]
        if best is None or span > best[1] - best[0]:
            best = (traj.s[start], traj.s[-1])
    if best is not None and best[1] - best[0] >= _capture_hold_needed(params.a):
        return best
    return None


def _monotone_theta(traj: Trajectory) -> bool:
    d = np.diff(traj.theta)
    tol = 1e-10
    return bool(np.all(d >= -tol) or np.all(d <= tol))


def _count_loops_per_period(traj: Trajectory, period: float) -> tuple[int, Optional[bool]]:
    """Loops per period and whether they curl toward the axis.

    Crossings are collected over two periods and attributed to the period
    containing their first parameter, so pairs straddling a period boundary
    are not lost.  A loop curls toward the axis when the arc between its
    crossing parameters carries the innermost radius of the trajectory.
    """
    lo = max(0.0, traj.s_min)
    hi = min(lo + 2.1 * period, traj.s_max)
    records = find_self_intersections(traj, window=(lo, hi))
    in_first = [r for r in records if lo <= r.s_a < lo + period]
    if not records:
        return 0, None
    toward_votes = []
    for r in records:
        arc = traj.eval(np.linspace(r.s_a, r.s_b, 101))[0]
        inner_gap = arc.min() - traj.x.min()
        outer_gap = traj.x.max() - arc.max()
        toward_votes.append(inner_gap < outer_gap)
    toward = sum(toward_votes) > len(toward_votes) / 2
    return max(len(in_first), 1), toward


def classify_surface(params: Params, ic: InitialConditions,
                     controls: Optional[IntegrationControls] = None) -> ClassificationReport:
    """Classify the rotational surface generated from (a, b, x0, theta0).

    Inputs with b < 0 are reduced to b > 0 by the orientation reflection and
    the report is translated back (canonicalized_b marks this).  Raises
    Inconclusive when the integration budget ends before any criterion fires.
    """
    cparams, cic, reflected = canonicalize(params, ic)
    if controls is None:
        controls = _default_controls(cparams, cic)
    report = _classify_canonical(cparams, cic, controls)
    if not reflected:
        return report
    return ClassificationReport(
        surface=report.surface,
        pole_z=None if report.pole_z is None else (report.pole_z[1], report.pole_z[0]),
        period=report.period,
        z_shift=None if report.z_shift is None else -report.z_shift,
        self_intersections=report.self_intersections,
        asymptotic_radius=report.asymptotic_radius,
        theta_range=None if report.theta_range is None
        else (report.theta_range[0] - math.pi, report.theta_range[1] - math.pi),
        canonicalized_b=True,
        params=params,
        ic=ic,
        termination=report.termination,
    )


def _classify_canonical(params: Params, ic: InitialConditions,
                        controls: IntegrationControls) -> ClassificationReport:
    a, b = params.a, params.b

    if b == 0.0:
        return _classify_pure_linear(params, ic, controls)

    if is_equilibrium(params, ic, controls.equilibrium_tol):
        traj = integrate(params, ic, controls)
        return ClassificationReport(
            surface=SurfaceClass(SurfaceTag.CYLINDER, radius=ic.x0),
            pole_z=None, period=None, z_shift=None, self_intersections=0,
            asymptotic_radius=ic.x0,
            theta_range=(ic.theta0, ic.theta0),
            canonicalized_b=False, params=params, ic=ic,
            termination=traj.termination)

    sphere_radius = _sphere_radius_if_match(params, ic)
    if sphere_radius is not None:
        # The a < 0 sphere is the lone axis-meeting member of its family;
        # neighboring trajectories whip around the pole at a distance set by
        # the integration noise, so the axis threshold must sit above it.
        controls = IntegrationControls(
            rel_tol=controls.rel_tol, abs_tol=controls.abs_tol,
            max_arclength=controls.max_arclength, max_steps=controls.max_steps,
            axis_epsilon=max(controls.axis_epsilon, 1e-4 * ic.x0),
            event_refine_tol=controls.event_refine_tol, x_blowup=controls.x_blowup,
            max_full_turns=controls.max_full_turns,
            max_vertical_tangents=controls.max_vertical_tangents,
            two_sided=controls.two_sided, equilibrium_tol=controls.equilibrium_tol)

    traj = integrate(params, ic, controls)
    pole_z = _pole_heights(traj)
    captured = _capture_window(traj, params)
    winding = [e for e in traj.events_of(EventKind.FULL_TURN)
               if abs(round((e.state.theta - ic.theta0) / TWO_PI)) >= 1]

    if sphere_radius is not None and pole_z is not None:
        return _report(SurfaceClass(SurfaceTag.SPHERE, radius=float(traj.x.max())),
                       traj, params, ic, pole_z=pole_z, self_intersections=0,
                       theta_range=traj.theta_range())

    if captured is not None and not _ends_on_axis_both(traj):
        # Count crossings of the curve proper, not of the post-capture
        # numerical divergence: the window ends inside the capture band.
        loops = find_self_intersections(traj, window=(traj.s_min, captured[1]))
        return _report(SurfaceClass(SurfaceTag.CYLINDRICAL_ANTINODOID), traj, params, ic,
                       self_intersections=len(loops),
                       asymptotic_radius=a / b,
                       theta_range=traj.theta_range())

    if winding:
        period, z_shift = detect_period(traj)
        n_loops, toward_axis = _count_loops_per_period(traj, period)
        if toward_axis is None:
            toward_axis = a < 0.0
        tag = SurfaceTag.NODOID if toward_axis else SurfaceTag.ANTINODOID
        return _report(SurfaceClass(tag), traj, params, ic,
                       period=period, z_shift=z_shift,
                       self_intersections=n_loops, theta_range=None)

    if pole_z is not None:
        if _monotone_theta(traj):
            if a < 0.0:
                return _report(SurfaceClass(SurfaceTag.SPHERE, radius=float(traj.x.max())),
                               traj, params, ic, pole_z=pole_z, self_intersections=0,
                               theta_range=traj.theta_range())
            return _report(SurfaceClass(SurfaceTag.OVALOID), traj, params, ic,
                           pole_z=pole_z, self_intersections=0,
                           theta_range=traj.theta_range())
        z1, z2 = pole_z
        if abs(z2 - z1) < POLE_ORDER_TOL * ic.x0:
            tag = SurfaceTag.PINCHED_SPHEROID
        elif z2 > z1:
            tag = SurfaceTag.VESICLE
        else:
            tag = SurfaceTag.IMMERSED_SPHEROID
        loops = find_self_intersections(traj)
        return _report(SurfaceClass(tag), traj, params, ic, pole_z=pole_z,
                       self_intersections=len(loops), theta_range=traj.theta_range())

    span = traj.theta.max() - traj.theta.min()
    if a < 0.0 and span < TWO_PI:
        return _report(SurfaceClass(SurfaceTag.UNDULOID), traj, params, ic,
                       self_intersections=0, theta_range=traj.theta_range())

    raise Inconclusive(
        "no classification criterion fired before the integration budget ended",
        diagnostics={
            "termination": traj.termination.value,
            "termination_backward":
                traj.termination_backward.value if traj.termination_backward else None,
            "theta_span": span,
            "s_max": traj.s_max,
            "events": [e.kind.value for e in traj.events],
        })


def _classify_pure_linear(params: Params, ic: InitialConditions,
                          controls: IntegrationControls) -> ClassificationReport:
    a = params.a
    sin_t0 = math.sin(ic.theta0)

    if abs(sin_t0) < 1e-12:
        traj = integrate(params, ic, controls)
        return _report(SurfaceClass(SurfaceTag.PLANE), traj, params, ic,
                       self_intersections=0, theta_range=traj.theta_range())

    # Bound the needed arclength by the extreme radius from the first
    # integral: x'^2 = 1 + m x^(2a) pins max x (a > 0) or the neck (a < 0).
    m = -(sin_t0 * sin_t0) * ic.x0 ** (-2.0 * a)
    x_extreme = (-m) ** (-1.0 / (2.0 * a))
    scale = max(ic.x0, x_extreme, 1.0)
    run = IntegrationControls(max_arclength=min(40.0 * scale, controls.max_arclength),
                              max_vertical_tangents=controls.max_vertical_tangents,
                              rel_tol=controls.rel_tol, abs_tol=controls.abs_tol,
                              axis_epsilon=controls.axis_epsilon,
                              event_refine_tol=controls.event_refine_tol)
    traj = integrate(params, ic, run)

    if a == 1.0:
        return _report(SurfaceClass(SurfaceTag.SPHERE, radius=ic.x0 / abs(sin_t0)),
                       traj, params, ic, pole_z=_pole_heights(traj),
                       self_intersections=0, theta_range=traj.theta_range())
    if a > 0.0:
        return _report(SurfaceClass(SurfaceTag.OVALOID), traj, params, ic,
                       pole_z=_pole_heights(traj), self_intersections=0,
                       theta_range=traj.theta_range())
    tag = SurfaceTag.CATENOID_ENTIRE if a >= -1.0 else SurfaceTag.CATENOID_BOUNDED
    return _report(SurfaceClass(tag), traj, params, ic,
                   self_intersections=0, theta_range=traj.theta_range())


def _sphere_radius_if_match(params: Params, ic: InitialConditions) -> Optional[float]:
    """Radius of the round sphere when the initial data lies on it, a < 0 only.

    For a > 0 the sphere is an interior member of the ovaloid family and is
    reported as Ovaloid; for a < 0 it is the lone axis-meeting solution and
    gets its own tag.
    """
    if params.a >= 0.0:
        return None
    kappa = params.b / (1.0 - params.a)
    if kappa == 0.0:
        return None
    target = kappa * ic.x0
    if abs(math.sin(ic.theta0) - target) <= 1e-9 * max(1.0, abs(target)):
        return 1.0 / abs(kappa)
    return None


def _ends_on_axis_both(traj: Trajectory) -> bool:
    return (traj.termination == Termination.AXIS_REACHED
            and traj.termination_backward == Termination.AXIS_REACHED)


def _pole_heights(traj: Trajectory) -> Optional[tuple[float, float]]:
    if not _ends_on_axis_both(traj):
        return None
    return float(traj.z[0]), float(traj.z[-1])


def _report(surface: SurfaceClass, traj: Trajectory, params: Params, ic: InitialConditions,
            pole_z=None, period=None, z_shift=None, self_intersections=0,
            asymptotic_radius=None, theta_range=None) -> ClassificationReport:
    return ClassificationReport(
        surface=surface, pole_z=pole_z, period=period, z_shift=z_shift,
        self_intersections=self_intersections, asymptotic_radius=asymptotic_radius,
        theta_range=theta_range, canonicalized_b=False, params=params, ic=ic,
        termination=traj.termination)
