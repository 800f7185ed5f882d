"""Equilibria, linearization and shooting for the autonomous tangent flow.

Multiplying the (theta, x) projection of the profile ODE by x removes the
axis pole and gives the polynomial vector field

    V(theta, x) = (a*sin(theta) + b*x,  x*cos(theta))

on [0, 2*pi] x {x >= 0}.  Its rest points organize the whole classification:
two on the axis, and (for b != 0) one interior point at x = |a|/b that is a
saddle for a > 0 and a center for a < 0.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DegenerateEigenvalue, InvalidParameter, NoBracket
from .integrate import EventKind, IntegrationControls, Termination, integrate
from .model import InitialConditions, Params

TWO_PI = 2.0 * math.pi


class SingularityKind(str, enum.Enum):
    UNSTABLE_NODE = "UnstableNode"
    IMPROPER_NODE = "ImproperNode"
    STABLE_NODE = "StableNode"
    SADDLE = "Saddle"
    IMPROPER_SADDLE = "ImproperSaddle"
    CENTER = "Center"


@dataclass(frozen=True)
class CriticalPoint:
    theta: float
    x: float
    eigenvalues: tuple[complex, complex]
    kind: SingularityKind


@dataclass(frozen=True)
class PortraitSpec:
    """Sampling box and resolution for a phase portrait."""

    x_max: float
    theta_min: float = 0.0
    theta_max: float = TWO_PI
    n_theta: int = 24
    n_x: int = 13
    orbit_seeds: Optional[Sequence[tuple[float, float]]] = None
    orbit_span: float = 40.0

    def __post_init__(self):
        if not (self.x_max > 0.0 and self.theta_max > self.theta_min):
            raise InvalidParameter("portrait box must be non-empty with x_max > 0")
        if self.n_theta < 2 or self.n_x < 2:
            raise InvalidParameter("portrait grid needs at least 2 samples per axis")


@dataclass(frozen=True)
class PhasePortrait:
    grid: np.ndarray                      # rows (theta, x, dtheta, dx)
    orbits: list = field(default_factory=list)  # each an (n, 2) array of (theta, x)


def autonomous_rhs(params: Params, theta, x):
    """The de-singularized field (a*sin(theta) + b*x, x*cos(theta))."""
    return params.a * np.sin(theta) + params.b * x, x * np.cos(theta)


def linearize(params: Params, point: tuple[float, float]) -> np.ndarray:
    """Jacobian [[a*cos(theta), b], [-x*sin(theta), cos(theta)]] at a point."""
    theta, x = point
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[params.a * c, params.b], [-x * s, c]])


def classify_singularity(eigenvalues: tuple[complex, complex]) -> SingularityKind:
    """Map a linearization eigenvalue pair to its rest-point type.

    Raises DegenerateEigenvalue when an eigenvalue vanishes, and rejects
    genuinely complex pairs with nonzero real part (they do not occur for
    this field).
    """
    l1, l2 = complex(eigenvalues[0]), complex(eigenvalues[1])
    scale = max(abs(l1), abs(l2))
    if scale == 0.0 or min(abs(l1), abs(l2)) < 1e-14 * scale:
        raise DegenerateEigenvalue(f"zero eigenvalue in {eigenvalues}")
    tol = 1e-9 * scale
    real = abs(l1.imag) < tol and abs(l2.imag) < tol
    imag = abs(l1.real) < tol and abs(l2.real) < tol
    if real:
        r1, r2 = l1.real, l2.real
        if r1 > 0.0 and r2 > 0.0:
            return SingularityKind.IMPROPER_NODE if abs(r1 - r2) < tol else SingularityKind.UNSTABLE_NODE
        if r1 < 0.0 and r2 < 0.0:
            return SingularityKind.STABLE_NODE
        return SingularityKind.SADDLE
    if imag:
        return SingularityKind.CENTER
    raise InvalidParameter(f"eigenvalue pair {eigenvalues} is not produced by this field")


def critical_points(params: Params) -> list[CriticalPoint]:
    """Rest points with x >= 0: the two axis points, plus x = |a|/b for b != 0.

    The interior point sits at theta = 3*pi/2 when a/b > 0 and at
    theta = pi/2 when a/b < 0; it corresponds to the vertical-line profile
    x = |a|/b (a circular cylinder).
    """
    a, b = params.a, params.b
    pts = []
    for theta in (0.0, math.pi):
        J = linearize(params, (theta, 0.0))
        eigs = tuple(np.linalg.eigvals(J))
        kind = classify_singularity(eigs)
        if theta > 0.0 and a == -1.0:
            kind = SingularityKind.IMPROPER_SADDLE
        pts.append(CriticalPoint(theta, 0.0, eigs, kind))
    if b != 0.0:
        if a / b > 0.0:
            theta_c, x_c = 1.5 * math.pi, a / b
        else:
            theta_c, x_c = 0.5 * math.pi, -a / b
        J = linearize(params, (theta_c, x_c))
        eigs = tuple(np.linalg.eigvals(J))
        pts.append(CriticalPoint(theta_c, x_c, eigs, classify_singularity(eigs)))
    return pts


def _shot_is_unbounded(params: Params, theta0: float, x0: float,
                       controls: IntegrationControls) -> bool:
    traj = integrate(params, InitialConditions(x0, theta0), controls)
    return len(traj.events_of(EventKind.FULL_TURN)) > 0


def find_separatrix(params: Params, theta0: float, bracket: tuple[float, float],
                    controls: Optional[IntegrationControls] = None,
                    rel_width: float = 1e-6, max_iter: int = 60) -> float:
    """Locate the initial radius whose orbit runs into the interior saddle.

    Requires a > 0 and b > 0 so that the saddle exists.  Shots are classified
    as unbounded when the tangent completes a full turn and bounded otherwise
    (the bounded side ends on the axis); bisection on x0 runs until the
    bracket width drops below rel_width times the midpoint.
    """
    if not (params.a > 0.0 and params.b > 0.0):
        raise InvalidParameter("separatrix shooting requires a > 0 and b > 0")
    x_lo, x_hi = bracket
    if not (0.0 < x_lo < x_hi):
        raise InvalidParameter(f"bad bracket {bracket}")
    if controls is None:
        scale = max(x_hi, params.a / params.b, 1.0)
        controls = IntegrationControls(rel_tol=1e-10, abs_tol=1e-12,
                                       max_arclength=80.0 * scale,
                                       max_full_turns=1, two_sided=False)
    lo_unbounded = _shot_is_unbounded(params, theta0, x_lo, controls)
    hi_unbounded = _shot_is_unbounded(params, theta0, x_hi, controls)
    if lo_unbounded == hi_unbounded:
        raise NoBracket(
            f"both endpoints classify as {'unbounded' if lo_unbounded else 'bounded'}")
    for _ in range(max_iter):
        mid = 0.5 * (x_lo + x_hi)
        if x_hi - x_lo < rel_width * mid:
            return mid
        if _shot_is_unbounded(params, theta0, mid, controls) == hi_unbounded:
            x_hi = mid
        else:
            x_lo = mid
    return 0.5 * (x_lo + x_hi)


def integrate_orbit(params: Params, seed: tuple[float, float], spec: PortraitSpec,
                    rtol: float = 1e-10, atol: float = 1e-12,
                    s_span: Optional[float] = None) -> np.ndarray:
    """One integral curve of the autonomous field, clipped to the portrait box."""
    a, b = params.a, params.b

    def f(s, y):
        return [a * math.sin(y[0]) + b * y[1], y[1] * math.cos(y[0])]

    span = s_span if s_span is not None else spec.orbit_span
    margin = 0.05 * (spec.theta_max - spec.theta_min)

    def leave_box(s, y):
        return min(y[0] - (spec.theta_min - margin), (spec.theta_max + margin) - y[0],
                   (1.05 * spec.x_max) - y[1])
    leave_box.terminal = True

    pieces = []
    for sign in (1.0, -1.0):
        sol = solve_ivp(f, (0.0, sign * span), list(seed), rtol=rtol, atol=atol,
                        events=[leave_box], max_step=span / 50.0)
        arc = sol.y.T
        pieces.append(arc[::-1] if sign < 0 else arc)
    return np.vstack([pieces[1], pieces[0][1:]])


def phase_portrait(params: Params, spec: PortraitSpec) -> PhasePortrait:
    """Vector-field samples on a grid plus integral curves through seed points."""
    thetas = np.linspace(spec.theta_min, spec.theta_max, spec.n_theta)
    xs = np.linspace(0.0, spec.x_max, spec.n_x)
    TH, XX = np.meshgrid(thetas, xs, indexing="ij")
    dth, dx = autonomous_rhs(params, TH, XX)
    grid = np.column_stack([TH.ravel(), XX.ravel(), dth.ravel(), dx.ravel()])

    seeds = spec.orbit_seeds
    if seeds is None:
        seeds = [(t0, x) for t0 in (0.0, 0.5 * math.pi, math.pi, 1.5 * math.pi)
                 for x in np.linspace(spec.x_max / 6.0, spec.x_max * 5.0 / 6.0, 3)]
    orbits = [integrate_orbit(params, seed, spec) for seed in seeds]
    return PhasePortrait(grid=grid, orbits=orbits)
