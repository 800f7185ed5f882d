"""Domain types and the profile-curve ODE for linear Weingarten surfaces.

A rotational surface whose principal curvatures satisfy kappa1 = a*kappa2 + b
is generated by revolving a planar arc-length curve (x(s), z(s)) about the
z-axis.  With theta the tangent angle, the generating curve solves

    x' = cos(theta),  z' = sin(theta),  theta' = a*sin(theta)/x + b,

where kappa1 = theta' is the profile curvature and kappa2 = sin(theta)/x the
normal curvature of the rotation orbits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import (
    DegenerateLine,
    InvalidParameter,
    NonPositiveRadius,
    NonPositiveScale,
    NotPureLinear,
)

# Radius below which a trajectory counts as having reached the rotation axis.
AXIS_EPSILON = 1e-8

# Tolerance for recognizing a phase-plane rest point (vertical-line solution).
EQUILIBRIUM_TOL = 1e-12


@dataclass(frozen=True)
class Params:
    """Curvature-relation coefficients: kappa1 = a*kappa2 + b, a != 0."""

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise InvalidParameter(f"coefficients must be finite, got a={self.a}, b={self.b}")
        if self.a == 0.0:
            raise InvalidParameter("a = 0 is excluded (kappa1 would be the constant b)")


@dataclass(frozen=True)
class ProfileState:
    """One point of the generating curve.

    theta is stored unwrapped (never reduced mod 2*pi) so that the winding of
    the tangent along a trajectory stays visible to classification.
    """

    s: float
    x: float
    z: float
    theta: float


@dataclass(frozen=True)
class InitialConditions:
    """Starting radius and tangent angle; z(0) = 0 by convention."""

    x0: float
    theta0: float

    def __post_init__(self):
        if not (self.x0 > 0.0):
            raise NonPositiveRadius(f"x0 must be > 0, got {self.x0}")
        if not math.isfinite(self.theta0):
            raise InvalidParameter(f"theta0 must be finite, got {self.theta0}")


@dataclass(frozen=True)
class FirstIntegralValue:
    """Conserved constant m of the b = 0 relation x'^2 = 1 + m*x^(2a)."""

    m: float

    def __post_init__(self):
        if not (self.m < 0.0):
            raise InvalidParameter(f"m must be negative for non-line profiles, got {self.m}")


def rhs(params: Params, state: ProfileState) -> tuple[float, float, float]:
    """Right-hand side (x', z', theta') of the profile ODE at one state."""
    if state.x <= 0.0:
        raise NonPositiveRadius(f"x must be > 0, got {state.x}")
    return (
        math.cos(state.theta),
        math.sin(state.theta),
        params.a * math.sin(state.theta) / state.x + params.b,
    )


def principal_curvatures(params: Params, state: ProfileState) -> tuple[float, float]:
    """Return (kappa1, kappa2) = (a*kappa2 + b, sin(theta)/x).

    The linear relation holds exactly because kappa1 is built from kappa2.
    """
    if state.x <= 0.0:
        raise NonPositiveRadius(f"x must be > 0, got {state.x}")
    kappa2 = math.sin(state.theta) / state.x
    return params.a * kappa2 + params.b, kappa2


def reflect_b(params: Params, ic: InitialConditions) -> tuple[Params, InitialConditions]:
    """Map (a, b, x0, theta0) -> (a, -b, x0, theta0 + pi).

    The reflected problem's solution is the s-reversal of the original, so
    every statement about b > 0 transfers to b < 0.  Applying the map twice
    returns the inputs with theta0 shifted by 2*pi.
    """
    return Params(params.a, -params.b), InitialConditions(ic.x0, ic.theta0 + math.pi)


def rescale(lam: float, params: Params, ic: InitialConditions) -> tuple[Params, InitialConditions]:
    """Homothety by lam > 0: (a, b/lam) with x0 scaled to lam*x0.

    The rescaled solution satisfies x̄(s) = lam*x(s/lam), z̄(s) = lam*z(s/lam).
    """
    if not (lam > 0.0):
        raise NonPositiveScale(f"scale must be > 0, got {lam}")
    return Params(params.a, params.b / lam), InitialConditions(lam * ic.x0, ic.theta0)


def first_integral_m(params: Params, state: ProfileState) -> FirstIntegralValue:
    """Conserved m = -sin(theta)^2 / x^(2a) of the b = 0 system.

    Raises NotPureLinear when b != 0 and DegenerateLine when sin(theta) = 0
    exactly (the m = 0 case is a straight horizontal line, not admissible).
    """
    if params.b != 0.0:
        raise NotPureLinear(f"first integral requires b = 0, got b={params.b}")
    if state.x <= 0.0:
        raise NonPositiveRadius(f"x must be > 0, got {state.x}")
    sin_t = math.sin(state.theta)
    if sin_t == 0.0:
        raise DegenerateLine("sin(theta) = 0: m = 0 is excluded")
    return FirstIntegralValue(-(sin_t * sin_t) * state.x ** (-2.0 * params.a))


def is_equilibrium(params: Params, ic: InitialConditions, tol: float = EQUILIBRIUM_TOL) -> bool:
    """True when the initial condition is a rest point of the phase flow.

    Rest points have cos(theta0) = 0 and a*sin(theta0)/x0 + b = 0; the
    solution is then the vertical line x = x0 (a circular cylinder).
    """
    theta_dot = params.a * math.sin(ic.theta0) / ic.x0 + params.b
    return abs(math.cos(ic.theta0)) < tol and abs(theta_dot) < tol


def canonicalize(params: Params, ic: InitialConditions) -> tuple[Params, InitialConditions, bool]:
    """Reduce to b >= 0 via reflect_b; returns (params, ic, was_reflected)."""
    if params.b < 0.0:
        p2, ic2 = reflect_b(params, ic)
        return p2, ic2, True
    return params, ic, False
