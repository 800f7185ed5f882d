import math

import numpy as np
import pytest

from wlw.classify import (
    SurfaceTag,
    catenoid_asymptote,
    classify_surface,
    nodoid_threshold,
    special_solutions,
)
from wlw.errors import Inconclusive, InvalidParameter, WrongSignRegime
from wlw.integrate import EventKind, IntegrationControls, integrate
from wlw.model import (
    FirstIntegralValue,
    InitialConditions,
    Params,
    ProfileState,
    first_integral_m,
)
from wlw.phaseplane import find_separatrix

PI = math.pi


def tags(params, theta0, x0_values):
    return [classify_surface(params, InitialConditions(x0, theta0)).surface.tag
            for x0 in x0_values]


class TestSpecialSolutions:
    def test_positive_a(self):
        out = special_solutions(Params(2, 1))
        assert [(s.tag, s.radius) for s in out] == [
            (SurfaceTag.SPHERE, 1.0), (SurfaceTag.CYLINDER, 2.0)]

    def test_umbilic_family(self):
        out = special_solutions(Params(1, 0))
        assert [(s.tag, s.radius) for s in out] == [
            (SurfaceTag.PLANE, None), (SurfaceTag.SPHERE, None)]

    def test_negative_a(self):
        out = special_solutions(Params(-2, 1))
        assert [(s.tag, s.radius) for s in out] == [
            (SurfaceTag.SPHERE, 3.0), (SurfaceTag.CYLINDER, 2.0)]

    def test_a_one_nonzero_b_has_no_sphere(self):
        out = special_solutions(Params(1, 2))
        assert [(s.tag, s.radius) for s in out] == [(SurfaceTag.CYLINDER, 0.5)]


class TestNegativeAFamily:
    def test_figure_sequence(self):
        got = tags(Params(-2, 1), PI / 2, [0.5, 2.0, 2.5, 3.0, 4.0])
        assert got == [SurfaceTag.UNDULOID, SurfaceTag.CYLINDER, SurfaceTag.UNDULOID,
                       SurfaceTag.SPHERE, SurfaceTag.NODOID]

    def test_sphere_closure(self):
        r = classify_surface(Params(-2, 1), InitialConditions(3.0, PI / 2))
        assert r.surface.tag == SurfaceTag.SPHERE
        assert r.surface.radius == pytest.approx(3.0, abs=1e-5)
        z1, z2 = r.pole_z
        assert abs(z1 + z2) < 1e-5

    def test_nodoid_features(self):
        r = classify_surface(Params(-2, 1), InitialConditions(4.0, PI / 2))
        assert r.surface.tag == SurfaceTag.NODOID
        assert r.period is not None and r.period > 0
        assert r.z_shift > 0
        assert r.self_intersections >= 1
        assert r.theta_range is None

    def test_unduloid_features(self):
        r = classify_surface(Params(-2, 1), InitialConditions(0.5, PI / 2))
        assert r.surface.tag == SurfaceTag.UNDULOID
        assert r.self_intersections == 0
        assert r.period is None
        lo, hi = r.theta_range
        assert hi - lo < 2 * PI

    def test_cylinder_features(self):
        r = classify_surface(Params(-2, 1), InitialConditions(2.0, PI / 2))
        assert r.surface.tag == SurfaceTag.CYLINDER
        assert r.surface.radius == pytest.approx(2.0)
        assert r.asymptotic_radius == pytest.approx(2.0)


class TestThresholds:
    def test_values(self):
        assert nodoid_threshold(Params(-2, 1)) == (2.0, 3.0)
        assert nodoid_threshold(Params(-1, 2)) == (0.5, 1.0)

    def test_wrong_regime(self):
        with pytest.raises(WrongSignRegime):
            nodoid_threshold(Params(2, 1))
        with pytest.raises(InvalidParameter):
            nodoid_threshold(Params(-2, -1))

    def test_sphere_threshold_flips_classification(self):
        x_cyl, x_sph = nodoid_threshold(Params(-2, 1))
        for delta in (1e-3, 1e-4):
            below = classify_surface(Params(-2, 1), InitialConditions(x_sph - delta, PI / 2))
            above = classify_surface(Params(-2, 1), InitialConditions(x_sph + delta, PI / 2))
            assert below.surface.tag == SurfaceTag.UNDULOID
            assert above.surface.tag == SurfaceTag.NODOID

    def test_cylinder_threshold_is_isolated(self):
        x_cyl, _ = nodoid_threshold(Params(-2, 1))
        got = tags(Params(-2, 1), PI / 2, [x_cyl - 1e-4, x_cyl, x_cyl + 1e-4])
        assert got == [SurfaceTag.UNDULOID, SurfaceTag.CYLINDER, SurfaceTag.UNDULOID]


class TestPositiveAFamily:
    def test_figure7_sequence(self):
        got = tags(Params(3, 1), 1.5 * PI, [1.0, 2.0, 3.0, 4.0])
        assert got == [SurfaceTag.OVALOID, SurfaceTag.OVALOID, SurfaceTag.CYLINDER,
                       SurfaceTag.ANTINODOID]

    def test_figure6_small_radius_is_vesicle(self):
        r = classify_surface(Params(3, 1), InitialConditions(1.0, 0.0))
        assert r.surface.tag == SurfaceTag.VESICLE
        z1, z2 = r.pole_z
        assert z2 > z1

    def test_figure6_pole_ordering_decides(self):
        for x0 in (2.0, 3.0):
            r = classify_surface(Params(3, 1), InitialConditions(x0, 0.0))
            z1, z2 = r.pole_z
            if abs(z2 - z1) < 1e-5 * x0:
                assert r.surface.tag == SurfaceTag.PINCHED_SPHEROID
            elif z2 > z1:
                assert r.surface.tag == SurfaceTag.VESICLE
            else:
                assert r.surface.tag == SurfaceTag.IMMERSED_SPHEROID
        # by the figure, x0 = 3 already lies on the immersed side
        r = classify_surface(Params(3, 1), InitialConditions(3.0, 0.0))
        assert r.surface.tag == SurfaceTag.IMMERSED_SPHEROID

    def test_pinched_transition_exists_between_vesicle_and_immersed(self):
        # bisection on the pole-height difference inside the figure bracket
        params = Params(3, 1)

        def pole_gap(x0):
            rep = classify_surface(params, InitialConditions(x0, 0.0))
            z1, z2 = rep.pole_z
            return z2 - z1

        lo, hi = 2.0, 3.0
        glo, ghi = pole_gap(lo), pole_gap(hi)
        assert glo > 0 > ghi
        for _ in range(25):
            mid = 0.5 * (lo + hi)
            if pole_gap(mid) > 0:
                lo = mid
            else:
                hi = mid
        x_star = 0.5 * (lo + hi)
        r = classify_surface(params, InitialConditions(x_star, 0.0))
        assert r.surface.tag == SurfaceTag.PINCHED_SPHEROID

    def test_antinodoid_beyond_separatrix(self):
        r = classify_surface(Params(3, 1), InitialConditions(6.0, 0.0))
        assert r.surface.tag == SurfaceTag.ANTINODOID
        assert r.z_shift < 0
        assert r.self_intersections >= 1

    def test_cylindrical_antinodoid_on_separatrix(self):
        xbar = find_separatrix(Params(3, 1), 0.0, (4.0, 7.0), rel_width=1e-13)
        r = classify_surface(Params(3, 1), InitialConditions(xbar, 0.0))
        assert r.surface.tag == SurfaceTag.CYLINDRICAL_ANTINODOID
        assert r.asymptotic_radius == pytest.approx(3.0)
        assert r.self_intersections == 1


class TestPureLinear:
    def test_plane_when_tangent_horizontal(self):
        r = classify_surface(Params(2, 0), InitialConditions(1.0, 0.0))
        assert r.surface.tag == SurfaceTag.PLANE

    def test_umbilic_sphere(self):
        r = classify_surface(Params(1, 0), InitialConditions(1.0, PI / 2))
        assert r.surface.tag == SurfaceTag.SPHERE
        assert r.surface.radius == pytest.approx(1.0)
        r = classify_surface(Params(1, 0), InitialConditions(1.0, PI / 4))
        assert r.surface.radius == pytest.approx(math.sqrt(2.0))

    @pytest.mark.parametrize("a,tag", [
        (2.0, SurfaceTag.OVALOID),
        (0.5, SurfaceTag.OVALOID),
        (-1.0, SurfaceTag.CATENOID_ENTIRE),
        (-0.5, SurfaceTag.CATENOID_ENTIRE),
        (-2.0, SurfaceTag.CATENOID_BOUNDED),
    ])
    def test_sign_of_a_decides(self, a, tag):
        r = classify_surface(Params(a, 0), InitialConditions(1.0, PI / 2))
        assert r.surface.tag == tag

    def test_ovaloid_hits_axis_on_both_sides(self):
        r = classify_surface(Params(2, 0), InitialConditions(1.0, PI / 2))
        assert r.pole_z is not None
        z1, z2 = r.pole_z
        assert abs(z1 + z2) < 1e-6

    @pytest.mark.parametrize("a", [2.0, -2.0])
    def test_homothety_invariance(self, a):
        base = classify_surface(Params(a, 0), InitialConditions(1.0, PI / 2)).surface.tag
        for lam in (0.5, 2.0):
            scaled = classify_surface(Params(a, 0),
                                      InitialConditions(lam * 1.0, PI / 2)).surface.tag
            assert scaled == base

    def test_ovaloid_graph_concavity(self):
        # z''(x) = theta'/cos(theta)^3 keeps one sign on each graph branch
        traj = integrate(Params(2, 0), InitialConditions(1.0, PI / 2),
                         IntegrationControls(max_arclength=20))
        s = np.linspace(traj.s_min + 0.05, traj.s_max - 0.05, 801)
        x, _, theta = traj.eval(s)
        cos_t = np.cos(theta)
        tp = traj.theta_prime(s)
        branch = np.abs(cos_t) > 1e-3
        zxx = tp[branch] / cos_t[branch] ** 3
        signs = np.sign(cos_t[branch])
        for sgn in (-1.0, 1.0):
            vals = zxx[signs == sgn]
            if vals.size:
                assert np.all(np.sign(vals) == np.sign(vals[0]))


class TestCatenoidAsymptote:
    def test_entire_range_returns_none(self):
        assert catenoid_asymptote(FirstIntegralValue(-1.0), -1.0) is None
        assert catenoid_asymptote(FirstIntegralValue(-0.5), -0.3) is None

    def test_wrong_regime(self):
        with pytest.raises(WrongSignRegime):
            catenoid_asymptote(FirstIntegralValue(-1.0), 2.0)

    def test_quadrature_agrees_with_ode(self):
        # follow the profile far out and compare the height limit
        m = first_integral_m(Params(-2, 0), ProfileState(0.0, 1.0, 0.0, PI / 2))
        z1 = catenoid_asymptote(m, -2.0)
        traj = integrate(Params(-2, 0), InitialConditions(1.0, PI / 2),
                         IntegrationControls(max_arclength=2e4, x_blowup=1e4,
                                             two_sided=False, max_steps=500_000))
        z_far = traj.z[-1]
        # remaining tail beyond x = 1e4 is below 1e-4
        assert z_far == pytest.approx(z1, abs=2e-4)

    def test_homothety_scaling(self):
        # under x -> lam x the constant maps to m * lam^(-2a)
        a, lam = -2.0, 2.0
        z1 = catenoid_asymptote(FirstIntegralValue(-1.0), a)
        z1_scaled = catenoid_asymptote(FirstIntegralValue(-1.0 * lam ** (-2 * a)), a)
        assert z1_scaled == pytest.approx(lam * z1, rel=1e-9)


class TestReportMechanics:
    def test_negative_b_is_reflected(self):
        direct = classify_surface(Params(-2, 1), InitialConditions(4.0, PI / 2))
        mirrored = classify_surface(Params(-2, -1), InitialConditions(4.0, PI / 2 + PI))
        assert mirrored.canonicalized_b
        assert mirrored.surface.tag == direct.surface.tag
        assert mirrored.z_shift == pytest.approx(-direct.z_shift, rel=1e-8)
        assert mirrored.period == pytest.approx(direct.period, rel=1e-10)

    def test_inconclusive_on_tiny_budget(self):
        controls = IntegrationControls(max_arclength=0.5, max_full_turns=3)
        with pytest.raises(Inconclusive) as info:
            classify_surface(Params(3, 1), InitialConditions(1.0, 0.0), controls)
        assert "termination" in info.value.diagnostics

    def test_embeddedness_counts(self):
        und = classify_surface(Params(-2, 1), InitialConditions(1.0, PI / 2))
        nod = classify_surface(Params(-2, 1), InitialConditions(3.5, PI / 2))
        assert und.self_intersections == 0
        assert nod.self_intersections >= 1
