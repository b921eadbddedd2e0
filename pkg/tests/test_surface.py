"""Geometry kernel tests: projection, tangent calculus, exp/log, curvature."""

import numpy as np
import pytest

from geoflow import surface as sf
from geoflow.errors import NoConvergence, NonConvex

from conftest import geodesic_ode_oracle, random_surface_points


class TestProjection:
    def test_radial_symmetry(self, unit_sphere):
        p = sf.project_to_surface(unit_sphere, np.array([2.0, 0.0, 0.0]))
        assert np.allclose(p.position, [1, 0, 0], atol=1e-10)

    def test_fixed_point(self, unit_sphere):
        p = sf.project_to_surface(unit_sphere, np.array([0.0, 1.0, 0.0]))
        assert np.allclose(p.position, [0, 1, 0], atol=1e-12)

    def test_axis_symmetry(self, ellipsoid112):
        p = sf.project_to_surface(ellipsoid112, np.array([0.0, 0.0, 10.0]))
        assert np.allclose(p.position, [0, 0, 2], atol=1e-9)

    def test_random_shell(self, catalog_bodies):
        rng = np.random.default_rng(11)
        for s in catalog_bodies.values():
            pts = random_surface_points(s, 1000, rng)
            q = pts * rng.uniform(0.7, 1.4, size=(1000, 1))
            proj = sf.project_points(s, q)
            assert np.abs(s.value(proj) - 1.0).max() <= sf.TOL_SURFACE

    def test_center_rejected(self, unit_sphere):
        with pytest.raises(NoConvergence):
            sf.project_to_surface(unit_sphere, np.array([0.0, 0.0, 0.0]))


class TestTangent:
    def test_normal_removal(self, unit_sphere):
        tv = sf.tangent_project(unit_sphere, np.array([1.0, 0, 0]), np.array([1.0, 1, 0]))
        assert np.allclose(tv.v, [0, 1, 0], atol=1e-14)

    def test_pure_normal(self, oblate08):
        p = sf.radial_point(oblate08, np.array([0.3, -0.5, 0.8]))
        n = sf.unit_normal(oblate08, p)
        tv = sf.tangent_project(oblate08, p, n)
        assert np.linalg.norm(tv.v) < 1e-14

    def test_idempotence(self, bumped):
        rng = np.random.default_rng(3)
        p = random_surface_points(bumped, 20, rng)
        w = rng.normal(size=(20, 3))
        t1 = sf.tangent_components(bumped, p, w)
        t2 = sf.tangent_components(bumped, p, t1)
        assert np.abs(t1 - t2).max() < 1e-13

    def test_invariant(self, catalog_bodies):
        rng = np.random.default_rng(4)
        for s in catalog_bodies.values():
            p = random_surface_points(s, 50, rng)
            v = sf.tangent_components(s, p, rng.normal(size=(50, 3)))
            g = s.grad(p)
            dots = np.abs(np.sum(v * g, axis=1))
            bound = sf.TOL_TANGENT * np.linalg.norm(v, axis=1) * np.linalg.norm(g, axis=1)
            assert np.all(dots <= bound + 1e-15)


class TestExpMap:
    def test_quarter_great_circle(self, unit_sphere):
        tv = sf.TangentVector(sf.SurfacePoint(np.array([1.0, 0, 0])),
                              (np.pi / 2) * np.array([0.0, 1, 0]))
        end = sf.exp_map(unit_sphere, tv)
        assert np.linalg.norm(end.position - [0, 1, 0]) < 1e-4

    def test_zero_velocity(self, oblate08):
        p = sf.radial_point(oblate08, np.array([1.0, 1.0, 0.2]))
        tv = sf.TangentVector(sf.SurfacePoint(p), np.zeros(3))
        end = sf.exp_map(oblate08, tv)
        assert np.allclose(end.position, p)

    def test_meridian_against_ode_oracle(self, ellipsoid112):
        # Small meridian arcs from the equator of the (1,1,2) ellipsoid,
        # checked against a dense independent ODE integration.
        base = np.array([1.0, 0.0, 0.0])
        for t in (0.05, 0.2, 0.5):
            v = t * np.array([0.0, 0.0, 1.0])
            got = sf.exp_many(ellipsoid112, base, v)
            want = geodesic_ode_oracle(ellipsoid112, base, v)
            assert np.linalg.norm(got - want) < 5e-6 * max(t, 0.1)

    def test_stays_on_surface(self, catalog_bodies):
        rng = np.random.default_rng(5)
        for s in catalog_bodies.values():
            p = random_surface_points(s, 100, rng)
            v = sf.tangent_components(s, p, rng.normal(size=(100, 3)) * 0.3)
            end = sf.exp_many(s, p, v)
            assert np.abs(s.value(end) - 1.0).max() <= sf.TOL_SURFACE


class TestLogMap:
    def test_quarter_great_circle(self, unit_sphere):
        tv = sf.log_map(unit_sphere, np.array([1.0, 0, 0]), np.array([0.0, 1, 0]))
        assert np.linalg.norm(tv.v - [0, np.pi / 2, 0]) < 1e-4
        assert abs(tv.norm() - np.pi / 2) < 1e-4

    def test_same_point(self, unit_sphere):
        p = np.array([0.0, 0.0, 1.0])
        tv = sf.log_map(unit_sphere, p, p)
        assert tv.norm() == 0.0

    def test_roundtrip_random_pairs(self, catalog_bodies):
        rng = np.random.default_rng(6)
        for s in catalog_bodies.values():
            inj = sf.injrad_proxy(s)
            p = random_surface_points(s, 100, rng)
            w = sf.tangent_components(s, p, rng.normal(size=(100, 3)))
            w /= np.linalg.norm(w, axis=1, keepdims=True)
            w *= rng.uniform(0.01, 0.9, size=(100, 1)) * inj
            q = sf.exp_many(s, p, w)
            v = sf.log_many(s, p, q)
            back = sf.exp_many(s, p, v)
            assert np.linalg.norm(back - q, axis=1).max() <= sf.TOL_SHOOT


class TestDistance:
    def test_quarter(self, unit_sphere):
        d = sf.geodesic_distance(unit_sphere, [1.0, 0, 0], [0.0, 1, 0])
        assert abs(d - np.pi / 2) < 1e-4

    def test_zero(self, unit_sphere):
        assert sf.geodesic_distance(unit_sphere, [0.0, 0, 1], [0.0, 0, 1]) == 0.0

    def test_radius_scaling(self, sphere_r2):
        d = sf.geodesic_distance(sphere_r2, [2.0, 0, 0], [0.0, 2, 0])
        assert abs(d - np.pi) < 2e-4

    def test_symmetry(self, catalog_bodies):
        rng = np.random.default_rng(7)
        for s in catalog_bodies.values():
            p = random_surface_points(s, 30, rng)
            q = sf.exp_many(s, p, sf.tangent_components(s, p, rng.normal(size=(30, 3)) * 0.3))
            for a, b in zip(p, q):
                d1 = sf.geodesic_distance(s, a, b)
                d2 = sf.geodesic_distance(s, b, a)
                assert abs(d1 - d2) <= 2 * sf.TOL_SHOOT


class TestCurvature:
    def test_unit_sphere(self, unit_sphere):
        rng = np.random.default_rng(8)
        p = random_surface_points(unit_sphere, 50, rng)
        for x in p[:10]:
            assert abs(sf.gaussian_curvature(unit_sphere, x) - 1.0) < 1e-10

    def test_radius_scaling(self, sphere_r2):
        K = sf.gaussian_curvature(sphere_r2, np.array([0.0, 0.0, 2.0]))
        assert abs(K - 0.25) < 1e-10

    def test_ellipsoid_pole(self, ellipsoid112):
        # Closed form at the pole: product of the meridian-ellipse principal
        # curvatures c/a^2 * c/b^2 = 4 for (a,b,c) = (1,1,2).
        K = sf.gaussian_curvature(ellipsoid112, np.array([0.0, 0.0, 2.0]))
        assert abs(K - 4.0) < 1e-10

    def test_positivity_grid(self, catalog_bodies):
        for s in catalog_bodies.values():
            theta = np.arccos(np.linspace(-1, 1, 64))
            phi = np.linspace(0, 2 * np.pi, 64, endpoint=False)
            T, P = np.meshgrid(theta, phi, indexing="ij")
            dirs = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P),
                             np.cos(T)], -1).reshape(-1, 3)
            pts = sf.radial_point(s, dirs)
            K = sf._gaussian_curvature_batch(s, pts)
            assert K.min() > 0

    def test_nonconvex_rejected_at_load(self):
        with pytest.raises(NonConvex):
            sf.BumpedSphere(1.0, 0.9, (0, 0, 1), 0.25)

    def test_nonconvex_curvature_raises(self):
        bad = sf.BumpedSphere(1.0, 0.9, (0, 0, 1), 0.25, validate=False)
        assert bad.k_min <= 0
        theta = np.arccos(np.linspace(-1, 1, 48))
        phi = np.linspace(0, 2 * np.pi, 48, endpoint=False)
        T, P = np.meshgrid(theta, phi, indexing="ij")
        dirs = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P),
                         np.cos(T)], -1).reshape(-1, 3)
        pts = sf.radial_point(bad, dirs)
        K = sf._gaussian_curvature_batch(bad, pts)
        worst = pts[np.argmin(K)]
        with pytest.raises(NonConvex):
            sf.gaussian_curvature(bad, worst)


class TestInjradProxy:
    def test_unit_sphere(self, unit_sphere):
        assert abs(sf.injrad_proxy(unit_sphere) - 0.5 * np.pi) < 1e-6

    def test_radius_two(self, sphere_r2):
        assert abs(sf.injrad_proxy(sphere_r2) - np.pi) < 1e-5

    def test_ellipsoid112(self, ellipsoid112):
        # K_max = 4 at the poles (sampled), so the proxy is pi/4.
        assert abs(sf.injrad_proxy(ellipsoid112) - 0.5 * np.pi / 2.0) < 1e-4


class TestScalingCovariance:
    @pytest.mark.parametrize("lam", [0.5, 2.0])
    def test_scaling(self, lam):
        base = sf.Ellipsoid(1.0, 0.9, 1.1)
        scaled = sf.Ellipsoid(lam, 0.9 * lam, 1.1 * lam)
        rng = np.random.default_rng(9)
        u = rng.normal(size=(20, 3))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        p = sf.radial_point(base, u)
        w = sf.tangent_components(base, p, rng.normal(size=(20, 3)) * 0.2)
        q = sf.exp_many(base, p, w)
        d_base = sf.distance_many(base, p, q)
        d_scaled = sf.distance_many(scaled, lam * p, lam * q)
        assert np.abs(d_scaled / d_base - lam).max() < 1e-4 * lam

        K_base = sf._gaussian_curvature_batch(base, p)
        K_scaled = sf._gaussian_curvature_batch(scaled, lam * p)
        assert np.abs(K_scaled * lam**2 / K_base - 1.0).max() < 1e-9

        assert abs(sf.injrad_proxy(scaled) / sf.injrad_proxy(base) - lam) < 1e-3 * lam


class TestValueTypes:
    def test_surface_point_validate(self, unit_sphere):
        assert sf.SurfacePoint(np.array([1.0, 0, 0])).validate(unit_sphere)
        assert not sf.SurfacePoint(np.array([1.1, 0, 0])).validate(unit_sphere)

    def test_tangent_vector_validate(self, unit_sphere):
        p = sf.SurfacePoint(np.array([1.0, 0, 0]))
        assert sf.TangentVector(p, np.array([0.0, 1, 0])).validate(unit_sphere)
        assert not sf.TangentVector(p, np.array([1.0, 1, 0])).validate(unit_sphere)


class TestNumbaConsistency:
    def test_exp_paths_agree(self, oblate08):
        if oblate08._kernel_kind < 0:
            pytest.skip("numba unavailable")
        rng = np.random.default_rng(10)
        p = random_surface_points(oblate08, 32, rng)
        v = sf.tangent_components(oblate08, p, rng.normal(size=(32, 3)) * 0.15)
        fast = sf.exp_many(oblate08, p, v, n_steps=20)
        kind = oblate08._kernel_kind
        try:
            oblate08._kernel_kind = -1
            slow = sf.exp_many(oblate08, p, v, n_steps=20)
        finally:
            oblate08._kernel_kind = kind
        assert np.abs(fast - slow).max() < 1e-12
