"""Shared fixtures and independent oracles for the test suite."""

import numpy as np
import pytest
from scipy import integrate

from geoflow import surface as sf


# ---------------------------------------------------------------------------
# Independent oracles (quadrature / dense ODE), kept free of the code paths
# they are used to check.
# ---------------------------------------------------------------------------

def ellipse_perimeter(a: float, b: float) -> float:
    """Perimeter of an ellipse with semi-axes a, b by adaptive quadrature."""
    f = lambda t: np.sqrt(a**2 * np.sin(t) ** 2 + b**2 * np.cos(t) ** 2)
    val, _ = integrate.quad(f, 0.0, np.pi / 2, epsabs=1e-13, epsrel=1e-13)
    return 4.0 * val


def geodesic_ode_oracle(s, p0, v0, t_end=1.0, rtol=1e-12):
    """Endpoint of the geodesic ODE integrated densely with solve_ivp.

    Independent of the projected-Verlet path: integrates the unconstrained
    second-order system x'' = -(v^T H v / |g|^2) g without reprojection.
    """

    def rhs(_, y):
        x, v = y[:3], y[3:]
        g = s.grad(x)
        H = s.hess(x)
        lam = -(v @ H @ v) / (g @ g)
        return np.concatenate([v, lam * g])

    y0 = np.concatenate([np.asarray(p0, float), np.asarray(v0, float)])
    sol = integrate.solve_ivp(rhs, (0.0, t_end), y0, rtol=rtol, atol=1e-13,
                              dense_output=False, method="DOP853")
    return sol.y[:3, -1]


# Frozen oracle values (computed from the quadrature oracle above before the
# main build; re-derived in test_acceptance to guard against drift).
OBLATE08_MERIDIAN = 5.672333577795
PROLATE11_MERIDIAN = 6.601085094138
TWO_PI = 2.0 * np.pi


# ---------------------------------------------------------------------------
# Surfaces
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def unit_sphere():
    return sf.sphere(1.0)


@pytest.fixture(scope="session")
def sphere_r2():
    return sf.sphere(2.0)


@pytest.fixture(scope="session")
def oblate08():
    return sf.Ellipsoid(1.0, 1.0, 0.8)


@pytest.fixture(scope="session")
def prolate11():
    return sf.Ellipsoid(1.0, 1.0, 1.1)


@pytest.fixture(scope="session")
def ellipsoid112():
    return sf.Ellipsoid(1.0, 1.0, 2.0)


@pytest.fixture(scope="session")
def bumped():
    return sf.BumpedSphere(1.0, 0.12, (1.0, 1.0, 1.0), 0.5)


@pytest.fixture(scope="session")
def catalog_bodies(unit_sphere, sphere_r2, oblate08, prolate11, bumped):
    return {
        "unit_sphere": unit_sphere,
        "sphere_r2": sphere_r2,
        "oblate08": oblate08,
        "prolate11": prolate11,
        "bumped": bumped,
    }


def random_surface_points(s, n, rng):
    """n points sampled on M via random directions."""
    u = rng.normal(size=(n, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return sf.radial_point(s, u)
