"""Geometry kernel for strictly convex implicit surfaces in R^3.

A surface is the level set M = F^-1(1) of a smooth function F with positive
definite Hessian, carrying the metric induced from the ambient Euclidean
metric. The kernel provides projection onto M, tangent calculus, exponential
and logarithm maps (projected velocity-Verlet integration and shooting),
Gaussian curvature, and a catalog of built-in bodies (ellipsoids and
convexity-validated bumped spheres).

All core routines are vectorized: point arguments may be single ``(3,)``
vectors or ``(n, 3)`` batches, and results match the input shape. The
pointwise wrappers at the bottom of the module return the validated
:class:`SurfacePoint` / :class:`TangentVector` value types.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import ConfigError, NoConvergence, NonConvex, StepFailure

# Numerical tolerances. All chosen with double-precision headroom well below
# the discretization error of the loop solvers.
TOL_SURFACE = 1e-10
TOL_TANGENT = 1e-8
TOL_SHOOT = 1e-8
TOL_GEO = 1e-7
MAX_NEWTON_ITERS = 50

# Geodesic integrator: arc-length substep is EXP_STEP / sqrt(K_max), with at
# least EXP_MIN_SUBSTEPS substeps for any nonzero velocity.
EXP_STEP = 0.01
EXP_MIN_SUBSTEPS = 4

# Injectivity-radius proxy: SAFETY_FACTOR * pi / sqrt(K_max).
SAFETY_FACTOR = 0.5
CURVATURE_GRID = 128


def _as_points(q) -> tuple[np.ndarray, bool]:
    """Coerce to an (n, 3) float array; report whether input was a single point."""
    a = np.asarray(getattr(q, "position", q), dtype=float)
    if a.ndim == 1:
        return a[None, :], True
    return a, False


class ConvexSurface:
    """A strictly convex boundary sphere M = F^-1(1) with analytic oracles.

    Subclasses implement ``value``, ``grad`` and ``hess`` for batched point
    arrays. Curvature bounds are estimated once at construction by dense
    sampling and cached; all instances are immutable afterwards and safe for
    concurrent read-only use.
    """

    kind: str = "abstract"

    def __init__(self, center=(0.0, 0.0, 0.0), validate: bool = True):
        self.center = np.asarray(center, dtype=float)
        if _kernels.HAVE_NUMBA:
            self._kernel_kind, self._kernel_prm = _kernels.pack_params(self)
        else:
            self._kernel_kind, self._kernel_prm = -1, None
        self._sample_curvature_bounds(validate=validate)

    # -- implicit-function oracles (overridden by catalog bodies) ----------

    def value(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def grad(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def hess(self, p: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def config(self) -> dict:
        """Echo of the catalog parameters (for result records)."""
        raise NotImplementedError

    # -----------------------------------------------------------------------

    def _sample_curvature_bounds(self, validate: bool):
        n = CURVATURE_GRID
        theta = np.arccos(np.linspace(-1.0, 1.0, n))
        phi = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        T, P = np.meshgrid(theta, phi, indexing="ij")
        dirs = np.stack(
            [np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1
        ).reshape(-1, 3)
        pts = radial_point(self, dirs)
        K = _gaussian_curvature_batch(self, pts)
        self.k_min = float(K.min())
        self.k_max = float(K.max())
        self.radius_max = float(np.linalg.norm(pts - self.center, axis=1).max())
        if validate:
            if self.k_min <= 0.0:
                raise NonConvex(
                    f"{self.kind}: sampled Gaussian curvature reaches "
                    f"{self.k_min:.3g} <= 0; surface is not strictly convex"
                )
            H = self.hess(pts[:: max(1, len(pts) // 2048)])
            eigs = np.linalg.eigvalsh(H)
            if eigs.min() <= 0.0:
                raise NonConvex(
                    f"{self.kind}: Hessian loses positive definiteness on M "
                    f"(min eigenvalue {eigs.min():.3g})"
                )

    def __repr__(self):
        return f"{type(self).__name__}({self.config()})"


class Ellipsoid(ConvexSurface):
    """Ellipsoid x^2/a^2 + y^2/b^2 + z^2/c^2 = 1 centered at the origin."""

    kind = "ellipsoid"

    def __init__(self, a: float, b: float, c: float, validate: bool = True):
        if min(a, b, c) <= 0:
            raise ConfigError("ellipsoid semi-axes must be positive")
        self.axes = np.array([a, b, c], dtype=float)
        self._inv2 = 1.0 / self.axes**2
        super().__init__(validate=validate)

    def value(self, p):
        p = np.asarray(p, dtype=float)
        return np.sum(p * p * self._inv2, axis=-1)

    def grad(self, p):
        p = np.asarray(p, dtype=float)
        return 2.0 * p * self._inv2

    def hess(self, p):
        p = np.asarray(p, dtype=float)
        H = np.zeros(p.shape[:-1] + (3, 3))
        idx = np.arange(3)
        H[..., idx, idx] = 2.0 * self._inv2
        return H

    def config(self):
        a, b, c = self.axes
        return {"kind": "ellipsoid", "a": a, "b": b, "c": c}


class BumpedSphere(ConvexSurface):
    """Sphere of given radius with a smooth Gaussian bump.

    F(p) = |p|^2 / radius^2 - amplitude * exp(-|p - radius*u|^2 / (2 width^2))
    with u the unit bump center direction. Positive amplitude pushes the level
    set outward near u. Convexity is not automatic; the constructor samples
    the Hessian and curvature on M and rejects amplitudes that break it.
    """

    kind = "bumped_sphere"

    def __init__(self, radius=1.0, bump_amplitude=0.1, bump_center=(0.0, 0.0, 1.0),
                 bump_width=0.5, validate: bool = True):
        if radius <= 0 or bump_width <= 0:
            raise ConfigError("bumped_sphere radius and bump_width must be positive")
        self.radius = float(radius)
        self.amplitude = float(bump_amplitude)
        u = np.asarray(bump_center, dtype=float)
        nu = np.linalg.norm(u)
        if nu == 0:
            raise ConfigError("bump_center must be a nonzero direction")
        self.bump_center = u / nu
        self.width = float(bump_width)
        self._q = self.radius * self.bump_center
        super().__init__(validate=validate)

    def _bump(self, p):
        d = p - self._q
        s = np.sum(d * d, axis=-1) / (2.0 * self.width**2)
        return np.exp(-s), d

    def value(self, p):
        p = np.asarray(p, dtype=float)
        e, _ = self._bump(p)
        return np.sum(p * p, axis=-1) / self.radius**2 - self.amplitude * e

    def grad(self, p):
        p = np.asarray(p, dtype=float)
        e, d = self._bump(p)
        return 2.0 * p / self.radius**2 + (self.amplitude / self.width**2) * e[..., None] * d

    def hess(self, p):
        p = np.asarray(p, dtype=float)
        e, d = self._bump(p)
        w2 = self.width**2
        eye = np.eye(3)
        outer = d[..., :, None] * d[..., None, :]
        H = (self.amplitude / w2) * e[..., None, None] * (eye - outer / w2)
        H += (2.0 / self.radius**2) * eye
        return H

    def config(self):
        return {
            "kind": "bumped_sphere",
            "radius": self.radius,
            "bump_amplitude": self.amplitude,
            "bump_center": self.bump_center.tolist(),
            "bump_width": self.width,
        }


def sphere(radius: float, validate: bool = True) -> Ellipsoid:
    return Ellipsoid(radius, radius, radius, validate=validate)


# ---------------------------------------------------------------------------
# Value types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SurfacePoint:
    """A point constrained to M: |F(p) - 1| <= TOL_SURFACE."""

    position: np.ndarray

    def validate(self, s: ConvexSurface) -> bool:
        return abs(float(s.value(self.position)) - 1.0) <= TOL_SURFACE


@dataclass(frozen=True)
class TangentVector:
    """A vector in the tangent plane of M at ``base``."""

    base: SurfacePoint
    v: np.ndarray

    def norm(self) -> float:
        return float(np.linalg.norm(self.v))

    def validate(self, s: ConvexSurface) -> bool:
        g = s.grad(self.base.position)
        nv, ng = np.linalg.norm(self.v), np.linalg.norm(g)
        if nv == 0.0:
            return True
        return abs(float(np.dot(self.v, g))) <= TOL_TANGENT * nv * ng


# ---------------------------------------------------------------------------
# Batched kernel
# ---------------------------------------------------------------------------

def project_points(s: ConvexSurface, q: np.ndarray, tol: float = None) -> np.ndarray:
    """Newton-project points onto M along the gradient of F.

    Iterates p <- p - (F(p)-1) grad F / |grad F|^2. Raises
    :class:`NoConvergence` when any row fails within MAX_NEWTON_ITERS, which
    for catalog bodies only happens at near-singular inputs (e.g. the center).
    """
    tol = TOL_SURFACE * 0.01 if tol is None else tol
    p = np.array(q, dtype=float)
    for _ in range(MAX_NEWTON_ITERS):
        r = s.value(p) - 1.0
        if np.all(np.abs(r) <= tol):
            return p
        g = s.grad(p)
        g2 = np.sum(g * g, axis=-1)
        if np.any(g2 < 1e-20):
            raise NoConvergence("projection direction undefined (grad F ~ 0)")
        p = p - (r / g2)[..., None] * g
    raise NoConvergence(
        f"surface projection did not reach |F-1|<{tol:g} "
        f"in {MAX_NEWTON_ITERS} iterations"
    )


def unit_normal(s: ConvexSurface, p: np.ndarray) -> np.ndarray:
    g = s.grad(p)
    return g / np.linalg.norm(g, axis=-1, keepdims=True)


def tangent_components(s: ConvexSurface, p: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Remove the normal component of w at p (batched)."""
    n = unit_normal(s, p)
    return w - np.sum(w * n, axis=-1, keepdims=True) * n


def radial_point(s: ConvexSurface, direction: np.ndarray) -> np.ndarray:
    """Point of M on the ray center + t*direction, t > 0 (batched Newton)."""
    d, single = _as_points(direction)
    d = d / np.linalg.norm(d, axis=-1, keepdims=True)
    t = np.full(len(d), 1.0)
    for _ in range(MAX_NEWTON_ITERS):
        p = s.center + t[:, None] * d
        r = s.value(p) - 1.0
        if np.all(np.abs(r) < 1e-13):
            break
        slope = np.sum(s.grad(p) * d, axis=-1)
        # Outward branch of a convex level function has positive radial slope.
        slope = np.maximum(slope, 1e-8)
        t = np.maximum(t - r / slope, 1e-6)
    else:
        raise NoConvergence("radial solve failed")
    out = s.center + t[:, None] * d
    return out[0] if single else out


def _accel(s: ConvexSurface, p: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Geodesic acceleration: normal force keeping the path on F = 1."""
    g = s.grad(p)
    H = s.hess(p)
    vHv = np.einsum("...i,...ij,...j->...", v, H, v)
    g2 = np.sum(g * g, axis=-1)
    return -(vHv / g2)[..., None] * g


def exp_many(s: ConvexSurface, p: np.ndarray, v: np.ndarray,
             n_steps: int = None, return_velocity: bool = False):
    """Endpoints of unit-time constant-speed geodesics from p with velocity v.

    Projected velocity-Verlet: each substep advances position with the
    Verlet update, reprojects onto M, applies one corrector pass on the
    implicit velocity update, then projects the velocity back to the tangent
    plane and restores its speed. The arc-length substep is
    EXP_STEP / sqrt(K_max) (at least EXP_MIN_SUBSTEPS substeps).

    ``n_steps`` overrides the substep count; the finite-difference test
    harnesses use it to freeze the discretization across perturbed evaluations.
    With ``return_velocity`` the arrival velocity is returned as well.
    """
    p = np.array(p, dtype=float)
    v = np.asarray(v, dtype=float)
    single = p.ndim == 1
    speed = np.linalg.norm(v, axis=-1)
    smax = float(speed.max()) if speed.size else 0.0
    if smax == 0.0:
        return (p, np.array(v, dtype=float)) if return_velocity else p
    arc_step = EXP_STEP / np.sqrt(s.k_max)
    if s._kernel_kind >= 0:
        P = p[None] if single else p
        V = v[None] if single else np.asarray(v, dtype=float)
        outP = np.empty_like(P)
        outV = np.empty_like(P)
        fails = _kernels.exp_rows(
            np.ascontiguousarray(P), np.ascontiguousarray(V),
            s._kernel_kind, s._kernel_prm, arc_step, EXP_MIN_SUBSTEPS,
            0 if n_steps is None else int(n_steps), TOL_SURFACE * 0.01,
            outP, outV,
        )
        if fails:
            raise StepFailure(f"geodesic integrator failed on {fails} rows")
        if single:
            outP, outV = outP[0], outV[0]
        return (outP, outV) if return_velocity else outP
    if n_steps is None:
        n_steps = max(EXP_MIN_SUBSTEPS, int(np.ceil(smax / arc_step)))
    dt = 1.0 / n_steps
    x = p
    w = np.array(v, dtype=float)
    for _ in range(n_steps):
        a0 = _accel(s, x, w)
        # Chord-to-arc phase correction (see the fast kernel for the rate).
        s2 = np.sum(w * w, axis=-1)
        kappa = np.linalg.norm(a0, axis=-1) / np.maximum(s2, 1e-300)
        fac = dt * (1.0 - (dt * kappa) ** 2 * s2 / 6.0)
        x_new = x + fac[..., None] * w + (0.5 * dt * dt) * a0
        x_new = project_points(s, x_new)
        w_pred = w + dt * a0
        a1 = _accel(s, x_new, w_pred)
        w_pred = w + (0.5 * dt) * (a0 + a1)
        a1 = _accel(s, x_new, w_pred)
        w_new = w + (0.5 * dt) * (a0 + a1)
        w_new = tangent_components(s, x_new, w_new)
        wn = np.linalg.norm(w_new, axis=-1)
        if np.any((wn < 0.25 * speed) & (speed > 0)):
            raise StepFailure("geodesic integrator lost its velocity; step too large")
        scale = np.where(wn > 0, speed / np.maximum(wn, 1e-300), 0.0)
        w_new = w_new * scale[..., None]
        x, w = x_new, w_new
    return (x, w) if return_velocity else x


def log_many(s: ConvexSurface, p: np.ndarray, q: np.ndarray,
             tol: float = None, n_steps: int = None,
             max_iters: int = 60) -> np.ndarray:
    """Shooting solve for v with exp_p(v) = q, batched over rows.

    Initialized with the tangent-projected chord, then Newton-like updates:
    the endpoint error is expressed in the parallel frame carried by the
    geodesic (arrival velocity direction and its 90-degree rotation) and
    transported back to the base point, where the transverse component is
    amplified by theta/sin(theta) -- the inverse of the Jacobi sine factor
    at the local curvature. On sphere-like bodies this is an almost exact
    Newton step, converging in a handful of iterations.
    """
    tol = TOL_SHOOT if tol is None else tol
    p = np.array(p, dtype=float)
    q = np.asarray(q, dtype=float)
    single = p.ndim == 1
    if single:
        p, q = p[None], q[None]
    if s._kernel_kind >= 0:
        Kp = np.maximum(_gaussian_curvature_batch(s, p), 1e-12)
        outV = np.empty_like(p)
        fails = _kernels.log_rows(
            np.ascontiguousarray(p), np.ascontiguousarray(q),
            np.ascontiguousarray(Kp), s._kernel_kind, s._kernel_prm,
            EXP_STEP / np.sqrt(s.k_max), EXP_MIN_SUBSTEPS,
            0 if n_steps is None else int(n_steps), tol, max_iters,
            TOL_SURFACE * 0.01, outV,
        )
        if fails:
            raise NoConvergence(
                f"geodesic shooting failed for {fails}/{len(p)} pairs "
                "(beyond reliable range?)"
            )
        return outV[0] if single else outV
    v = tangent_components(s, p, q - p)
    active = np.linalg.norm(q - p, axis=-1) > tol
    out = np.where(active[:, None], v, 0.0)
    if not np.any(active):
        return out[0] if single else out
    idx = np.nonzero(active)[0]
    P, Q, V = p[idx], q[idx], out[idx]
    n_base = unit_normal(s, P)
    Kp = np.maximum(_gaussian_curvature_batch(s, P), 1e-12)
    for _ in range(max_iters):
        end, w_end = exp_many(s, P, V, n_steps=n_steps, return_velocity=True)
        err = Q - end
        en = np.linalg.norm(err, axis=-1)
        done = en <= tol
        if np.all(done):
            out[idx] = V
            break
        # Parallel frame at both ends: unit velocity and its J-rotation.
        vn = np.linalg.norm(V, axis=-1, keepdims=True)
        t_base = V / np.maximum(vn, 1e-300)
        j_base = np.cross(n_base, t_base)
        wn = np.linalg.norm(w_end, axis=-1, keepdims=True)
        t_end = w_end / np.maximum(wn, 1e-300)
        j_end = np.cross(unit_normal(s, end), t_end)
        alpha = np.sum(err * t_end, axis=-1, keepdims=True)
        beta = np.sum(err * j_end, axis=-1, keepdims=True)
        theta = np.clip(vn[:, 0] * np.sqrt(Kp), 1e-9, 2.9)
        amp = np.minimum(theta / np.sin(theta), 4.0)
        corr = alpha * t_base + (amp[:, None] * beta) * j_base
        V = V + np.where(done[:, None], 0.0, corr)
    else:
        out[idx] = V
        end = exp_many(s, P, V, n_steps=n_steps)
        bad = np.linalg.norm(Q - end, axis=-1) > tol
        if np.any(bad):
            raise NoConvergence(
                "geodesic shooting failed for "
                f"{int(bad.sum())}/{len(bad)} pairs (beyond reliable range?)"
            )
    return out[0] if single else out


def distance_many(s: ConvexSurface, p: np.ndarray, q: np.ndarray, **kw) -> np.ndarray:
    return np.linalg.norm(log_many(s, p, q, **kw), axis=-1)


def _gaussian_curvature_batch(s: ConvexSurface, p: np.ndarray) -> np.ndarray:
    """K = det(II)/det(I) from the fundamental forms in a tangent frame."""
    p = np.asarray(p, dtype=float)
    g = s.grad(p)
    gn = np.linalg.norm(g, axis=-1, keepdims=True)
    n = g / gn
    # Deterministic orthonormal tangent frame.
    seed = np.where(np.abs(n[..., 2:3]) < 0.9,
                    np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]))
    e1 = np.cross(seed, n)
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    e2 = np.cross(n, e1)
    H = s.hess(p)
    h11 = np.einsum("...i,...ij,...j->...", e1, H, e1)
    h12 = np.einsum("...i,...ij,...j->...", e1, H, e2)
    h22 = np.einsum("...i,...ij,...j->...", e2, H, e2)
    return (h11 * h22 - h12 * h12) / gn[..., 0] ** 2


# ---------------------------------------------------------------------------
# Pointwise operations
# ---------------------------------------------------------------------------

def project_to_surface(s: ConvexSurface, q) -> SurfacePoint:
    """Nearest level-set point reached by Newton iteration along grad F."""
    a, single = _as_points(q)
    p = project_points(s, a)
    return SurfacePoint(p[0]) if single else [SurfacePoint(r) for r in p]


def tangent_project(s: ConvexSurface, p, w) -> TangentVector:
    """Project an ambient vector to the tangent plane of M at p."""
    pos = np.asarray(getattr(p, "position", p), dtype=float)
    v = tangent_components(s, pos, np.asarray(w, dtype=float))
    return TangentVector(SurfacePoint(pos), v)


def exp_map(s: ConvexSurface, v: TangentVector) -> SurfacePoint:
    """Time-1 endpoint of the geodesic with initial velocity v.

    Requires |v| <= exp_horizon(s); longer runs risk leaving the regime where
    the substep rule has been validated.
    """
    base = np.asarray(v.base.position, dtype=float)
    vec = np.asarray(v.v, dtype=float)
    if np.linalg.norm(vec) > exp_horizon(s):
        raise StepFailure(
            f"|v|={np.linalg.norm(vec):.4g} exceeds exp_horizon={exp_horizon(s):.4g}"
        )
    return SurfacePoint(exp_many(s, base, vec))


def log_map(s: ConvexSurface, p, q) -> TangentVector:
    """Inverse exponential: v at p with exp_p(v) = q, |v| = d(p, q)."""
    pp = np.asarray(getattr(p, "position", p), dtype=float)
    qq = np.asarray(getattr(q, "position", q), dtype=float)
    return TangentVector(SurfacePoint(pp), log_many(s, pp, qq))


def geodesic_distance(s: ConvexSurface, p, q) -> float:
    """Riemannian distance |log_p(q)|.

    Computed from the lexicographically smaller endpoint so that the value is
    exactly symmetric in (p, q); the discrete integrator is not perfectly
    time-reversible, and symmetry is part of the distance contract.
    """
    pp = np.asarray(getattr(p, "position", p), dtype=float)
    qq = np.asarray(getattr(q, "position", q), dtype=float)
    if tuple(qq) < tuple(pp):
        pp, qq = qq, pp
    return float(np.linalg.norm(log_many(s, pp, qq)))


def gaussian_curvature(s: ConvexSurface, p) -> float:
    """Gaussian curvature at p; raises NonConvex when K <= 0."""
    pos = np.asarray(getattr(p, "position", p), dtype=float)
    K = float(_gaussian_curvature_batch(s, pos))
    if K <= 0.0:
        raise NonConvex(f"Gaussian curvature {K:.3g} <= 0 at {pos}")
    return K


def injrad_proxy(s: ConvexSurface) -> float:
    """Conservative injectivity-radius stand-in: SAFETY_FACTOR * pi / sqrt(K_max)."""
    if s.k_min <= 0.0:
        raise NonConvex("curvature sampling found K <= 0")
    return SAFETY_FACTOR * np.pi / np.sqrt(s.k_max)


def exp_horizon(s: ConvexSurface) -> float:
    """Longest velocity the exponential integrator accepts in one call."""
    return np.pi / np.sqrt(s.k_min)


def support_point(s: ConvexSurface, direction: np.ndarray) -> np.ndarray:
    """Point of M maximizing <p, direction> (Lagrange Newton solve)."""
    d = np.asarray(direction, dtype=float)
    d = d / np.linalg.norm(d)
    p = radial_point(s, d)
    mu = float(np.linalg.norm(s.grad(p)))
    for _ in range(MAX_NEWTON_ITERS):
        g = s.grad(p)
        r = np.concatenate([g - mu * d, [s.value(p) - 1.0]])
        if np.linalg.norm(r) < 1e-13:
            return p
        H = s.hess(p)
        J = np.zeros((4, 4))
        J[:3, :3] = H
        J[:3, 3] = -d
        J[3, :3] = g
        delta = np.linalg.solve(J, -r)
        p = p + delta[:3]
        mu += delta[3]
    raise NoConvergence("support point solve failed")


# ---------------------------------------------------------------------------
# Catalog
# ---------------------------------------------------------------------------

_BUILTINS = {
    "unit_sphere": lambda: sphere(1.0),
    "sphere12": lambda: sphere(1.2),
    "sphere_r2": lambda: sphere(2.0),
    "oblate08": lambda: Ellipsoid(1.0, 1.0, 0.8),
    "prolate11": lambda: Ellipsoid(1.0, 1.0, 1.1),
    "triaxial": lambda: Ellipsoid(1.05, 0.95, 1.1),
    "bumped": lambda: BumpedSphere(1.0, 0.12, (1.0, 1.0, 1.0), 0.5),
}


def builtin_names() -> list[str]:
    return sorted(_BUILTINS)


def from_config(entry: dict, validate: bool = True) -> ConvexSurface:
    """Build a surface from a catalog config entry."""
    if not isinstance(entry, dict) or "kind" not in entry:
        raise ConfigError(f"surface entry must be a mapping with a 'kind': {entry!r}")
    kind = entry["kind"]
    try:
        if kind == "ellipsoid":
            return Ellipsoid(float(entry["a"]), float(entry["b"]), float(entry["c"]),
                             validate=validate)
        if kind == "bumped_sphere":
            return BumpedSphere(
                radius=float(entry.get("radius", 1.0)),
                bump_amplitude=float(entry.get("bump_amplitude", 0.1)),
                bump_center=entry.get("bump_center", (0.0, 0.0, 1.0)),
                bump_width=float(entry.get("bump_width", 0.5)),
                validate=validate,
            )
    except KeyError as e:
        raise ConfigError(f"surface entry missing field {e}") from e
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad surface entry {entry!r}: {e}") from e
    raise ConfigError(f"unknown surface kind {kind!r}")


def load_surface(name: str, extra: dict = None, validate: bool = True) -> ConvexSurface:
    """Resolve a surface by catalog name, config entries taking precedence."""
    if extra and name in extra:
        return from_config(extra[name], validate=validate)
    if name in _BUILTINS:
        return _BUILTINS[name]()
    raise ConfigError(f"unknown surface {name!r}; builtins: {', '.join(builtin_names())}")
