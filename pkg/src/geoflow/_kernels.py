"""Numba fast paths for the geodesic integrator and shooting solver.

The catalog bodies (ellipsoids and bumped spheres) have cheap closed-form
oracles, so the exponential-map substep loop and the per-pair shooting
iteration are compiled with numba and run row by row in scalar arithmetic.
The numpy implementations in :mod:`geoflow.surface` remain the generic
reference path; these kernels implement the same algorithm (projected
velocity-Verlet with one corrector pass, parallel-frame shooting updates)
and agree with it to integrator tolerance.

Surface parameters are packed into a flat array:

* kind 0 (ellipsoid):     prm[0:3] = 1/a^2, 1/b^2, 1/c^2
* kind 1 (bumped sphere): prm[0] = 1/radius^2, prm[1] = amplitude,
                          prm[2] = width^2, prm[3:6] = bump apex point
"""

from __future__ import annotations

import math
import os

import numpy as np

try:  # pragma: no cover - exercised implicitly by every fast-path call
    if os.environ.get("GEOFLOW_NO_NUMBA"):
        raise ImportError("numba disabled by GEOFLOW_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*a, **k):
        def wrap(f):
            return f
        return wrap if not (len(a) == 1 and callable(a[0])) else a[0]


KIND_ELLIPSOID = 0
KIND_BUMPED = 1


def pack_params(surface) -> tuple[int, np.ndarray]:
    """Parameter block for a catalog surface, or (-1, empty) if unsupported."""
    kind = getattr(surface, "kind", None)
    if kind == "ellipsoid":
        prm = np.zeros(6)
        prm[0:3] = 1.0 / surface.axes**2
        return KIND_ELLIPSOID, prm
    if kind == "bumped_sphere":
        prm = np.zeros(6)
        prm[0] = 1.0 / surface.radius**2
        prm[1] = surface.amplitude
        prm[2] = surface.width**2
        prm[3:6] = surface.radius * surface.bump_center
        return KIND_BUMPED, prm
    return -1, np.zeros(0)


@njit(cache=True)
def _oracle(kind, prm, p0, p1, p2):
    """F(p) - 1 and grad F at a point."""
    if kind == KIND_ELLIPSOID:
        f = p0 * p0 * prm[0] + p1 * p1 * prm[1] + p2 * p2 * prm[2] - 1.0
        return f, 2.0 * p0 * prm[0], 2.0 * p1 * prm[1], 2.0 * p2 * prm[2]
    d0 = p0 - prm[3]
    d1 = p1 - prm[4]
    d2 = p2 - prm[5]
    e = prm[1] * math.exp(-(d0 * d0 + d1 * d1 + d2 * d2) / (2.0 * prm[2]))
    f = (p0 * p0 + p1 * p1 + p2 * p2) * prm[0] - e - 1.0
    c = e / prm[2]
    return f, 2.0 * p0 * prm[0] + c * d0, 2.0 * p1 * prm[0] + c * d1, 2.0 * p2 * prm[0] + c * d2


@njit(cache=True)
def _vhv(kind, prm, p0, p1, p2, v0, v1, v2):
    """Quadratic form v^T HessF(p) v."""
    if kind == KIND_ELLIPSOID:
        return 2.0 * (v0 * v0 * prm[0] + v1 * v1 * prm[1] + v2 * v2 * prm[2])
    d0 = p0 - prm[3]
    d1 = p1 - prm[4]
    d2 = p2 - prm[5]
    e = prm[1] * math.exp(-(d0 * d0 + d1 * d1 + d2 * d2) / (2.0 * prm[2]))
    v2n = v0 * v0 + v1 * v1 + v2 * v2
    dv = d0 * v0 + d1 * v1 + d2 * v2
    return 2.0 * prm[0] * v2n + (e / prm[2]) * (v2n - dv * dv / prm[2])


@njit(cache=True)
def _exp_row(kind, prm, p0, p1, p2, v0, v1, v2, n_steps, ptol):
    """One geodesic: projected velocity-Verlet with corrector. Returns
    (x0,x1,x2, w0,w1,w2, ok)."""
    speed = math.sqrt(v0 * v0 + v1 * v1 + v2 * v2)
    if speed == 0.0:
        return p0, p1, p2, v0, v1, v2, True
    dt = 1.0 / n_steps
    x0, x1, x2 = p0, p1, p2
    w0, w1, w2 = v0, v1, v2
    for _ in range(n_steps):
        f, g0, g1, g2 = _oracle(kind, prm, x0, x1, x2)
        gg = g0 * g0 + g1 * g1 + g2 * g2
        vhv = _vhv(kind, prm, x0, x1, x2, w0, w1, w2)
        ca = -vhv / gg
        a00 = ca * g0
        a01 = ca * g1
        a02 = ca * g2
        # Chord-to-arc phase correction: a straight substep of a path with
        # normal curvature kappa under-turns by (dt s kappa)^2 / 6 per step.
        kappa = abs(vhv) / (math.sqrt(gg) * speed * speed)
        fac = dt * (1.0 - (dt * speed * kappa) ** 2 / 6.0)
        y0 = x0 + fac * w0 + 0.5 * dt * dt * a00
        y1 = x1 + fac * w1 + 0.5 * dt * dt * a01
        y2 = x2 + fac * w2 + 0.5 * dt * dt * a02
        # Newton reprojection onto F = 1 along grad F.
        ok = False
        for _ in range(50):
            f, g0, g1, g2 = _oracle(kind, prm, y0, y1, y2)
            if abs(f) <= ptol:
                ok = True
                break
            gg = g0 * g0 + g1 * g1 + g2 * g2
            step = f / gg
            y0 -= step * g0
            y1 -= step * g1
            y2 -= step * g2
        if not ok:
            return x0, x1, x2, w0, w1, w2, False
        # Velocity update with one corrector pass on the implicit force.
        u0 = w0 + dt * a00
        u1 = w1 + dt * a01
        u2 = w2 + dt * a02
        gg = g0 * g0 + g1 * g1 + g2 * g2
        for _ in range(2):
            cb = -_vhv(kind, prm, y0, y1, y2, u0, u1, u2) / gg
            u0 = w0 + 0.5 * dt * (a00 + cb * g0)
            u1 = w1 + 0.5 * dt * (a01 + cb * g1)
            u2 = w2 + 0.5 * dt * (a02 + cb * g2)
        # Tangent projection and exact speed restoration.
        dot = (u0 * g0 + u1 * g1 + u2 * g2) / gg
        u0 -= dot * g0
        u1 -= dot * g1
        u2 -= dot * g2
        un = math.sqrt(u0 * u0 + u1 * u1 + u2 * u2)
        if un < 0.25 * speed:
            return x0, x1, x2, w0, w1, w2, False
        sc = speed / un
        x0, x1, x2 = y0, y1, y2
        w0, w1, w2 = u0 * sc, u1 * sc, u2 * sc
    return x0, x1, x2, w0, w1, w2, True


@njit(cache=True)
def exp_rows(P, V, kind, prm, h_arc, n_min, n_override, ptol, outP, outV):
    """Batch exponential map; per-row substep count unless overridden."""
    fails = 0
    for r in range(P.shape[0]):
        v0, v1, v2 = V[r, 0], V[r, 1], V[r, 2]
        speed = math.sqrt(v0 * v0 + v1 * v1 + v2 * v2)
        if n_override > 0:
            ns = n_override
        else:
            ns = int(math.ceil(speed / h_arc))
            if ns < n_min:
                ns = n_min
        x0, x1, x2, w0, w1, w2, ok = _exp_row(
            kind, prm, P[r, 0], P[r, 1], P[r, 2], v0, v1, v2, ns, ptol
        )
        if not ok:
            fails += 1
        outP[r, 0] = x0
        outP[r, 1] = x1
        outP[r, 2] = x2
        outV[r, 0] = w0
        outV[r, 1] = w1
        outV[r, 2] = w2
    return fails


@njit(cache=True)
def log_rows(P, Q, Kp, kind, prm, h_arc, n_min, n_override, tol, max_iters,
             ptol, outV):
    """Batch shooting solve exp_p(v) = q with parallel-frame Newton updates."""
    fails = 0
    for r in range(P.shape[0]):
        p0, p1, p2 = P[r, 0], P[r, 1], P[r, 2]
        q0, q1, q2 = Q[r, 0], Q[r, 1], Q[r, 2]
        c0 = q0 - p0
        c1 = q1 - p1
        c2 = q2 - p2
        if math.sqrt(c0 * c0 + c1 * c1 + c2 * c2) <= tol:
            outV[r, 0] = 0.0
            outV[r, 1] = 0.0
            outV[r, 2] = 0.0
            continue
        f, g0, g1, g2 = _oracle(kind, prm, p0, p1, p2)
        gg = g0 * g0 + g1 * g1 + g2 * g2
        gn = math.sqrt(gg)
        nb0 = g0 / gn
        nb1 = g1 / gn
        nb2 = g2 / gn
        # Chord projected to the tangent plane at p.
        dot = c0 * nb0 + c1 * nb1 + c2 * nb2
        v0 = c0 - dot * nb0
        v1 = c1 - dot * nb1
        v2 = c2 - dot * nb2
        sqk = math.sqrt(Kp[r]) if Kp[r] > 1e-12 else 1e-6
        converged = False
        for _ in range(max_iters):
            speed = math.sqrt(v0 * v0 + v1 * v1 + v2 * v2)
            if speed < 1e-300:
                break
            if n_override > 0:
                ns = n_override
            else:
                ns = int(math.ceil(speed / h_arc))
                if ns < n_min:
                    ns = n_min
            x0, x1, x2, w0, w1, w2, ok = _exp_row(
                kind, prm, p0, p1, p2, v0, v1, v2, ns, ptol
            )
            if not ok:
                break
            e0 = q0 - x0
            e1 = q1 - x1
            e2 = q2 - x2
            if math.sqrt(e0 * e0 + e1 * e1 + e2 * e2) <= tol:
                converged = True
                break
            # Frame at the arrival point: unit velocity, J = n x t.
            wn = math.sqrt(w0 * w0 + w1 * w1 + w2 * w2)
            t0 = w0 / wn
            t1 = w1 / wn
            t2 = w2 / wn
            f, ge0, ge1, ge2 = _oracle(kind, prm, x0, x1, x2)
            gen = math.sqrt(ge0 * ge0 + ge1 * ge1 + ge2 * ge2)
            ne0 = ge0 / gen
            ne1 = ge1 / gen
            ne2 = ge2 / gen
            j0 = ne1 * t2 - ne2 * t1
            j1 = ne2 * t0 - ne0 * t2
            j2 = ne0 * t1 - ne1 * t0
            alpha = e0 * t0 + e1 * t1 + e2 * t2
            beta = e0 * j0 + e1 * j1 + e2 * j2
            # Base frame carried by the same geodesic.
            tb0 = v0 / speed
            tb1 = v1 / speed
            tb2 = v2 / speed
            jb0 = nb1 * tb2 - nb2 * tb1
            jb1 = nb2 * tb0 - nb0 * tb2
            jb2 = nb0 * tb1 - nb1 * tb0
            theta = speed * sqk
            if theta < 1e-9:
                theta = 1e-9
            if theta > 2.9:
                theta = 2.9
            amp = theta / math.sin(theta)
            if amp > 4.0:
                amp = 4.0
            v0 += alpha * tb0 + amp * beta * jb0
            v1 += alpha * tb1 + amp * beta * jb1
            v2 += alpha * tb2 + amp * beta * jb2
        if not converged:
            fails += 1
        outV[r, 0] = v0
        outV[r, 1] = v1
        outV[r, 2] = v2
    return fails
