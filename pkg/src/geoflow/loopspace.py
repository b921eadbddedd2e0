"""Finite-dimensional loop spaces and the discrete curve-shortening flow.

A discrete loop is a cyclic tuple of k surface points with all adjacent
Riemannian gaps below the injectivity proxy. Its energy is

    E_k(x) = k * sum_i d(x_i, x_{i+1})^2,

which equals squared length for equal gaps and is minimized among
parametrizations by the equal-speed one (Cauchy-Schwarz). The gradient has
i-th component -2k (log_{x_i} x_{i-1} + log_{x_i} x_{i+1}); flowing against
it with backtracking line search strictly decreases energy until the loop
either collapses to a point or reaches a closed geodesic (a critical point).

The module also provides a chart-based Newton polish that converges onto
geodesic saddle points from nearby configurations; plain anti-gradient flow
on a two-sphere generically shrinks loops to points, so the polish is what
turns near-misses of saddles into converged geodesics.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import surface as sf
from .errors import AdjacencyViolation, MaxIters, Stalled

# Flow constants. tol_crit scales with k because gradient components do.
TOL_CRIT_FACTOR = 1e-6
TOL_SPEED = 1e-3
EPS_POINT = 1e-3
STEP_MIN = 1e-12
INIT_STEP_FACTOR = 1e-3
STEP_GROWTH = 1.3
RESAMPLE_EVERY = 25
K_MIN = 16


def tol_crit(k: int) -> float:
    return TOL_CRIT_FACTOR * k


# ---------------------------------------------------------------------------
# Types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DiscreteLoop:
    """k cyclically ordered surface points with cached gaps and energy."""

    points: np.ndarray          # (k, 3)
    gaps: np.ndarray            # (k,), gaps[i] = d(x_i, x_{i+1})
    energy: float

    @property
    def k(self) -> int:
        return len(self.points)

    def speed_variation(self) -> float:
        """Relative deviation of the gaps from their mean (0 for equal speed)."""
        m = self.gaps.mean()
        if m == 0.0:
            return 0.0
        return float(np.abs(self.gaps - m).max() / m)


@dataclass(frozen=True)
class LoopTangent:
    """One tangent vector per loop point (gradients, flow directions)."""

    base: DiscreteLoop
    vectors: np.ndarray         # (k, 3)

    def norm(self) -> float:
        return float(np.linalg.norm(self.vectors))


@dataclass(frozen=True)
class Geodesic:
    """Shortening outcome: the flow reached a closed-geodesic critical point."""

    loop: DiscreteLoop
    length: float
    iterations: int
    grad_norm: float


@dataclass(frozen=True)
class Point:
    """Shortening outcome: the loop collapsed below the point threshold."""

    point: np.ndarray
    iterations: int


@dataclass
class ShortenOptions:
    max_iters: int = 20000
    eps_point: float = EPS_POINT
    resample_every: int = RESAMPLE_EVERY
    dip_polish: bool = True
    # Relative gradient-norm level under which a dip triggers a saddle polish.
    dip_threshold: float = 0.15
    polish_attempts: int = 3


# ---------------------------------------------------------------------------
# Construction and invariants
# ---------------------------------------------------------------------------

def choose_k(s: sf.ConvexSurface, energy_bound: float) -> int:
    """Smallest power of two k with every sublevel gap below the proxy.

    Cauchy-Schwarz bounds each gap of a loop with E <= energy_bound by
    sqrt(energy_bound / k), so k > energy_bound / injrad_proxy^2 suffices.
    Clamped below at K_MIN.
    """
    inj = sf.injrad_proxy(s)
    k = K_MIN
    while k <= energy_bound / inj**2:
        k *= 2
    return k


def _cyclic_logs(s, P):
    """Logs to cyclic neighbors for stacked loops P of shape (..., k, 3).

    Returns (L_prev, L_next) with L_next[..., i, :] = log_{x_i}(x_{i+1}).
    """
    base = np.concatenate([P, P], axis=-2)
    tgt = np.concatenate([np.roll(P, -1, axis=-2), np.roll(P, 1, axis=-2)], axis=-2)
    flat_b = base.reshape(-1, 3)
    flat_t = tgt.reshape(-1, 3)
    L = sf.log_many(s, flat_b, flat_t).reshape(base.shape)
    k = P.shape[-2]
    return L[..., k:, :], L[..., :k, :]


def _loop_from_points(s, P, L_next=None):
    if L_next is None:
        _, L_next = _cyclic_logs(s, P)
    gaps = np.linalg.norm(L_next, axis=-1)
    k = len(P)
    return DiscreteLoop(points=P, gaps=gaps, energy=float(k * np.sum(gaps**2)))


def make_loop(s: sf.ConvexSurface, points: np.ndarray) -> DiscreteLoop:
    """Validated loop constructor; raises AdjacencyViolation on wide gaps."""
    P = np.asarray(points, dtype=float)
    if P.ndim != 2 or P.shape[1] != 3 or len(P) < 3:
        raise ValueError("loop points must be an (k>=3, 3) array")
    loop = _loop_from_points(s, P)
    inj = sf.injrad_proxy(s)
    if np.any(loop.gaps >= inj):
        raise AdjacencyViolation(
            f"max gap {loop.gaps.max():.4g} >= injrad proxy {inj:.4g}"
        )
    return loop


def energy(s: sf.ConvexSurface, loop: DiscreteLoop) -> float:
    """Recompute E_k = k sum d(x_i, x_{i+1})^2, validating adjacency."""
    inj = sf.injrad_proxy(s)
    gaps = sf.distance_many(
        s, loop.points, np.roll(loop.points, -1, axis=0)
    )
    if np.any(gaps >= inj):
        raise AdjacencyViolation(
            f"max gap {gaps.max():.4g} >= injrad proxy {inj:.4g}"
        )
    return float(loop.k * np.sum(gaps**2))


def loop_length(s: sf.ConvexSurface, loop: DiscreteLoop) -> float:
    """Total broken-geodesic length; length^2 <= energy with equality at equal gaps."""
    return float(loop.gaps.sum())


def grad_energy(s: sf.ConvexSurface, loop: DiscreteLoop) -> LoopTangent:
    """Gradient of E_k: component i is -2k (log_{x_i} x_{i-1} + log_{x_i} x_{i+1}).

    Equivalent to minus the broken-geodesic anti-gradient built from one-sided
    velocities, since each segment has constant speed k * d(x_i, x_{i+1}).
    """
    L_prev, L_next = _cyclic_logs(s, loop.points)
    G = -2.0 * loop.k * (L_prev + L_next)
    return LoopTangent(base=loop, vectors=G)


def resample_loop(s: sf.ConvexSurface, loop: DiscreteLoop) -> DiscreteLoop:
    """Arc-length reparametrization along the broken geodesic.

    Restores near-equal gaps (the E ~ L^2 regime) while preserving the
    geometric curve; point 0 is kept as the anchor.
    """
    P = loop.points[None]
    _, L_next = _cyclic_logs(s, P)
    newP = _resample_rows(s, P, L_next)
    return _loop_from_points(s, newP[0])


def _resample_rows(s, P, L_next):
    """Vectorized arc-length resampling for stacked loops (B, k, 3)."""
    B, k, _ = P.shape
    gaps = np.linalg.norm(L_next, axis=-1)
    total = gaps.sum(axis=1)
    newP = P.copy()
    live = total > 1e-14
    if not np.any(live):
        return newP
    cum = np.concatenate([np.zeros((B, 1)), np.cumsum(gaps, axis=1)], axis=1)
    base_idx = np.empty((B, k), dtype=np.int64)
    frac = np.zeros((B, k))
    for b in range(B):
        if not live[b]:
            continue
        t = np.arange(k) * (total[b] / k)
        idx = np.clip(np.searchsorted(cum[b], t, side="right") - 1, 0, k - 1)
        base_idx[b] = idx
        g = gaps[b, idx]
        frac[b] = np.where(g > 1e-14, (t - cum[b, idx]) / np.maximum(g, 1e-300), 0.0)
    rows = np.repeat(np.arange(B), k)
    cols = base_idx.reshape(-1)
    V = L_next[rows, cols] * frac.reshape(-1, 1)
    moved = sf.exp_many(s, P[rows, cols], V).reshape(B, k, 3)
    newP[live] = moved[live]
    return newP


# ---------------------------------------------------------------------------
# Flow
# ---------------------------------------------------------------------------

def flow_step(s: sf.ConvexSurface, loop: DiscreteLoop, step: float) -> DiscreteLoop:
    """One anti-gradient step with backtracking until energy strictly decreases.

    Critical points (gradient below tol_crit) and point-like loops are fixed
    points and are returned unchanged. Raises Stalled when backtracking hits
    STEP_MIN away from criticality.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    drv = FlowDriver(s, loop.points[None], step_init=step)
    moved = drv.step_all(np.array([True]))
    if drv.status[0] == FlowDriver.STALLED:
        raise Stalled(
            f"no energy decrease above step {STEP_MIN:g} with grad norm "
            f"{drv.grad_norms[0]:.3g} > {tol_crit(loop.k):.3g}"
        )
    if not moved[0]:
        return loop
    return drv.loop(0)


class FlowDriver:
    """Lockstep backtracking anti-gradient flow over stacked loops (B, k, 3).

    Shared by the multistart shortener and the sweepout min-max: geometry
    calls are batched across all loops, while step sizes, energies and
    termination flags are tracked per row. Logs to successor points are
    cached between iterations (a step's acceptance test already computes
    them for the trial position).
    """

    RUNNING, POINT, CRITICAL, STALLED = 0, 1, 2, 3

    def __init__(self, s, P, step_init=None, eps_point=EPS_POINT):
        self.s = s
        self.P = np.array(P, dtype=float)
        self.B, self.k, _ = self.P.shape
        self.inj = sf.injrad_proxy(s)
        self.tol_crit = tol_crit(self.k)
        self.eps2 = eps_point**2
        step0 = INIT_STEP_FACTOR / self.k if step_init is None else step_init
        self.step = np.full(self.B, float(step0))
        self.status = np.full(self.B, self.RUNNING, dtype=np.int64)
        self.accepted = np.zeros(self.B, dtype=np.int64)
        self.grad_norms = np.full(self.B, np.inf)
        self._L_next = None
        self._refresh(np.arange(self.B))

    def _refresh(self, rows):
        if len(rows) == 0:
            return
        _, L_next = _cyclic_logs(self.s, self.P[rows])
        if self._L_next is None:
            self._L_next = np.zeros_like(self.P)
            self.gaps = np.zeros((self.B, self.k))
            self.E = np.zeros(self.B)
        self._L_next[rows] = L_next
        self.gaps[rows] = np.linalg.norm(L_next, axis=-1)
        self.E[rows] = self.k * np.sum(self.gaps[rows] ** 2, axis=1)

    def loop(self, b: int) -> DiscreteLoop:
        return DiscreteLoop(
            points=self.P[b].copy(),
            gaps=self.gaps[b].copy(),
            energy=float(self.E[b]),
        )

    def gradients(self, rows):
        """Gradient rows; the successor-log half comes from the cache."""
        P = self.P[rows]
        base = P.reshape(-1, 3)
        tgt = np.roll(P, 1, axis=1).reshape(-1, 3)
        L_prev = sf.log_many(self.s, base, tgt).reshape(P.shape)
        G = -2.0 * self.k * (L_prev + self._L_next[rows])
        self.grad_norms[rows] = np.linalg.norm(G.reshape(len(rows), -1), axis=1)
        return G

    def step_all(self, active: np.ndarray) -> np.ndarray:
        """One flow attempt for every active row. Returns the moved mask.

        Rows at a critical point or below the point threshold are marked and
        left in place; rows whose backtracking bottoms out are marked STALLED.
        """
        moved = np.zeros(self.B, dtype=bool)
        rows = np.nonzero(active & (self.status == self.RUNNING))[0]
        if len(rows) == 0:
            return moved
        G = self.gradients(rows)
        gn = self.grad_norms[rows]
        pt = self.E[rows] <= self.eps2
        self.status[rows[pt]] = self.POINT
        crit = (~pt) & (gn <= self.tol_crit)
        self.status[rows[crit]] = self.CRITICAL
        work = rows[~(pt | crit)]
        G = G[~(pt | crit)]
        backtracked = np.zeros(len(work), dtype=bool)
        pending = np.arange(len(work))
        # Trial displacements beyond a fraction of the injectivity proxy are
        # rejected before any geometry work: they cannot be accepted (the gap
        # invariant would break) and their exp/log calls would be very costly.
        gmax = np.linalg.norm(G, axis=-1).max(axis=-1)
        vcap = 0.3 * self.inj
        while len(pending):
            over = pending[self.step[work[pending]] * gmax[pending] > vcap]
            if len(over):
                backtracked[over] = True
                self.step[work[over]] *= 0.5
                dead = over[self.step[work[over]] < STEP_MIN]
                self.status[work[dead]] = self.STALLED
                pending = pending[(self.step[work[pending]] * gmax[pending] <= vcap)
                                  & (self.step[work[pending]] >= STEP_MIN)]
                continue
            w = work[pending]
            V = -self.step[w, None, None] * G[pending]
            flatP = self.P[w].reshape(-1, 3)
            trial = sf.exp_many(self.s, flatP, V.reshape(-1, 3)).reshape(V.shape)
            nxt = np.roll(trial, -1, axis=1)
            L_next = sf.log_many(
                self.s, trial.reshape(-1, 3), nxt.reshape(-1, 3)
            ).reshape(V.shape)
            gaps = np.linalg.norm(L_next, axis=-1)
            E_new = self.k * np.sum(gaps**2, axis=1)
            ok = (E_new < self.E[w]) & np.all(gaps < self.inj, axis=1)
            acc = w[ok]
            self.P[acc] = trial[ok]
            self._L_next[acc] = L_next[ok]
            self.gaps[acc] = gaps[ok]
            self.E[acc] = E_new[ok]
            self.accepted[acc] += 1
            moved[acc] = True
            grow = acc[~backtracked[pending[ok]]]
            self.step[grow] *= STEP_GROWTH
            rej = pending[~ok]
            backtracked[rej] = True
            self.step[work[rej]] *= 0.5
            dead = rej[self.step[work[rej]] < STEP_MIN]
            self.status[work[dead]] = self.STALLED
            pending = rej[self.step[work[rej]] >= STEP_MIN]
        return moved

    def resample(self, rows):
        rows = np.asarray(rows, dtype=np.int64)
        if len(rows) == 0:
            return
        self.P[rows] = _resample_rows(self.s, self.P[rows], self._L_next[rows])
        self._refresh(rows)


def shorten(s: sf.ConvexSurface, loop: DiscreteLoop,
            opts: ShortenOptions = None):
    """Run the shortening flow to its dichotomy: Geodesic or Point.

    Terminates with Point when energy drops below eps_point^2 (returning the
    projected centroid) and with Geodesic when the gradient norm falls below
    tol_crit at non-point energy; the returned geodesic is resampled to
    equal speed. With dip_polish enabled, upward turns of the gradient norm
    at low levels trigger a Newton polish toward the nearby saddle, which
    captures closed geodesics the raw flow would slide past.
    """
    opts = opts or ShortenOptions()
    drv = FlowDriver(s, loop.points[None], eps_point=opts.eps_point)
    active = np.array([True])
    prev_gn = np.inf
    decreasing = False
    polish_left = opts.polish_attempts
    dip_level = opts.dip_threshold * 2 * drv.k * max(loop.gaps.mean(), 1e-12)
    for it in range(1, opts.max_iters + 1):
        drv.step_all(active)
        if drv.status[0] == FlowDriver.POINT:
            centroid = sf.project_points(s, drv.P[0].mean(axis=0)[None])[0]
            return Point(point=centroid, iterations=it)
        if drv.status[0] == FlowDriver.CRITICAL:
            out = _finalize_geodesic(s, drv.loop(0), it)
            if out is not None:
                return out
            drv.status[0] = FlowDriver.RUNNING
        if drv.status[0] == FlowDriver.STALLED:
            raise Stalled("flow stalled away from criticality")
        gn = drv.grad_norms[0]
        if (opts.dip_polish and polish_left > 0 and decreasing
                and gn > prev_gn * (1 + 1e-12) and prev_gn < dip_level
                and drv.E[0] > (2 * opts.eps_point) ** 2):
            polish_left -= 1
            res = polish_to_geodesic(s, drv.loop(0))
            if res is not None:
                out = _finalize_geodesic(s, res.loop, it)
                if out is not None:
                    return out
        decreasing = gn <= prev_gn
        prev_gn = gn
        if drv.accepted[0] and drv.accepted[0] % opts.resample_every == 0:
            drv.resample([0])
    raise MaxIters(f"shorten did not settle in {opts.max_iters} iterations")


def _finalize_geodesic(s, loop, iterations):
    """Equal-speed resample plus criticality recheck for a geodesic candidate."""
    for _ in range(4):
        loop = resample_loop(s, loop)
        gn = grad_energy(s, loop).norm()
        if gn <= tol_crit(loop.k):
            if loop.speed_variation() <= TOL_SPEED:
                return Geodesic(
                    loop=loop,
                    length=loop_length(s, loop),
                    iterations=iterations,
                    grad_norm=gn,
                )
            continue
        res = polish_to_geodesic(s, loop)
        if res is None:
            return None
        loop = res.loop
    return None


# ---------------------------------------------------------------------------
# Chart Newton polish (saddle refinement)
# ---------------------------------------------------------------------------

@dataclass
class PolishResult:
    loop: DiscreteLoop
    grad_norm: float
    hessian: np.ndarray         # (2k, 2k) chart Hessian at the final loop
    bases: np.ndarray           # (k, 2, 3) orthonormal tangent bases


def tangent_bases(s, P):
    """Deterministic orthonormal tangent frames at each point, (n, 2, 3)."""
    n = sf.unit_normal(s, P)
    seed = np.where(np.abs(n[:, 2:3]) < 0.9,
                    np.array([0.0, 0.0, 1.0]), np.array([1.0, 0.0, 0.0]))
    b1 = np.cross(seed, n)
    b1 /= np.linalg.norm(b1, axis=1, keepdims=True)
    b2 = np.cross(n, b1)
    return np.stack([b1, b2], axis=1)


def _chart_gradient(s, P, bases):
    L_prev, L_next = _cyclic_logs(s, P[None])
    G = -2.0 * len(P) * (L_prev[0] + L_next[0])
    return np.einsum("ibj,ij->ib", bases, G).reshape(-1), G


def chart_hessian(s, P, bases, eps=1e-6):
    """Finite-difference Hessian of E_k in the tangent charts.

    The energy couples only neighboring points, so each chart column
    perturbs one point and recomputes the three affected gradient rows;
    all the required logs go through a single batched call.
    """
    k = len(P)
    cols = 2 * k
    # Perturbed positions y[(i, beta)] = exp(x_i, eps * b_beta).
    V = (eps * bases).reshape(cols, 3)
    Y = sf.exp_many(s, np.repeat(P, 2, axis=0), V)
    ip = np.arange(k)
    prev_idx = (ip - 1) % k
    next_idx = (ip + 1) % k
    Yb = Y.reshape(k, 2, 3)
    # Four logs per column: x_{i-1}->y, x_{i+1}->y, y->x_{i-1}, y->x_{i+1}.
    base_pts = np.concatenate([
        np.repeat(P[prev_idx], 2, axis=0),
        np.repeat(P[next_idx], 2, axis=0),
        Y, Y,
    ])
    tgt_pts = np.concatenate([
        Y, Y,
        np.repeat(P[prev_idx], 2, axis=0),
        np.repeat(P[next_idx], 2, axis=0),
    ])
    L = sf.log_many(s, base_pts, tgt_pts)
    l_prev_to_y = L[:cols].reshape(k, 2, 3)
    l_next_to_y = L[cols:2 * cols].reshape(k, 2, 3)
    l_y_to_prev = L[2 * cols:3 * cols].reshape(k, 2, 3)
    l_y_to_next = L[3 * cols:].reshape(k, 2, 3)

    L_prev, L_next = _cyclic_logs(s, P[None])
    L_prev, L_next = L_prev[0], L_next[0]
    g0 = -2.0 * k * (L_prev + L_next)
    H = np.zeros((cols, cols))
    for i in range(k):
        for b in range(2):
            col = 2 * i + b
            # Row i-1: its successor log now targets y.
            gi_m = -2.0 * k * (L_prev[prev_idx[i]] + l_prev_to_y[i, b])
            # Row i+1: its predecessor log now targets y.
            gi_p = -2.0 * k * (l_next_to_y[i, b] + L_next[next_idx[i]])
            # Row i: both logs start from y.
            gi = -2.0 * k * (l_y_to_prev[i, b] + l_y_to_next[i, b])
            for row, gnew in ((prev_idx[i], gi_m), (next_idx[i], gi_p), (i, gi)):
                d = (gnew - g0[row]) / eps
                H[2 * row, col] = bases[row, 0] @ d
                H[2 * row + 1, col] = bases[row, 1] @ d
    return 0.5 * (H + H.T)


def polish_to_geodesic(s, loop: DiscreteLoop, max_rounds=12,
                       trust_factor=0.25) -> PolishResult | None:
    """Newton iteration on grad E_k = 0 in per-point tangent charts.

    Indefinite saddle Newton: the step solves the full (possibly indefinite)
    chart Hessian via pseudo-inverse, which projects out reparametrization
    and symmetry zero modes. Steps are trust-region capped and accepted only
    when the gradient norm decreases; returns None when no progress is made.
    """
    P = loop.points.copy()
    k = len(P)
    tc = tol_crit(k)
    inj = sf.injrad_proxy(s)
    H = bases = None
    for _ in range(max_rounds):
        bases = tangent_bases(s, P)
        g, G = _chart_gradient(s, P, bases)
        gn = np.linalg.norm(g)
        if gn <= tc:
            H = chart_hessian(s, P, bases)
            lp = _loop_from_points(s, P)
            if np.any(lp.gaps >= inj) or lp.gaps.min() < 0.05 * lp.gaps.mean():
                return None
            return PolishResult(loop=lp, grad_norm=gn, hessian=H, bases=bases)
        H = chart_hessian(s, P, bases)
        du = -np.linalg.pinv(H, rcond=1e-9, hermitian=True) @ g
        cap = trust_factor * max(loop.gaps.mean(), 1e-9)
        du_pts = du.reshape(k, 2)
        norms = np.linalg.norm(du_pts, axis=1)
        scale = min(1.0, cap / max(norms.max(), 1e-300))
        du_pts = du_pts * scale
        improved = False
        for _ in range(5):
            V = np.einsum("ib,ibj->ij", du_pts, bases)
            P_new = sf.exp_many(s, P, V)
            g_new, _ = _chart_gradient(s, P_new, tangent_bases(s, P_new))
            if np.linalg.norm(g_new) < gn:
                P = P_new
                improved = True
                break
            du_pts = du_pts * 0.5
        if not improved:
            return None
    return None


# ---------------------------------------------------------------------------
# Finite-difference harness (oracle side of the gradient contract)
# ---------------------------------------------------------------------------

def frozen_energy(s, P, n_steps, tol=1e-12):
    """E_k with a frozen integrator schedule, for smooth FD differencing."""
    nxt = np.roll(P, -1, axis=0)
    gaps = np.linalg.norm(
        sf.log_many(s, P, nxt, tol=tol, n_steps=n_steps), axis=1
    )
    return float(len(P) * np.sum(gaps**2))


def fd_directional_derivative(s, loop: DiscreteLoop, direction: np.ndarray,
                              eps: float = 1e-5) -> float:
    """Central difference of E_k along exp-curves in a tangent direction.

    The substep count is frozen from the unperturbed loop so that both
    evaluations share one discretization and the integrator bias cancels.
    """
    arc = sf.EXP_STEP / np.sqrt(s.k_max)
    n = max(sf.EXP_MIN_SUBSTEPS, int(np.ceil(loop.gaps.max() / arc)) + 2)
    Pp = sf.exp_many(s, loop.points, eps * direction)
    Pm = sf.exp_many(s, loop.points, -eps * direction)
    return (frozen_energy(s, Pp, n) - frozen_energy(s, Pm, n)) / (2 * eps)


# ---------------------------------------------------------------------------
# CSV serialization (debugging / plot emission)
# ---------------------------------------------------------------------------

def loop_to_row(loop: DiscreteLoop) -> list[float]:
    return [float(loop.k)] + [float(x) for x in loop.points.reshape(-1)]


def loop_from_row(s, row) -> DiscreteLoop:
    k = int(row[0])
    pts = np.asarray(row[1:1 + 3 * k], dtype=float).reshape(k, 3)
    return make_loop(s, pts)
