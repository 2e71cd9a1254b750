"""Label-setting quasipotential solvers.

Four methods share the Dijkstra-like driver:

* "ejm": jet marching over angle-binned oblong stencils, cubic path
  updates carrying (U, grad U), a two-part accept/reject rule, and an
  l1-ring fail-safe that rescues points about to finalize from a
  single-parent update;
* "jm": identical update machinery over a dense disk neighborhood, kept
  as the speed baseline for the targeted stencils;
* "linear-midpoint" / "asr-endpoint": first-order baselines with linear
  value interpolation, straight path segments, and midpoint or right
  endpoint quadrature over adaptively refined stencils.

The grid state lives in flat arrays and the whole solve runs inside
compiled kernels; acceptance order, parent links, and the minimizing
parameters are recorded per point so post-processing can replay the
solve (prefactor transport) or trace characteristics.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field as dc_field, replace
from typing import Optional

import numpy as np
from numba import njit

from .fields import DriftField, b_eval
from .grids import (ACCEPTED, CONSIDERED, GridSpec, KIND_INIT, KIND_NONE,
                    KIND_ONE_POINT, KIND_TRIANGLE, SolutionField, UNKNOWN,
                    heap_pop, heap_push, heap_update)
from .minimize import (CONVERGED, _hermite, action_simpson, eval_G1,
                       exit_gradient, newton_onepoint, newton_triangle,
                       simpson_node_count)
from .stencils import (DegenerateDriftError, StencilBank, build_asr_bank,
                       build_bank, jm_disk_offsets)

METHODS = ("ejm", "jm", "linear-midpoint", "asr-endpoint")

STOP_BOUNDARY = 0
STOP_TARGET = 1
STOP_FULL = 2

STATUS_STOPPED = 0
STATUS_EXHAUSTED = 1
STATUS_DEGENERATE = 2

_COUNTER_NAMES = ("heap_push", "heap_extract", "onepoint_calls",
                  "onepoint_fallbacks", "triangle_calls", "triangle_interior",
                  "triangle_adopted", "failsafe_calls", "failsafe_corrected",
                  "failsafe_exhausted", "update_events", "golden_calls")


class InitializationError(RuntimeError):
    """The linearized drift at the attractor is not a stable node/focus."""


class DomainExhaustedError(RuntimeError):
    """The Considered set emptied before the stopping condition was met."""


@dataclass(frozen=True)
class SolverConfig:
    """Everything a solve needs besides the field and the grid."""

    method: str = "ejm"
    n_bins: int = 64
    k_cutoff: int = 4
    d_gap: int = 3
    failsafe_kmax: int = 20
    jm_radius: int = 10
    init_radius: int = 1
    asr_alpha: float = 0.9999
    stop: str = "boundary"            # boundary | target | full
    target: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; one of {METHODS}")
        if self.stop not in ("boundary", "target", "full"):
            raise ValueError(f"unknown stop mode {self.stop!r}")
        if self.stop == "target" and self.target is None:
            raise ValueError("stop='target' needs a target point")
        if self.failsafe_kmax < 0:
            raise ValueError("failsafe_kmax must be >= 0")
        if self.method == "jm" and self.jm_radius < 2:
            raise ValueError("jm_radius must be >= 2")
        if self.init_radius < 1:
            raise ValueError("init_radius must be >= 1")


def solve_lyapunov_2x2(j: np.ndarray) -> np.ndarray:
    """Symmetric solution of J S + S J^T = -I for a stable 2x2 J."""
    a = np.array([
        [2.0 * j[0, 0], 2.0 * j[0, 1], 0.0],
        [j[1, 0], j[0, 0] + j[1, 1], j[0, 1]],
        [0.0, 2.0 * j[1, 0], 2.0 * j[1, 1]],
    ])
    rhs = np.array([-1.0, 0.0, -1.0])
    try:
        s1, s2, s3 = np.linalg.solve(a, rhs)
    except np.linalg.LinAlgError as exc:
        raise InitializationError(f"Lyapunov system singular: {exc}") from exc
    return np.array([[s1, s2], [s2, s3]])


def init_linearized(field: DriftField, grid: GridSpec, radius: int = 1):
    """Quadratic form of the linearized quasipotential at the attractor
    and the seeded neighborhood values.

    Returns (q_matrix, seed_indices, seed_u, seed_grads).  The seeds are
    the in-bounds points with Chebyshev distance <= radius from the
    attractor, excluding the attractor itself.
    """
    o = np.asarray(field.attractor, dtype=float)
    j = field.db(o)
    eig = np.linalg.eigvals(j)
    if np.any(eig.real >= 0.0):
        raise InitializationError(
            f"attractor Jacobian has non-negative eigenvalue(s) {eig}")
    sigma = solve_lyapunov_2x2(j)
    try:
        q = 0.5 * np.linalg.inv(sigma)
    except np.linalg.LinAlgError as exc:
        raise InitializationError("linearized covariance singular") from exc
    q = 0.5 * (q + q.T)
    if q[0, 0] <= 0.0 or np.linalg.det(q) <= 0.0:
        raise InitializationError("linearized quadratic form not positive definite")
    n = grid.n
    ai, aj = grid.index_of(o)
    idx = []
    uvals = []
    grads = []
    for di in range(-radius, radius + 1):
        for dj in range(-radius, radius + 1):
            if di == 0 and dj == 0:
                continue
            ix, iy = ai + di, aj + dj
            if not (0 <= ix < n and 0 <= iy < n):
                continue
            z = np.array([grid.x0 + ix * grid.h, grid.y0 + iy * grid.h]) - o
            idx.append(ix * n + iy)
            uvals.append(float(z @ q @ z))
            grads.append(2.0 * q @ z)
    return q, np.array(idx, dtype=np.int64), np.array(uvals), np.array(grads)


# ---------------------------------------------------------------------------
# compiled kernels
# ---------------------------------------------------------------------------

@njit(cache=True)
def _bin_of(bx, by, n_bins):
    key = (-math.atan2(by, bx)) % (2.0 * math.pi)
    w = math.pi / n_bins
    return int(math.ceil((key - w) / (2.0 * w))) % n_bins


@njit(cache=True)
def _try_triangle(kind, par, h, n, x0, y0, xi, zi, yi,
                  u, gx, gy):
    """Attempt the three-parameter update of yi from base segment
    (xi, zi).  Returns (ok, refined value, lam, a0, a1, grad, updlen)."""
    xix, xiy = divmod(xi, n)
    zix, ziy = divmod(zi, n)
    yix, yiy = divmod(yi, n)
    xx = x0 + xix * h
    xy = y0 + xiy * h
    zx = x0 + zix * h
    zy = y0 + ziy * h
    yx = x0 + yix * h
    yy = y0 + yiy * h
    dx = zx - xx
    dy = zy - xy
    u0 = u[xi]
    u1 = u[zi]
    du0 = dx * gx[xi] + dy * gy[xi]
    du1 = dx * gx[zi] + dy * gy[zi]
    status, a0, a1, lam, _ = newton_triangle(
        kind, par, xx, xy, zx, zy, yx, yy, u0, u1, du0, du1)
    if status != CONVERGED:
        return False, np.inf, 0.0, 0.0, 0.0, 0.0, 0.0, np.inf
    bxp = xx + lam * dx
    byp = xy + lam * dy
    ux = yx - bxp
    uy = yy - byp
    ulen = math.sqrt(ux * ux + uy * uy)
    if ulen < 1e-14:
        return False, np.inf, 0.0, 0.0, 0.0, 0.0, 0.0, np.inf
    nn = simpson_node_count(ulen, h)
    pl, _, _ = _hermite(u0, u1, du0, du1, lam)
    vref = pl + action_simpson(kind, par, bxp, byp, yx, yy, a0, a1, nn)
    if not math.isfinite(vref):
        return False, np.inf, 0.0, 0.0, 0.0, 0.0, 0.0, np.inf
    ex = ux / ulen
    ey = uy / ulen
    ggx, ggy = exit_gradient(kind, par, yx, yy, ex, ey, -ey, ex, a1)
    return True, vref, lam, a0, a1, ggx, ggy, ulen


@njit(cache=True)
def _fail_safe(kind, par, h, n, x0, y0, xi, kmax,
               u, gx, gy, state, lastkind, best1, p1, p2, lamarr,
               a0arr, a1arr, updlen, ringbuf):
    """Ring search for a replacement triangle update of xi; scans l1
    rings outward and adopts the first interior update that beats every
    single-parent value ever proposed to xi."""
    ix, iy = divmod(xi, n)
    for k in range(1, kmax + 1):
        m = 0
        # counter-clockwise diamond walk from the +x axis
        for t in range(k):
            di = k - t
            dj = t
            jx = ix + di
            jy = iy + dj
            if 0 <= jx < n and 0 <= jy < n:
                ringbuf[m] = jx * n + jy
                m += 1
        for t in range(k):
            di = -t
            dj = k - t
            jx = ix + di
            jy = iy + dj
            if 0 <= jx < n and 0 <= jy < n:
                ringbuf[m] = jx * n + jy
                m += 1
        for t in range(k):
            di = -(k - t)
            dj = -t
            jx = ix + di
            jy = iy + dj
            if 0 <= jx < n and 0 <= jy < n:
                ringbuf[m] = jx * n + jy
                m += 1
        for t in range(k):
            di = t
            dj = -(k - t)
            jx = ix + di
            jy = iy + dj
            if 0 <= jx < n and 0 <= jy < n:
                ringbuf[m] = jx * n + jy
                m += 1
        if m < 2:
            continue
        for t in range(m):
            a = ringbuf[t]
            b = ringbuf[(t + 1) % m]
            if state[a] == ACCEPTED and state[b] == ACCEPTED:
                ok, vref, lam, a0, a1, ggx, ggy, ulen = _try_triangle(
                    kind, par, h, n, x0, y0, a, b, xi, u, gx, gy)
                if ok and vref < best1[xi]:
                    u[xi] = vref
                    gx[xi] = ggx
                    gy[xi] = ggy
                    lastkind[xi] = KIND_TRIANGLE
                    p1[xi] = a
                    p2[xi] = b
                    lamarr[xi] = lam
                    a0arr[xi] = a0
                    a1arr[xi] = a1
                    updlen[xi] = ulen
                    return True
    return False


@njit(cache=True)
def _march_jet(kind, par, n, x0, y0, h,
               offsets, starts, n_bins, use_bins,
               stop_mode, stop_idx, kmax,
               u, gx, gy, state, lastkind, best1, p1, p2, lamarr,
               a0arr, a1arr, updlen, order_of, acc_list, fs_flag,
               heap, pos, seeds, counters):
    heap_size = 0
    for s in seeds:
        heap_size = heap_push(heap, pos, u, heap_size, s)
        counters[0] += 1
    n_acc = 0
    for i in range(len(order_of)):
        if state[i] == ACCEPTED:
            order_of[i] = n_acc
            acc_list[n_acc] = i
            n_acc += 1
    ringbuf = np.empty(4 * max(kmax, 1), dtype=np.int64)
    status = STATUS_EXHAUSTED
    while heap_size > 0:
        xi, heap_size = heap_pop(heap, pos, u, heap_size)
        counters[1] += 1
        if lastkind[xi] == KIND_ONE_POINT and kmax > 0:
            counters[7] += 1
            if _fail_safe(kind, par, h, n, x0, y0, xi, kmax, u, gx, gy,
                          state, lastkind, best1, p1, p2, lamarr,
                          a0arr, a1arr, updlen, ringbuf):
                counters[8] += 1
            else:
                fs_flag[xi] = True
                counters[9] += 1
        state[xi] = ACCEPTED
        order_of[xi] = n_acc
        acc_list[n_acc] = xi
        n_acc += 1
        ix, iy = divmod(xi, n)
        if stop_mode == STOP_BOUNDARY and (
                ix == 0 or iy == 0 or ix == n - 1 or iy == n - 1):
            status = STATUS_STOPPED
            break
        if stop_mode == STOP_TARGET and xi == stop_idx:
            status = STATUS_STOPPED
            break
        xx = x0 + ix * h
        xy = y0 + iy * h
        bx, by = b_eval(kind, par, xx, xy)
        if bx * bx + by * by < 1e-300:
            status = STATUS_DEGENERATE
            break
        if use_bins:
            kbin = _bin_of(bx, by, n_bins)
            s0 = starts[kbin]
            s1 = starts[kbin + 1]
        else:
            s0 = 0
            s1 = len(offsets)
        for m in range(s0, s1):
            jx = ix + offsets[m, 0]
            jy = iy + offsets[m, 1]
            if jx < 0 or jx >= n or jy < 0 or jy >= n:
                continue
            yi = jx * n + jy
            if state[yi] == ACCEPTED:
                continue
            counters[10] += 1
            yx = x0 + jx * h
            yy = y0 + jy * h
            # single-parent proposal from xi
            counters[2] += 1
            st1, a0, a1, v1 = newton_onepoint(kind, par, xx, xy, yx, yy, u[xi])
            if st1 != CONVERGED:
                counters[3] += 1
                a0 = 0.0
                a1 = 0.0
                r = eval_G1(kind, par, xx, xy, yx, yy, u[xi], 0.0, 0.0)
                v1 = r[0] if r[6] == 0 else np.inf
            if math.isfinite(v1):
                if v1 < best1[yi]:
                    best1[yi] = v1
                if v1 < u[yi]:
                    dxy = yx - xx
                    dyy = yy - xy
                    dd = math.sqrt(dxy * dxy + dyy * dyy)
                    ex = dxy / dd
                    ey = dyy / dd
                    ggx, ggy = exit_gradient(kind, par, yx, yy, ex, ey, -ey, ex, a1)
                    u[yi] = v1
                    gx[yi] = ggx
                    gy[yi] = ggy
                    lastkind[yi] = KIND_ONE_POINT
                    p1[yi] = xi
                    p2[yi] = -1
                    lamarr[yi] = 0.0
                    a0arr[yi] = a0
                    a1arr[yi] = a1
                    updlen[yi] = np.inf
                    if pos[yi] == -1:
                        state[yi] = CONSIDERED
                        heap_size = heap_push(heap, pos, u, heap_size, yi)
                        counters[0] += 1
                    else:
                        heap_update(heap, pos, u, heap_size, yi)
            # triangle proposals over the 8-neighborhood bases of xi
            for di in range(-1, 2):
                for dj in range(-1, 2):
                    if di == 0 and dj == 0:
                        continue
                    zx_i = ix + di
                    zy_i = iy + dj
                    if zx_i < 0 or zx_i >= n or zy_i < 0 or zy_i >= n:
                        continue
                    zi = zx_i * n + zy_i
                    if state[zi] != ACCEPTED:
                        continue
                    counters[4] += 1
                    ok, vref, lam, ta0, ta1, ggx, ggy, ulen = _try_triangle(
                        kind, par, h, n, x0, y0, xi, zi, yi, u, gx, gy)
                    if not ok:
                        continue
                    counters[5] += 1
                    if vref >= best1[yi]:
                        continue
                    if lastkind[yi] == KIND_TRIANGLE and ulen >= updlen[yi]:
                        continue
                    counters[6] += 1
                    u[yi] = vref
                    gx[yi] = ggx
                    gy[yi] = ggy
                    lastkind[yi] = KIND_TRIANGLE
                    p1[yi] = xi
                    p2[yi] = zi
                    lamarr[yi] = lam
                    a0arr[yi] = ta0
                    a1arr[yi] = ta1
                    updlen[yi] = ulen
                    if pos[yi] == -1:
                        state[yi] = CONSIDERED
                        heap_size = heap_push(heap, pos, u, heap_size, yi)
                        counters[0] += 1
                    else:
                        heap_update(heap, pos, u, heap_size, yi)
    return n_acc, status


@njit(cache=True)
def _golden_polish(kind, par, midpoint, xx, xy, zx, zy, yx, yy, ux, uz):
    """1D minimization of the straight-path linear-interpolation update
    over the base parameter: golden section then Newton polish.
    Returns (lam, value)."""
    gr = 0.6180339887498949
    lo = 0.0
    hi = 1.0

    def phi(lam):
        bx = xx + lam * (zx - xx)
        by = xy + lam * (zy - xy)
        dx = yx - bx
        dy = yy - by
        ll = math.sqrt(dx * dx + dy * dy)
        if ll < 1e-14:
            return np.inf
        if midpoint:
            qx = 0.5 * (bx + yx)
            qy = 0.5 * (by + yy)
        else:
            qx = yx
            qy = yy
        b1, b2 = b_eval(kind, par, qx, qy)
        s = math.sqrt(b1 * b1 + b2 * b2) - (b1 * dx + b2 * dy) / ll
        return (1.0 - lam) * ux + lam * uz + ll * s

    c = hi - gr * (hi - lo)
    d = lo + gr * (hi - lo)
    fc = phi(c)
    fd = phi(d)
    while hi - lo > 1e-6:
        if fc < fd:
            hi = d
            d = c
            fd = fc
            c = hi - gr * (hi - lo)
            fc = phi(c)
        else:
            lo = c
            c = d
            fc = fd
            d = lo + gr * (hi - lo)
            fd = phi(d)
    lam = 0.5 * (lo + hi)
    # a few safeguarded Newton steps on finite differences
    eps = 1e-7
    for _ in range(3):
        f0 = phi(lam)
        fp = phi(lam + eps)
        fm = phi(lam - eps)
        d1 = (fp - fm) / (2.0 * eps)
        d2 = (fp - 2.0 * f0 + fm) / (eps * eps)
        if d2 <= 0.0 or not math.isfinite(d2):
            break
        step = d1 / d2
        nl = lam - step
        if nl < 0.0:
            nl = 0.0
        if nl > 1.0:
            nl = 1.0
        if phi(nl) <= f0:
            lam = nl
        if abs(step) < 1e-12:
            break
    best_l = lam
    best_v = phi(lam)
    if phi(0.0) < best_v:
        best_l = 0.0
        best_v = phi(0.0)
    if phi(1.0) < best_v:
        best_l = 1.0
        best_v = phi(1.0)
    return best_l, best_v


@njit(cache=True)
def _march_linear(kind, par, n, x0, y0, h,
                  legs, starts, n_bins, midpoint,
                  stop_mode, stop_idx,
                  u, gx, gy, state, lastkind, best1, p1, p2, lamarr,
                  a0arr, a1arr, updlen, order_of, acc_list,
                  heap, pos, seeds, counters):
    heap_size = 0
    for s in seeds:
        heap_size = heap_push(heap, pos, u, heap_size, s)
        counters[0] += 1
    n_acc = 0
    for i in range(len(order_of)):
        if state[i] == ACCEPTED:
            order_of[i] = n_acc
            acc_list[n_acc] = i
            n_acc += 1
    status = STATUS_EXHAUSTED
    while heap_size > 0:
        xi, heap_size = heap_pop(heap, pos, u, heap_size)
        counters[1] += 1
        state[xi] = ACCEPTED
        order_of[xi] = n_acc
        acc_list[n_acc] = xi
        n_acc += 1
        ix, iy = divmod(xi, n)
        if stop_mode == STOP_BOUNDARY and (
                ix == 0 or iy == 0 or ix == n - 1 or iy == n - 1):
            status = STATUS_STOPPED
            break
        if stop_mode == STOP_TARGET and xi == stop_idx:
            status = STATUS_STOPPED
            break
        xx = x0 + ix * h
        xy = y0 + iy * h
        bx, by = b_eval(kind, par, xx, xy)
        if bx * bx + by * by < 1e-300:
            status = STATUS_DEGENERATE
            break
        kbin = _bin_of(bx, by, n_bins)
        s0 = starts[kbin]
        s1 = starts[kbin + 1]
        for m in range(s0, s1):
            # stencil legs point from a target toward its candidate
            # parents, so the targets of xi sit at xi minus a leg
            jx = ix - legs[m, 0]
            jy = iy - legs[m, 1]
            if jx < 0 or jx >= n or jy < 0 or jy >= n:
                continue
            yi = jx * n + jy
            if state[yi] == ACCEPTED:
                continue
            counters[10] += 1
            yx = x0 + jx * h
            yy = y0 + jy * h
            byx, byy = b_eval(kind, par, yx, yy)
            if byx * byx + byy * byy < 1e-300:
                continue
            ybin = _bin_of(byx, byy, n_bins)
            t0 = starts[ybin]
            t1 = starts[ybin + 1]
            leg0x = ix - jx
            leg0y = iy - jy
            found = -1
            for t in range(t0, t1):
                if legs[t, 0] == leg0x and legs[t, 1] == leg0y:
                    found = t
                    break
            # proposal from xi alone (boundary of every pair problem)
            dx = xx - yx
            dy = xy - yy
            counters[2] += 1
            ll = math.sqrt(dx * dx + dy * dy)
            if midpoint:
                qx = 0.5 * (xx + yx)
                qy = 0.5 * (xy + yy)
            else:
                qx = yx
                qy = yy
            qb1, qb2 = b_eval(kind, par, qx, qy)
            sl = math.sqrt(qb1 * qb1 + qb2 * qb2) + (qb1 * dx + qb2 * dy) / ll
            best_v = u[xi] + ll * sl
            best_lam = 0.0
            best_zi = -1
            if found >= 0:
                nlegs = t1 - t0
                off = found - t0
                for side in range(2):
                    adj = t0 + (off - 1) % nlegs if side == 0 else t0 + (off + 1) % nlegs
                    zxi = jx + legs[adj, 0]
                    zyi = jy + legs[adj, 1]
                    if zxi < 0 or zxi >= n or zyi < 0 or zyi >= n:
                        continue
                    zi = zxi * n + zyi
                    if state[zi] != ACCEPTED:
                        continue
                    counters[11] += 1
                    zx = x0 + zxi * h
                    zy = y0 + zyi * h
                    lam, val = _golden_polish(kind, par, midpoint,
                                              xx, xy, zx, zy, yx, yy,
                                              u[xi], u[zi])
                    if val < best_v:
                        best_v = val
                        best_lam = lam
                        best_zi = zi
            if best_v < u[yi]:
                if best_zi >= 0:
                    zxi, zyi = divmod(best_zi, n)
                    bxp = xx + best_lam * ((x0 + zxi * h) - xx)
                    byp = xy + best_lam * ((y0 + zyi * h) - xy)
                else:
                    bxp = xx
                    byp = xy
                ddx = yx - bxp
                ddy = yy - byp
                dd = math.sqrt(ddx * ddx + ddy * ddy)
                ex = ddx / dd
                ey = ddy / dd
                ggx, ggy = exit_gradient(kind, par, yx, yy, ex, ey, -ey, ex, 0.0)
                u[yi] = best_v
                gx[yi] = ggx
                gy[yi] = ggy
                if best_zi >= 0:
                    lastkind[yi] = KIND_TRIANGLE
                    p2[yi] = best_zi
                    updlen[yi] = dd
                else:
                    lastkind[yi] = KIND_ONE_POINT
                    p2[yi] = -1
                    updlen[yi] = np.inf
                p1[yi] = xi
                lamarr[yi] = best_lam
                a0arr[yi] = 0.0
                a1arr[yi] = 0.0
                if best_v < best1[yi]:
                    best1[yi] = best_v
                if pos[yi] == -1:
                    state[yi] = CONSIDERED
                    heap_size = heap_push(heap, pos, u, heap_size, yi)
                    counters[0] += 1
                else:
                    heap_update(heap, pos, u, heap_size, yi)
    return n_acc, status


# ---------------------------------------------------------------------------
# driver
# ---------------------------------------------------------------------------

_BANK_CACHE: dict[tuple, StencilBank] = {}


def _cached_bank(kind: str, *key_args) -> StencilBank:
    key = (kind,) + key_args
    if key not in _BANK_CACHE:
        if kind == "oblong":
            self_bins, k_cutoff, d_gap = key_args
            _BANK_CACHE[key] = build_bank(self_bins, k_cutoff, d_gap)
        else:
            n_bins, alpha = key_args
            _BANK_CACHE[key] = build_asr_bank(n_bins, alpha)
    return _BANK_CACHE[key]


def solve(field: DriftField, grid: GridSpec,
          config: SolverConfig = SolverConfig()) -> SolutionField:
    """Run one label-setting solve and return the finalized fields."""
    n = grid.n
    size = grid.size
    u = np.full(size, np.inf)
    gx = np.full(size, np.inf)
    gy = np.full(size, np.inf)
    state = np.zeros(size, dtype=np.uint8)
    lastkind = np.zeros(size, dtype=np.uint8)
    best1 = np.full(size, np.inf)
    p1 = np.full(size, -1, dtype=np.int64)
    p2 = np.full(size, -1, dtype=np.int64)
    lamarr = np.zeros(size)
    a0arr = np.zeros(size)
    a1arr = np.zeros(size)
    updlen = np.full(size, np.inf)
    order_of = np.full(size, -1, dtype=np.int64)
    acc_list = np.full(size, -1, dtype=np.int64)
    fs_flag = np.zeros(size, dtype=np.bool_)
    heap = np.full(size, -1, dtype=np.int64)
    pos = np.full(size, -1, dtype=np.int64)
    counters = np.zeros(len(_COUNTER_NAMES), dtype=np.int64)

    _, seeds, seed_u, seed_g = init_linearized(field, grid, config.init_radius)
    ai = grid.attractor_index()
    u[ai] = 0.0
    gx[ai] = 0.0
    gy[ai] = 0.0
    state[ai] = ACCEPTED
    lastkind[ai] = KIND_INIT
    for s, uv, gv in zip(seeds, seed_u, seed_g):
        u[s] = uv
        gx[s] = gv[0]
        gy[s] = gv[1]
        state[s] = CONSIDERED
        lastkind[s] = KIND_INIT

    if config.stop == "boundary":
        stop_mode, stop_idx = STOP_BOUNDARY, -1
    elif config.stop == "target":
        ti, tj = grid.index_of(config.target)
        if not (0 <= ti < n and 0 <= tj < n):
            raise ValueError("target outside the grid")
        stop_mode, stop_idx = STOP_TARGET, grid.flat_index(ti, tj)
    else:
        stop_mode, stop_idx = STOP_FULL, -1

    t0 = time.perf_counter()
    if config.method in ("ejm", "jm"):
        if config.method == "ejm":
            bank = _cached_bank("oblong", config.n_bins, config.k_cutoff,
                                config.d_gap)
            offsets, starts, n_bins, use_bins = (bank.offsets, bank.starts,
                                                 bank.n_bins, True)
        else:
            offsets = jm_disk_offsets(config.jm_radius)
            starts = np.array([0, len(offsets)], dtype=np.int64)
            n_bins, use_bins = 1, False
        n_acc, status = _march_jet(
            field.kind, field.params, n, grid.x0, grid.y0, grid.h,
            offsets, starts, n_bins, use_bins,
            stop_mode, stop_idx, config.failsafe_kmax,
            u, gx, gy, state, lastkind, best1, p1, p2, lamarr,
            a0arr, a1arr, updlen, order_of, acc_list, fs_flag,
            heap, pos, seeds, counters)
    else:
        bank = _cached_bank("asr", config.n_bins, config.asr_alpha)
        n_acc, status = _march_linear(
            field.kind, field.params, n, grid.x0, grid.y0, grid.h,
            bank.offsets, bank.starts, bank.n_bins,
            config.method == "linear-midpoint",
            stop_mode, stop_idx,
            u, gx, gy, state, lastkind, best1, p1, p2, lamarr,
            a0arr, a1arr, updlen, order_of, acc_list,
            heap, pos, seeds, counters)
    runtime = time.perf_counter() - t0

    if status == STATUS_DEGENERATE:
        raise DegenerateDriftError(
            "drift vanished at an expanded non-attractor point")

    cdict = {name: int(v) for name, v in zip(_COUNTER_NAMES, counters)}
    cdict["status"] = ("stopped" if status == STATUS_STOPPED else "exhausted")
    return SolutionField(
        grid=grid, u=u, gx=gx, gy=gy, state=state, last_kind=lastkind,
        best_one_point=best1, parent1=p1, parent2=p2, lam=lamarr,
        slope0=a0arr, slope1=a1arr, update_length=updlen,
        order_of=order_of, accept_order=acc_list[:n_acc].copy(),
        failsafe_exhausted=fs_flag, counters=cdict,
        method=config.method, runtime=runtime)


def ejm_solve(field, grid, config: Optional[SolverConfig] = None) -> SolutionField:
    config = replace(config or SolverConfig(), method="ejm")
    return solve(field, grid, config)


def jm_solve(field, grid, config: Optional[SolverConfig] = None) -> SolutionField:
    config = replace(config or SolverConfig(), method="jm")
    return solve(field, grid, config)


def linear_midpoint_solve(field, grid, config: Optional[SolverConfig] = None) -> SolutionField:
    config = replace(config or SolverConfig(), method="linear-midpoint")
    return solve(field, grid, config)


def asr_endpoint_solve(field, grid, config: Optional[SolverConfig] = None) -> SolutionField:
    config = replace(config or SolverConfig(), method="asr-endpoint")
    return solve(field, grid, config)


def solution_errors(sol: SolutionField, field: DriftField) -> dict:
    """Sup and RMS errors of U and grad U over the accepted points,
    against the field's exact solution."""
    if not field.has_exact:
        return {}
    idx = sol.accept_order
    n = sol.grid.n
    h = sol.grid.h
    ix = idx // n
    iy = idx % n
    x = sol.grid.x0 + ix * h
    y = sol.grid.y0 + iy * h
    jet = field.exact_jet
    ue = np.empty(len(idx))
    gxe = np.empty(len(idx))
    gye = np.empty(len(idx))
    for m in range(len(idx)):
        j = jet((x[m], y[m]))
        ue[m] = j.u
        gxe[m] = j.g[0]
        gye[m] = j.g[1]
    du = np.abs(sol.u[idx] - ue)
    dg2 = (sol.gx[idx] - gxe) ** 2 + (sol.gy[idx] - gye) ** 2
    return {
        "sup_u": float(du.max()),
        "rms_u": float(np.sqrt(np.mean(du ** 2))),
        "sup_grad": float(np.sqrt(dg2.max())),
        "rms_grad": float(np.sqrt(np.mean(dg2))),
        "n_accepted": int(len(idx)),
    }


def run_summary(sol: SolutionField, field: DriftField,
                config: SolverConfig) -> dict:
    """JSON-ready record of one solve."""
    summary = {
        "method": sol.method,
        "field": field.name,
        "field_params": {k: float(v) for k, v in
                         (("a", getattr(field, "a", None)),
                          ("beta", getattr(field, "beta", None))) if v is not None},
        "n": sol.grid.n,
        "h": sol.grid.h,
        "domain": [sol.grid.x0, sol.grid.x1, sol.grid.y0, sol.grid.y1],
        "stop": config.stop,
        "n_accepted": sol.n_accepted,
        "runtime_sec": sol.runtime,
        "counters": sol.counters,
    }
    errs = solution_errors(sol, field)
    if errs:
        summary["errors"] = errs
    return summary
