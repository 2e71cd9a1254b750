"""Local update minimizations for the jet marchers.

A candidate characteristic segment into a target point y is modeled as
a cubic graph over its chord: in the frame (e_y, e_w) anchored at the
base point, with e_y the unit chord direction and e_w its 90-degree
counter-clockwise rotation, the path is (r, q(r)) for r in [0, h] where
q interpolates entry slope a0 = tan(alpha) and exit slope a1 = tan(beta)
with q(0) = q(h) = 0.

The geometric action along the path is approximated by Simpson's rule,
giving a smooth objective in (a0, a1) for single-parent updates and in
(a0, a1, lambda) for triangle updates, where the base slides along the
segment between two accepted parents and the value there is a cubic
Hermite interpolant of the carried jets.  First and second derivatives
of the objectives are assembled analytically node by node with the
chain rule, and a damped Newton iteration with backtracking minimizes
them.  Everything here is pure and compiled; the Python entry points
are thin wrappers used by tests and post-processing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numba import njit

from .fields import DriftField, Jet, b_eval, field_eval2

NEWTON_TOL = 1e-12
NEWTON_MAXITER = 30
SLOPE_CAP = 10.0
MAX_HALVINGS = 20

CONVERGED = 0
LEFT_DOMAIN = 1
FAILED = 2

_STATUS_NAMES = {CONVERGED: "converged", LEFT_DOMAIN: "left-domain", FAILED: "failed"}


class SingularDriftError(ArithmeticError):
    """The drift vanished at a quadrature node; derivative terms divide
    by its norm."""


@dataclass(frozen=True)
class HermiteData:
    """Endpoint values and directional derivatives of U along a segment
    from x to z: du0 = (z-x).gradU(x), du1 = (z-x).gradU(z)."""
    u0: float
    u1: float
    du0: float
    du1: float


@dataclass(frozen=True)
class LocalFrame:
    """Chord frame of one update: base, target, unit chord e_y, its CCW
    rotation e_w, and the chord length h."""
    base: np.ndarray
    target: np.ndarray
    e_y: np.ndarray
    e_w: np.ndarray
    h: float

    @classmethod
    def from_points(cls, base, target) -> "LocalFrame":
        base = np.asarray(base, dtype=float)
        target = np.asarray(target, dtype=float)
        d = target - base
        h = math.hypot(d[0], d[1])
        if h <= 0.0:
            raise ValueError("base and target coincide")
        e_y = d / h
        e_w = np.array([-e_y[1], e_y[0]])
        return cls(base, target, e_y, e_w, h)


@njit(cache=True)
def _hermite(u0, u1, du0, du1, lam):
    """Cubic Hermite interpolant with basis p0(t)=1-3t^2+2t^3 and
    p1(t)=t(1-t)^2; returns (p, p', p'')."""
    om = 1.0 - lam
    p0a = 1.0 - 3.0 * lam * lam + 2.0 * lam ** 3
    p0b = 1.0 - 3.0 * om * om + 2.0 * om ** 3
    p1a = lam * om * om
    p1b = om * lam * lam
    p = u0 * p0a + u1 * p0b + du0 * p1a - du1 * p1b
    dp = (u0 * (-6.0 * lam + 6.0 * lam * lam)
          + u1 * (6.0 * om - 6.0 * om * om)
          + du0 * (om * (1.0 - 3.0 * lam))
          - du1 * (lam * (2.0 - 3.0 * lam)))
    ddp = (u0 * (-6.0 + 12.0 * lam)
           + u1 * (-6.0 + 12.0 * om)
           + du0 * (-4.0 + 6.0 * lam)
           - du1 * (2.0 - 6.0 * lam))
    return p, dp, ddp


def hermite_eval(data: HermiteData, lam: float) -> tuple[float, float, float]:
    return _hermite(data.u0, data.u1, data.du0, data.du1, float(lam))


def cubic_path(frame: LocalFrame, a0: float, a1: float, r: float):
    """Point and (non-unit) tangent of the cubic path at chord coordinate r."""
    h = frame.h
    q = a0 * r - (a0 / h) * r * r + ((a0 + a1) / h ** 2) * r * r * (r - h)
    qp = a0 - 2.0 * a0 * r / h + ((a0 + a1) / h ** 2) * (3.0 * r * r - 2.0 * h * r)
    point = frame.base + r * frame.e_y + q * frame.e_w
    tangent = frame.e_y + qp * frame.e_w
    return point, tangent


@njit(cache=True)
def eval_G(kind, par, xx, xy, zx, zy, yx, yy, u0, u1, du0, du1, a0, a1, lam):
    """Triangle-update objective: value, gradient, packed Hessian.

    Returns (val, g0, g1, gl, h00, h01, h0l, h11, h1l, hll, err) with
    err = 1 for a degenerate chord and err = 2 for vanishing drift at a
    quadrature node.
    """
    dx = zx - xx
    dy = zy - xy
    p0x = xx + lam * dx
    p0y = xy + lam * dy
    vx = yx - p0x
    vy = yy - p0y
    hl = math.sqrt(vx * vx + vy * vy)
    if hl < 1e-14:
        return (np.inf, 0., 0., 0., 0., 0., 0., 0., 0., 0., 1)
    wx = -vy
    wy = vx
    c = (a0 - a1) / 8.0
    pmx = 0.5 * (p0x + yx) + c * wx
    pmy = 0.5 * (p0y + yy) + c * wy
    t0 = a0
    tm = -0.25 * (a0 + a1)
    t1 = a1
    rdx = -dy
    rdy = dx
    qlx = 0.5 * dx - c * rdx
    qly = 0.5 * dy - c * rdy
    pval, pd, pdd = _hermite(u0, u1, du0, du1, lam)
    vd = vx * dx + vy * dy
    hlp = -vd / hl
    hlpp = (dx * dx + dy * dy - hlp * hlp) / hl

    S = 0.0
    dS = np.zeros(3)
    d2S = np.zeros((3, 3))
    Vx = 0.0
    Vy = 0.0
    dVx = np.zeros(3)
    dVy = np.zeros(3)
    d2Vx = np.zeros((3, 3))
    d2Vy = np.zeros((3, 3))
    np_ = np.zeros(3)
    sp_ = np.zeros(3)
    dbx = np.zeros(3)
    dby = np.zeros(3)

    for node in range(3):
        if node == 0:
            px_, py_, t, wgt = p0x, p0y, t0, 1.0
            dpx0, dpx1, dpx2 = 0.0, 0.0, dx
            dpy0, dpy1, dpy2 = 0.0, 0.0, dy
            dt0, dt1, dt2 = 1.0, 0.0, 0.0
        elif node == 1:
            px_, py_, t, wgt = pmx, pmy, tm, 4.0
            dpx0, dpx1, dpx2 = wx / 8.0, -wx / 8.0, qlx
            dpy0, dpy1, dpy2 = wy / 8.0, -wy / 8.0, qly
            dt0, dt1, dt2 = -0.25, -0.25, 0.0
        else:
            px_, py_, t, wgt = yx, yy, t1, 1.0
            dpx0, dpx1, dpx2 = 0.0, 0.0, 0.0
            dpy0, dpy1, dpy2 = 0.0, 0.0, 0.0
            dt0, dt1, dt2 = 0.0, 1.0, 0.0
        dpx = (dpx0, dpx1, dpx2)
        dpy = (dpy0, dpy1, dpy2)
        dt = (dt0, dt1, dt2)
        moving = node != 2
        (b1, b2, b11, b12, b21, b22,
         h1xx, h1xy, h1yy, h2xx, h2xy, h2yy) = field_eval2(kind, par, px_, py_)
        n = math.sqrt(b1 * b1 + b2 * b2)
        if n < 1e-13:
            # fixed nodes contribute no 1/|b| terms; an equilibrium
            # target (e.g. a saddle) is a legal update destination
            if moving:
                return (np.inf, 0., 0., 0., 0., 0., 0., 0., 0., 0., 2)
        s = math.sqrt(1.0 + t * t)
        S += wgt * n * s
        Vx += wgt * (b1 + t * b2)
        Vy += wgt * (-t * b1 + b2)
        for q in range(3):
            gx = b11 * dpx[q] + b12 * dpy[q]
            gy = b21 * dpx[q] + b22 * dpy[q]
            dbx[q] = gx
            dby[q] = gy
            np_[q] = (b1 * gx + b2 * gy) / n if moving else 0.0
            sp_[q] = (t / s) * dt[q]
            dS[q] += wgt * (np_[q] * s + n * sp_[q])
            dVx[q] += wgt * (dt[q] * b2 + gx + t * gy)
            dVy[q] += wgt * (-dt[q] * b1 - t * gx + gy)
        for q in range(3):
            for r in range(q, 3):
                ppx = 0.0
                ppy = 0.0
                if node == 1:
                    # midpoint position has the only nonzero mixed
                    # slope/base second derivatives
                    if q == 0 and r == 2:
                        ppx = -rdx / 8.0
                        ppy = -rdy / 8.0
                    elif q == 1 and r == 2:
                        ppx = rdx / 8.0
                        ppy = rdy / 8.0
                c1 = (h1xx * dpx[q] * dpx[r]
                      + h1xy * (dpx[q] * dpy[r] + dpy[q] * dpx[r])
                      + h1yy * dpy[q] * dpy[r])
                c2 = (h2xx * dpx[q] * dpx[r]
                      + h2xy * (dpx[q] * dpy[r] + dpy[q] * dpx[r])
                      + h2yy * dpy[q] * dpy[r])
                gppx = b11 * ppx + b12 * ppy
                gppy = b21 * ppx + b22 * ppy
                if moving:
                    npp = ((dbx[q] * dbx[r] + dby[q] * dby[r]
                            + b1 * (c1 + gppx) + b2 * (c2 + gppy)) / n
                           - np_[q] * np_[r] / n)
                else:
                    npp = 0.0
                spp = dt[q] * dt[r] / (s * s * s)
                d2S[q, r] += wgt * (npp * s + np_[q] * sp_[r]
                                    + np_[r] * sp_[q] + n * spp)
                d2Vx[q, r] += wgt * (dt[q] * dby[r] + dt[r] * dby[q]
                                     + (c1 + gppx) + t * (c2 + gppy))
                d2Vy[q, r] += wgt * (-dt[q] * dbx[r] - dt[r] * dbx[q]
                                     - t * (c1 + gppx) + (c2 + gppy))

    val = pval + (hl / 6.0) * S - (vx * Vx + vy * Vy) / 6.0
    hlq = (0.0, 0.0, hlp)
    vqx = (0.0, 0.0, -dx)
    vqy = (0.0, 0.0, -dy)
    g = np.zeros(3)
    for q in range(3):
        g[q] = ((hlq[q] / 6.0) * S + (hl / 6.0) * dS[q]
                - (vqx[q] * Vx + vqy[q] * Vy + vx * dVx[q] + vy * dVy[q]) / 6.0)
    g[2] += pd
    H = np.zeros((3, 3))
    for q in range(3):
        for r in range(q, 3):
            hpp = hlpp if (q == 2 and r == 2) else 0.0
            H[q, r] = ((hpp / 6.0) * S + (hlq[q] / 6.0) * dS[r]
                       + (hlq[r] / 6.0) * dS[q] + (hl / 6.0) * d2S[q, r]
                       - (vqx[q] * dVx[r] + vqy[q] * dVy[r]
                          + vqx[r] * dVx[q] + vqy[r] * dVy[q]
                          + vx * d2Vx[q, r] + vy * d2Vy[q, r]) / 6.0)
    H[2, 2] += pdd
    return (val, g[0], g[1], g[2],
            H[0, 0], H[0, 1], H[0, 2], H[1, 1], H[1, 2], H[2, 2], 0)


@njit(cache=True)
def eval_G1(kind, par, xx, xy, yx, yy, ux, a0, a1):
    """Single-parent objective with frozen base x and additive constant
    U(x).  Returns (val, g0, g1, h00, h01, h11, err)."""
    vx = yx - xx
    vy = yy - xy
    h = math.sqrt(vx * vx + vy * vy)
    if h < 1e-14:
        return (np.inf, 0., 0., 0., 0., 0., 1)
    wx = -vy
    wy = vx
    c = (a0 - a1) / 8.0
    pmx = 0.5 * (xx + yx) + c * wx
    pmy = 0.5 * (xy + yy) + c * wy
    t0 = a0
    tm = -0.25 * (a0 + a1)
    t1 = a1

    S = 0.0
    dS = np.zeros(2)
    d2S = np.zeros((2, 2))
    Vx = 0.0
    Vy = 0.0
    dVx = np.zeros(2)
    dVy = np.zeros(2)
    d2Vx = np.zeros((2, 2))
    d2Vy = np.zeros((2, 2))
    np_ = np.zeros(2)
    sp_ = np.zeros(2)
    dbx = np.zeros(2)
    dby = np.zeros(2)

    for node in range(3):
        if node == 0:
            px_, py_, t, wgt = xx, xy, t0, 1.0
            dpx = (0.0, 0.0)
            dpy = (0.0, 0.0)
            dt = (1.0, 0.0)
        elif node == 1:
            px_, py_, t, wgt = pmx, pmy, tm, 4.0
            dpx = (wx / 8.0, -wx / 8.0)
            dpy = (wy / 8.0, -wy / 8.0)
            dt = (-0.25, -0.25)
        else:
            px_, py_, t, wgt = yx, yy, t1, 1.0
            dpx = (0.0, 0.0)
            dpy = (0.0, 0.0)
            dt = (0.0, 1.0)
        moving = node == 1
        (b1, b2, b11, b12, b21, b22,
         h1xx, h1xy, h1yy, h2xx, h2xy, h2yy) = field_eval2(kind, par, px_, py_)
        n = math.sqrt(b1 * b1 + b2 * b2)
        if n < 1e-13 and moving:
            return (np.inf, 0., 0., 0., 0., 0., 2)
        s = math.sqrt(1.0 + t * t)
        S += wgt * n * s
        Vx += wgt * (b1 + t * b2)
        Vy += wgt * (-t * b1 + b2)
        for q in range(2):
            gx = b11 * dpx[q] + b12 * dpy[q]
            gy = b21 * dpx[q] + b22 * dpy[q]
            dbx[q] = gx
            dby[q] = gy
            np_[q] = (b1 * gx + b2 * gy) / n if moving else 0.0
            sp_[q] = (t / s) * dt[q]
            dS[q] += wgt * (np_[q] * s + n * sp_[q])
            dVx[q] += wgt * (dt[q] * b2 + gx + t * gy)
            dVy[q] += wgt * (-dt[q] * b1 - t * gx + gy)
        for q in range(2):
            for r in range(q, 2):
                c1 = (h1xx * dpx[q] * dpx[r]
                      + h1xy * (dpx[q] * dpy[r] + dpy[q] * dpx[r])
                      + h1yy * dpy[q] * dpy[r])
                c2 = (h2xx * dpx[q] * dpx[r]
                      + h2xy * (dpx[q] * dpy[r] + dpy[q] * dpx[r])
                      + h2yy * dpy[q] * dpy[r])
                if moving:
                    npp = ((dbx[q] * dbx[r] + dby[q] * dby[r]
                            + b1 * c1 + b2 * c2) / n
                           - np_[q] * np_[r] / n)
                else:
                    npp = 0.0
                spp = dt[q] * dt[r] / (s * s * s)
                d2S[q, r] += wgt * (npp * s + np_[q] * sp_[r]
                                    + np_[r] * sp_[q] + n * spp)
                d2Vx[q, r] += wgt * (dt[q] * dby[r] + dt[r] * dby[q]
                                     + c1 + t * c2)
                d2Vy[q, r] += wgt * (-dt[q] * dbx[r] - dt[r] * dbx[q]
                                     - t * c1 + c2)

    val = ux + (h / 6.0) * S - (vx * Vx + vy * Vy) / 6.0
    g0 = (h / 6.0) * dS[0] - (vx * dVx[0] + vy * dVy[0]) / 6.0
    g1 = (h / 6.0) * dS[1] - (vx * dVx[1] + vy * dVy[1]) / 6.0
    h00 = (h / 6.0) * d2S[0, 0] - (vx * d2Vx[0, 0] + vy * d2Vy[0, 0]) / 6.0
    h01 = (h / 6.0) * d2S[0, 1] - (vx * d2Vx[0, 1] + vy * d2Vy[0, 1]) / 6.0
    h11 = (h / 6.0) * d2S[1, 1] - (vx * d2Vx[1, 1] + vy * d2Vy[1, 1]) / 6.0
    return (val, g0, g1, h00, h01, h11, 0)


@njit(cache=True)
def action_simpson(kind, par, bx, by, yx, yy, a0, a1, nnodes):
    """Composite Simpson quadrature of the geometric action along the
    cubic path from (bx, by) to (yx, yy); nnodes must be odd >= 3."""
    hx = yx - bx
    hy = yy - by
    h = math.sqrt(hx * hx + hy * hy)
    ex = hx / h
    ey = hy / h
    wx = -ey
    wy = ex
    dr = h / (nnodes - 1)
    total = 0.0
    for i in range(nnodes):
        r = i * dr
        q = a0 * r - (a0 / h) * r * r + ((a0 + a1) / (h * h)) * r * r * (r - h)
        qp = a0 - 2.0 * a0 * r / h + ((a0 + a1) / (h * h)) * (3.0 * r * r - 2.0 * h * r)
        px = bx + r * ex + q * wx
        py = by + r * ey + q * wy
        b1, b2 = b_eval(kind, par, px, py)
        integrand = (math.sqrt(b1 * b1 + b2 * b2) * math.sqrt(1.0 + qp * qp)
                     - (b1 * (ex + qp * wx) + b2 * (ey + qp * wy)))
        if i == 0 or i == nnodes - 1:
            w = 1.0
        elif i % 2 == 1:
            w = 4.0
        else:
            w = 2.0
        total += w * integrand
    return total * dr / 3.0


@njit(cache=True)
def simpson_node_count(h_lam, h):
    """Smallest odd node count greater than 1 + h_lam/h, at least 3."""
    m = int(math.floor(1.0 + h_lam / h)) + 1
    if m % 2 == 0:
        m += 1
    if m < 3:
        m = 3
    return m


@njit(cache=True)
def _solve_damped_2(h00, h01, h11, g0, g1):
    """Solve (H + mu I) d = -g, escalating mu until positive definite."""
    mu = 0.0
    for _ in range(80):
        a = h00 + mu
        c = h11 + mu
        det = a * c - h01 * h01
        if a > 0.0 and det > 0.0:
            d0 = (-g0 * c + g1 * h01) / det
            d1 = (-g1 * a + g0 * h01) / det
            if math.isfinite(d0) and math.isfinite(d1):
                return d0, d1
        mu = 1e-8 if mu == 0.0 else 2.0 * mu
    return np.nan, np.nan


@njit(cache=True)
def _solve_damped_3(H, g):
    mu = 0.0
    d = np.zeros(3)
    for _ in range(80):
        a11 = H[0] + mu
        a12 = H[1]
        a13 = H[2]
        a22 = H[3] + mu
        a23 = H[4]
        a33 = H[5] + mu
        # Cholesky; bail out to a larger mu on any non-positive pivot
        if a11 > 0.0:
            l11 = math.sqrt(a11)
            l21 = a12 / l11
            l31 = a13 / l11
            t22 = a22 - l21 * l21
            if t22 > 0.0:
                l22 = math.sqrt(t22)
                l32 = (a23 - l31 * l21) / l22
                t33 = a33 - l31 * l31 - l32 * l32
                if t33 > 0.0:
                    l33 = math.sqrt(t33)
                    y1 = -g[0] / l11
                    y2 = (-g[1] - l21 * y1) / l22
                    y3 = (-g[2] - l31 * y1 - l32 * y2) / l33
                    d[2] = y3 / l33
                    d[1] = (y2 - l32 * d[2]) / l22
                    d[0] = (y1 - l21 * d[1] - l31 * d[2]) / l11
                    if math.isfinite(d[0]) and math.isfinite(d[1]) and math.isfinite(d[2]):
                        return d, True
        mu = 1e-8 if mu == 0.0 else 2.0 * mu
    return d, False


@njit(cache=True)
def newton_onepoint(kind, par, xx, xy, yx, yy, ux):
    """Minimize the single-parent objective over (a0, a1) from (0, 0).

    Returns (status, a0, a1, value)."""
    a0 = 0.0
    a1 = 0.0
    r = eval_G1(kind, par, xx, xy, yx, yy, ux, a0, a1)
    if r[6] != 0 or not math.isfinite(r[0]):
        return FAILED, 0.0, 0.0, np.inf
    val = r[0]
    for _ in range(NEWTON_MAXITER):
        g0, g1 = r[1], r[2]
        if abs(g0) < 1e-14 and abs(g1) < 1e-14:
            return CONVERGED, a0, a1, val
        d0, d1 = _solve_damped_2(r[3], r[4], r[5], g0, g1)
        if not (math.isfinite(d0) and math.isfinite(d1)):
            return FAILED, a0, a1, val
        t = 1.0
        accepted = False
        na0 = a0
        na1 = a1
        nval = val
        rn = r
        for _ in range(MAX_HALVINGS):
            ca0 = a0 + t * d0
            ca1 = a1 + t * d1
            rc = eval_G1(kind, par, xx, xy, yx, yy, ux, ca0, ca1)
            if rc[6] == 0 and math.isfinite(rc[0]) and rc[0] < val + 1e-15 * (1.0 + abs(val)):
                na0, na1, nval, rn = ca0, ca1, rc[0], rc
                accepted = True
                break
            t *= 0.5
        step = t * math.sqrt(d0 * d0 + d1 * d1)
        if not accepted:
            if step < 1e-9:
                return CONVERGED, a0, a1, val
            return FAILED, a0, a1, val
        a0, a1, val, r = na0, na1, nval, rn
        if abs(a0) > SLOPE_CAP or abs(a1) > SLOPE_CAP:
            return FAILED, a0, a1, val
        if step < NEWTON_TOL:
            return CONVERGED, a0, a1, val
    return FAILED, a0, a1, val


@njit(cache=True)
def newton_triangle(kind, par, xx, xy, zx, zy, yx, yy, u0, u1, du0, du1):
    """Minimize the triangle objective over (a0, a1, lambda) from
    (0, 0, 1/2); aborts as soon as the working lambda leaves [0, 1].

    Returns (status, a0, a1, lam, value)."""
    a0 = 0.0
    a1 = 0.0
    lam = 0.5
    r = eval_G(kind, par, xx, xy, zx, zy, yx, yy, u0, u1, du0, du1, a0, a1, lam)
    if r[10] != 0 or not math.isfinite(r[0]):
        return FAILED, a0, a1, lam, np.inf
    val = r[0]
    H = np.zeros(6)
    g = np.zeros(3)
    for _ in range(NEWTON_MAXITER):
        g[0] = r[1]
        g[1] = r[2]
        g[2] = r[3]
        if abs(g[0]) < 1e-14 and abs(g[1]) < 1e-14 and abs(g[2]) < 1e-14:
            return CONVERGED, a0, a1, lam, val
        H[0] = r[4]
        H[1] = r[5]
        H[2] = r[6]
        H[3] = r[7]
        H[4] = r[8]
        H[5] = r[9]
        d, ok = _solve_damped_3(H, g)
        if not ok:
            return FAILED, a0, a1, lam, val
        t = 1.0
        accepted = False
        na0 = a0
        na1 = a1
        nlam = lam
        nval = val
        rn = r
        for _ in range(MAX_HALVINGS):
            ca0 = a0 + t * d[0]
            ca1 = a1 + t * d[1]
            clam = lam + t * d[2]
            rc = eval_G(kind, par, xx, xy, zx, zy, yx, yy,
                        u0, u1, du0, du1, ca0, ca1, clam)
            if rc[10] == 0 and math.isfinite(rc[0]) and rc[0] < val + 1e-15 * (1.0 + abs(val)):
                na0, na1, nlam, nval, rn = ca0, ca1, clam, rc[0], rc
                accepted = True
                break
            t *= 0.5
        step = t * math.sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2])
        if not accepted:
            if step < 1e-9:
                return CONVERGED, a0, a1, lam, val
            return FAILED, a0, a1, lam, val
        a0, a1, lam, val, r = na0, na1, nlam, nval, rn
        if lam < 0.0 or lam > 1.0:
            return LEFT_DOMAIN, a0, a1, lam, val
        if abs(a0) > SLOPE_CAP or abs(a1) > SLOPE_CAP:
            return FAILED, a0, a1, lam, val
        if step < NEWTON_TOL:
            return CONVERGED, a0, a1, lam, val
    return FAILED, a0, a1, lam, val


@njit(cache=True)
def exit_gradient(kind, par, yx, yy, ex, ey, wxc, wyc, a1):
    """Gradient proposal |b(y)| t - b(y) with t the unit exit tangent."""
    b1, b2 = b_eval(kind, par, yx, yy)
    nb = math.sqrt(b1 * b1 + b2 * b2)
    s = math.sqrt(1.0 + a1 * a1)
    tx = (ex + a1 * wxc) / s
    ty = (ey + a1 * wyc) / s
    return nb * tx - b1, nb * ty - b2


# ---------------------------------------------------------------------------
# Python-facing wrappers
# ---------------------------------------------------------------------------

@dataclass
class MinimizeResult:
    status: str
    params: tuple
    value: float

    @property
    def converged(self) -> bool:
        return self.status == "converged"


def objective_G(field: DriftField, x, z, y, jet_x: Jet, jet_z: Jet,
                a0: float, a1: float, lam: float):
    """Triangle objective value, gradient (3,), Hessian (3, 3)."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    delta = z - x
    r = eval_G(field.kind, field.params, x[0], x[1], z[0], z[1], y[0], y[1],
               jet_x.u, jet_z.u, float(delta @ jet_x.g), float(delta @ jet_z.g),
               float(a0), float(a1), float(lam))
    if r[10] == 2:
        raise SingularDriftError("drift vanished at a quadrature node")
    grad = np.array([r[1], r[2], r[3]])
    hess = np.array([[r[4], r[5], r[6]], [r[5], r[7], r[8]], [r[6], r[8], r[9]]])
    return r[0], grad, hess


def objective_G1(field: DriftField, x, y, u_x: float, a0: float, a1: float):
    """Single-parent objective value, gradient (2,), Hessian (2, 2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    r = eval_G1(field.kind, field.params, x[0], x[1], y[0], y[1],
                float(u_x), float(a0), float(a1))
    if r[6] == 2:
        raise SingularDriftError("drift vanished at a quadrature node")
    grad = np.array([r[1], r[2]])
    hess = np.array([[r[3], r[4]], [r[4], r[5]]])
    return r[0], grad, hess


def one_point_minimize(field: DriftField, x, y, u_x: float) -> MinimizeResult:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    status, a0, a1, val = newton_onepoint(field.kind, field.params,
                                          x[0], x[1], y[0], y[1], float(u_x))
    return MinimizeResult(_STATUS_NAMES[status], (a0, a1), val)


def triangle_minimize(field: DriftField, x, z, y,
                      jet_x: Jet, jet_z: Jet) -> MinimizeResult:
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    y = np.asarray(y, dtype=float)
    delta = z - x
    status, a0, a1, lam, val = newton_triangle(
        field.kind, field.params, x[0], x[1], z[0], z[1], y[0], y[1],
        jet_x.u, jet_z.u, float(delta @ jet_x.g), float(delta @ jet_z.g))
    return MinimizeResult(_STATUS_NAMES[status], (a0, a1, lam), val)


def refined_simpson_action(field: DriftField, base, target, a0: float,
                           a1: float, h_mesh: float) -> float:
    """Composite Simpson action along the fixed cubic, with the node
    count growing with the update length in mesh units."""
    base = np.asarray(base, dtype=float)
    target = np.asarray(target, dtype=float)
    h_lam = math.hypot(target[0] - base[0], target[1] - base[1])
    nn = simpson_node_count(h_lam, h_mesh)
    return float(action_simpson(field.kind, field.params, base[0], base[1],
                                target[0], target[1], float(a0), float(a1), nn))


def jet_from_exit_slope(field: DriftField, y, frame: LocalFrame, a1: float) -> np.ndarray:
    """Gradient at the target from the exit tangent of the minimizing path."""
    y = np.asarray(y, dtype=float)
    gx, gy = exit_gradient(field.kind, field.params, y[0], y[1],
                           frame.e_y[0], frame.e_y[1],
                           frame.e_w[0], frame.e_w[1], float(a1))
    return np.array([gx, gy])


def newton_minimize(objective: Callable, start, lam_index: Optional[int] = None,
                    tol: float = NEWTON_TOL, maxiter: int = NEWTON_MAXITER) -> MinimizeResult:
    """Generic damped Newton with the same policy as the compiled
    solvers: Hessian regularization by escalating mu, backtracking line
    search, and early exit when the coordinate lam_index leaves [0, 1].

    objective(params) must return (value, grad, hess).
    """
    p = np.asarray(start, dtype=float).copy()
    n = len(p)
    val, g, H = objective(p)
    if not np.isfinite(val):
        return MinimizeResult("failed", tuple(p), float(val))
    for _ in range(maxiter):
        if np.max(np.abs(g)) < 1e-14:
            return MinimizeResult("converged", tuple(p), float(val))
        mu = 0.0
        d = None
        for _ in range(80):
            try:
                c = np.linalg.cholesky(H + mu * np.eye(n))
                d = np.linalg.solve(c.T, np.linalg.solve(c, -g))
                break
            except np.linalg.LinAlgError:
                mu = 1e-8 if mu == 0.0 else 2.0 * mu
        if d is None or not np.all(np.isfinite(d)):
            return MinimizeResult("failed", tuple(p), float(val))
        t = 1.0
        accepted = False
        for _ in range(MAX_HALVINGS):
            cand = p + t * d
            cval, cg, cH = objective(cand)
            if np.isfinite(cval) and cval < val + 1e-15 * (1.0 + abs(val)):
                p, val, g, H = cand, cval, cg, cH
                accepted = True
                break
            t *= 0.5
        step = t * float(np.linalg.norm(d))
        if not accepted:
            if step < 1e-9:
                return MinimizeResult("converged", tuple(p), float(val))
            return MinimizeResult("failed", tuple(p), float(val))
        if lam_index is not None and not 0.0 <= p[lam_index] <= 1.0:
            return MinimizeResult("left-domain", tuple(p), float(val))
        if step < tol:
            return MinimizeResult("converged", tuple(p), float(val))
    return MinimizeResult("failed", tuple(p), float(val))
