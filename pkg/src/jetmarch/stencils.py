"""Angle-binned update neighborhoods for the marching solvers.

The slowness |b| - b.v/|v| vanishes along the drift, so updates can
travel far in the drift direction and the update neighborhood of a
point must be elongated that way.  Since the geometry depends only on
the drift angle, stencils are precomputed once per angle bin and shared
by all mesh points (translation invariance of the mesh).

Two constructions are provided:

* dense oblong stencils for the jet marchers: the 8-neighborhood plus
  integer-snapped samples along rays fanning out from the drift
  direction at angles +-pi/2^k, which satisfy the causal acuteness
  bound with equality before snapping;
* adaptively refined stencils for the first-order baseline, built by
  mediant subdivision of the 4-point diamond until every adjacent leg
  pair is acute for the relaxed anisotropic norm
  F_alpha(v) = |b||v| - alpha b.v.

Bins are keyed by the negated polar angle of the drift, and a bin's
stencil is oriented along the drift direction of the points that map
to it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class StencilError(RuntimeError):
    pass


class DegenerateDriftError(ValueError):
    """Zero drift away from the attractor; no update direction exists."""


def _unit(v, tol=1e-9):
    v = np.asarray(v, dtype=float)
    n = math.hypot(v[0], v[1])
    if n == 0.0:
        raise ValueError("zero vector")
    if abs(n - 1.0) > tol:
        raise ValueError(f"expected a unit vector, got norm {n}")
    return v / n


def acute(u, v, b_hat) -> bool:
    """Causal acuteness of adjacent legs u, v pointing from the updated
    point toward its candidate parents: u.v >= max(-u.b, -v.b, 0)."""
    u = _unit(u)
    v = _unit(v)
    b_hat = _unit(b_hat)
    uv = float(u @ v)
    return uv >= max(-float(u @ b_hat), -float(v @ b_hat), 0.0) - 1e-14


def asr_acute(u, v, b_hat, alpha: float) -> bool:
    """Acuteness for the relaxed norm F_alpha, in the same leg
    convention as acute(): u.v >= alpha * max(-u.b, -v.b).  b_hat=None
    means the isotropic limit (plain Euclidean right angles)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    nu = math.hypot(u[0], u[1])
    nv = math.hypot(v[0], v[1])
    uv = float(u @ v) / (nu * nv)
    if b_hat is None:
        return uv >= -1e-14
    ub = float(u @ b_hat) / nu
    vb = float(v @ b_hat) / nv
    return uv >= alpha * max(-ub, -vb) - 1e-14


def ray_samples(theta: float, k_cutoff: int, d_gap: int):
    """Ideal ray sample points of the oblong construction, with their
    nearest-integer snaps.  Yields (k, n, sign, ideal, snapped)."""
    for k in range(2, k_cutoff + 1):
        for sign in (1.0, -1.0):
            ang = theta + sign * math.pi / 2 ** k
            ca, sa = math.cos(ang), math.sin(ang)
            for n in range(1, k):
                px, py = n * d_gap * ca, n * d_gap * sa
                yield k, n, sign, (px, py), (round(px), round(py))


_NEIGHBORS8 = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]


def build_reversed_stencil(theta: float, k_cutoff: int = 4, d_gap: int = 3) -> np.ndarray:
    """Integer offsets of the dense oblong stencil oriented along theta:
    the 8-neighborhood plus snapped ray samples at theta +- pi/2^k,
    k = 2..k_cutoff, n = 1..k-1 points per ray.  First occurrence wins
    on snap collisions."""
    if k_cutoff < 2:
        raise ValueError("k_cutoff must be >= 2")
    if d_gap < 1:
        raise ValueError("d_gap must be >= 1")
    offsets = list(_NEIGHBORS8)
    seen = set(offsets)
    for _, _, _, _, snapped in ray_samples(theta, k_cutoff, d_gap):
        if snapped not in seen:
            seen.add(snapped)
            offsets.append(snapped)
    return np.array(offsets, dtype=np.int64)


def build_asr_stencil(theta: float, alpha: float = 0.9999,
                      max_refinements: int = 100_000) -> np.ndarray:
    """Adaptive stencil refinement for drift binned at key theta.

    Returns the rotationally ordered integer legs (pointing from the
    updated point toward stencil members), refined by mediant insertion
    until every adjacent pair is F_alpha-acute.  theta keys the negated
    drift angle, so the drift direction itself is (cos(-theta), sin(-theta))
    and refinement concentrates opposite it, where candidate parents of
    grazing characteristics sit.  Pass alpha in (0, 1).
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    b_hat = np.array([math.cos(-theta), math.sin(-theta)])
    return _asr_refine(b_hat, alpha, max_refinements)


def _asr_refine(b_hat, alpha, max_refinements) -> np.ndarray:
    legs = [np.array([1, 0])]
    work = [np.array([1, 0]), np.array([0, -1]), np.array([-1, 0]), np.array([0, 1])]
    steps = 0
    while work:
        u = legs[-1]
        v = work[-1]
        if asr_acute(u, v, b_hat, alpha):
            legs.append(work.pop())
        else:
            work.append(u + v)
            steps += 1
            if steps > max_refinements:
                raise StencilError(
                    f"stencil refinement did not terminate after {steps} "
                    f"insertions (alpha={alpha}, b_hat={b_hat}, "
                    f"deepest leg {u + v})")
    # the walk closes the loop on the starting leg; drop the duplicate
    if len(legs) > 1 and np.array_equal(legs[0], legs[-1]):
        legs.pop()
    return np.array(legs, dtype=np.int64)


def isotropic_asr_stencil() -> np.ndarray:
    """The b = 0 limit: right angles are acute, so the diamond survives."""
    legs = [np.array([1, 0])]
    work = [np.array([1, 0]), np.array([0, -1]), np.array([-1, 0]), np.array([0, 1])]
    while work:
        u, v = legs[-1], work[-1]
        if asr_acute(u, v, None, 0.5):
            legs.append(work.pop())
        else:
            work.append(u + v)
    if len(legs) > 1 and np.array_equal(legs[0], legs[-1]):
        legs.pop()
    return np.array(legs, dtype=np.int64)


def bin_key(b) -> float:
    """Bin lookup key: the negated polar angle of the drift, in [0, 2pi)."""
    bx, by = float(b[0]), float(b[1])
    if bx == 0.0 and by == 0.0:
        raise DegenerateDriftError("zero drift has no stencil bin")
    return (-math.atan2(by, bx)) % (2.0 * math.pi)


def bin_index(b, n_bins: int) -> int:
    """Half-open interval rule: key in (theta_k - pi/n, theta_k + pi/n]
    maps to bin k with theta_k = 2 pi k / n."""
    key = bin_key(b)
    w = math.pi / n_bins
    return int(math.ceil((key - w) / (2.0 * w))) % n_bins


@dataclass
class StencilBank:
    """Per-bin reversed stencils: offsets from a newly accepted point to
    the mesh points it may update."""

    n_bins: int
    offsets: np.ndarray       # (total, 2) concatenated per bin
    starts: np.ndarray        # (n_bins + 1,) slice bounds into offsets
    thetas: np.ndarray        # (n_bins,) bin key angles
    k_cutoff: int = 4
    d_gap: int = 3

    def stencil(self, k: int) -> np.ndarray:
        return self.offsets[self.starts[k]:self.starts[k + 1]]

    def lookup(self, b) -> np.ndarray:
        return self.stencil(bin_index(b, self.n_bins))

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("bin,theta,di,dj\n")
            for k in range(self.n_bins):
                for di, dj in self.stencil(k):
                    fh.write("%d,%.17g,%d,%d\n" % (k, self.thetas[k], di, dj))


def build_bank(n_bins: int = 64, k_cutoff: int = 4, d_gap: int = 3) -> StencilBank:
    """Dense oblong stencils for every bin.  Bin k is keyed by negated
    drift angle theta_k = 2 pi k / n_bins, so its rays are laid along
    the actual drift direction -theta_k."""
    chunks = []
    starts = np.zeros(n_bins + 1, dtype=np.int64)
    thetas = np.zeros(n_bins)
    for k in range(n_bins):
        theta_k = 2.0 * math.pi * k / n_bins
        thetas[k] = theta_k
        chunk = build_reversed_stencil(-theta_k, k_cutoff, d_gap)
        chunks.append(chunk)
        starts[k + 1] = starts[k] + len(chunk)
    return StencilBank(n_bins, np.concatenate(chunks), starts, thetas,
                       k_cutoff, d_gap)


def build_asr_bank(n_bins: int = 64, alpha: float = 0.9999) -> StencilBank:
    """Refined baseline stencils per bin; offsets are rotationally
    ordered legs, which the baseline solver also uses to pick adjacent
    triangle partners."""
    chunks = []
    starts = np.zeros(n_bins + 1, dtype=np.int64)
    thetas = np.zeros(n_bins)
    for k in range(n_bins):
        theta_k = 2.0 * math.pi * k / n_bins
        thetas[k] = theta_k
        chunk = build_asr_stencil(theta_k, alpha)
        chunks.append(chunk)
        starts[k + 1] = starts[k] + len(chunk)
    return StencilBank(n_bins, np.concatenate(chunks), starts, thetas)


def jm_disk_offsets(radius: int) -> np.ndarray:
    """Dense disk neighborhood of the plain jet marcher, radius in mesh
    steps; includes everything within Euclidean distance radius."""
    if radius < 2:
        raise ValueError("disk radius must be >= 2")
    out = []
    for di in range(-radius, radius + 1):
        for dj in range(-radius, radius + 1):
            if di == 0 and dj == 0:
                continue
            if di * di + dj * dj <= radius * radius:
                out.append((di, dj))
    return np.array(out, dtype=np.int64)
