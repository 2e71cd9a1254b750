"""Uniform square mesh, per-point marching records, and the indexed heap.

Points are addressed by a flat row-major index i = ix * n + iy, with
x = x0 + ix h and y = y0 + iy h.  The heap stores flat indices and keys
them by the tentative value array, with a position table so keys can be
updated in place.
"""
from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Iterator, Optional

import numpy as np
from numba import njit

from .fields import Jet

UNKNOWN = 0
CONSIDERED = 1
ACCEPTED = 2

KIND_NONE = 0
KIND_ONE_POINT = 1
KIND_TRIANGLE = 2
KIND_INIT = 3

_STATE_NAMES = {UNKNOWN: "unknown", CONSIDERED: "considered", ACCEPTED: "accepted"}
_KIND_NAMES = {KIND_NONE: "none", KIND_ONE_POINT: "one-point",
               KIND_TRIANGLE: "triangle", KIND_INIT: "init"}


@dataclass(frozen=True)
class GridSpec:
    """Square mesh on [x0, x1] x [y0, y1] with n points per side."""

    x0: float
    x1: float
    y0: float
    y1: float
    n: int
    attractor: tuple[float, float]

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("need at least 3 points per side")
        hx = (self.x1 - self.x0) / (self.n - 1)
        hy = (self.y1 - self.y0) / (self.n - 1)
        if hx <= 0:
            raise ValueError("degenerate domain")
        if abs(hx - hy) > 1e-12 * max(abs(hx), abs(hy)):
            raise ValueError("mesh spacing must match in x and y")
        ai, aj = self.index_of(self.attractor)
        ax, ay = self.point(ai * self.n + aj)
        if abs(ax - self.attractor[0]) > 1e-9 * hx or abs(ay - self.attractor[1]) > 1e-9 * hx:
            raise ValueError("attractor must lie on the mesh")

    @property
    def h(self) -> float:
        return (self.x1 - self.x0) / (self.n - 1)

    @property
    def size(self) -> int:
        return self.n * self.n

    def index_of(self, p) -> tuple[int, int]:
        ix = int(round((p[0] - self.x0) / self.h))
        iy = int(round((p[1] - self.y0) / self.h))
        return ix, iy

    def flat_index(self, ix: int, iy: int) -> int:
        return ix * self.n + iy

    def attractor_index(self) -> int:
        ix, iy = self.index_of(self.attractor)
        return self.flat_index(ix, iy)

    def point(self, i: int) -> tuple[float, float]:
        ix, iy = divmod(i, self.n)
        return self.x0 + ix * self.h, self.y0 + iy * self.h

    def xy_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        x = self.x0 + np.arange(self.n) * self.h
        y = self.y0 + np.arange(self.n) * self.h
        return x, y

    def is_boundary(self, i: int) -> bool:
        ix, iy = divmod(i, self.n)
        return ix == 0 or iy == 0 or ix == self.n - 1 or iy == self.n - 1


def neighbors8(spec: GridSpec, i: int) -> list[int]:
    """In-bounds subset of the 8 surrounding mesh points."""
    n = spec.n
    ix, iy = divmod(i, n)
    out = []
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di == 0 and dj == 0:
                continue
            jx, jy = ix + di, iy + dj
            if 0 <= jx < n and 0 <= jy < n:
                out.append(jx * n + jy)
    return out


def l1_ball(spec: GridSpec, i: int, k: int) -> list[int]:
    """In-bounds points at l1 grid distance exactly k, counter-clockwise
    from the +x axis."""
    if k < 1:
        raise ValueError("k must be >= 1")
    n = spec.n
    ix, iy = divmod(i, n)
    out = []
    for di, dj in _l1_ring_offsets(k):
        jx, jy = ix + di, iy + dj
        if 0 <= jx < n and 0 <= jy < n:
            out.append(jx * n + jy)
    return out


def _l1_ring_offsets(k: int) -> Iterator[tuple[int, int]]:
    for m in range(k):
        yield k - m, m
    for m in range(k):
        yield -m, k - m
    for m in range(k):
        yield -(k - m), -m
    for m in range(k):
        yield m, -(k - m)


# ---------------------------------------------------------------------------
# indexed binary min-heap over flat point indices, keys in a float array
# ---------------------------------------------------------------------------

@njit(cache=True)
def heap_less(keys, a, b):
    # tie-break on lower flat index for determinism
    ka = keys[a]
    kb = keys[b]
    return ka < kb or (ka == kb and a < b)


@njit(cache=True)
def heap_sift_up(heap, pos, keys, i):
    node = heap[i]
    while i > 0:
        parent = (i - 1) >> 1
        top = heap[parent]
        if heap_less(keys, node, top):
            heap[i] = top
            pos[top] = i
            i = parent
        else:
            break
    heap[i] = node
    pos[node] = i


@njit(cache=True)
def heap_sift_down(heap, pos, keys, size, i):
    node = heap[i]
    while True:
        child = 2 * i + 1
        if child >= size:
            break
        right = child + 1
        if right < size and heap_less(keys, heap[right], heap[child]):
            child = right
        if heap_less(keys, heap[child], node):
            heap[i] = heap[child]
            pos[heap[i]] = i
            i = child
        else:
            break
    heap[i] = node
    pos[node] = i


@njit(cache=True)
def heap_push(heap, pos, keys, size, idx):
    heap[size] = idx
    pos[idx] = size
    heap_sift_up(heap, pos, keys, size)
    return size + 1


@njit(cache=True)
def heap_pop(heap, pos, keys, size):
    top = heap[0]
    pos[top] = -1
    size -= 1
    if size > 0:
        heap[0] = heap[size]
        pos[heap[0]] = 0
        heap_sift_down(heap, pos, keys, size, 0)
    return top, size


@njit(cache=True)
def heap_update(heap, pos, keys, size, idx):
    """Restore heap order after keys[idx] changed (either direction)."""
    i = pos[idx]
    heap_sift_up(heap, pos, keys, i)
    heap_sift_down(heap, pos, keys, size, pos[idx])


class IndexedMinHeap:
    """Binary min-heap keyed by a tentative-value array with decrease-key.

    Thin wrapper over the compiled helpers the solver uses internally.
    """

    def __init__(self, capacity: int):
        self.keys = np.full(capacity, np.inf)
        self.heap = np.full(capacity, -1, dtype=np.int64)
        self.pos = np.full(capacity, -1, dtype=np.int64)
        self.size = 0

    def __len__(self) -> int:
        return self.size

    def push(self, idx: int, key: float) -> None:
        if self.pos[idx] != -1:
            raise ValueError(f"index {idx} already in heap")
        self.keys[idx] = key
        self.size = heap_push(self.heap, self.pos, self.keys, self.size, idx)

    def decrease_key(self, idx: int, key: float) -> None:
        if self.pos[idx] == -1:
            raise KeyError(f"index {idx} not in heap")
        if key > self.keys[idx]:
            raise ValueError("decrease_key with a larger key")
        self.keys[idx] = key
        heap_sift_up(self.heap, self.pos, self.keys, self.pos[idx])

    def extract_min(self) -> Optional[int]:
        if self.size == 0:
            return None
        top, self.size = heap_pop(self.heap, self.pos, self.keys, self.size)
        return top

    def peek_key(self, idx: int) -> float:
        return float(self.keys[idx])


@dataclass
class PointRecord:
    """Marching state of one mesh point, as recorded by a solve."""

    state: str
    jet: Jet
    best_one_point: float
    last_update: str
    parents: tuple[int, int]
    lam: float
    slopes: tuple[float, float]
    update_length: float
    order: int


@dataclass
class SolutionField:
    """Finalized solve output: jets, acceptance order, parent records."""

    grid: GridSpec
    u: np.ndarray            # (n*n,) quasipotential, +inf where not reached
    gx: np.ndarray
    gy: np.ndarray
    state: np.ndarray        # (n*n,) uint8
    last_kind: np.ndarray    # (n*n,) uint8
    best_one_point: np.ndarray
    parent1: np.ndarray      # flat index or -1
    parent2: np.ndarray
    lam: np.ndarray
    slope0: np.ndarray
    slope1: np.ndarray
    update_length: np.ndarray
    order_of: np.ndarray     # (n*n,) acceptance rank or -1
    accept_order: np.ndarray # (n_accepted,) flat indices in acceptance order
    failsafe_exhausted: np.ndarray
    counters: dict
    method: str
    runtime: float

    @property
    def n_accepted(self) -> int:
        return len(self.accept_order)

    def accepted_mask(self) -> np.ndarray:
        return self.state == ACCEPTED

    def record(self, i: int) -> PointRecord:
        return PointRecord(
            state=_STATE_NAMES[int(self.state[i])],
            jet=Jet(float(self.u[i]), np.array([self.gx[i], self.gy[i]])),
            best_one_point=float(self.best_one_point[i]),
            last_update=_KIND_NAMES[int(self.last_kind[i])],
            parents=(int(self.parent1[i]), int(self.parent2[i])),
            lam=float(self.lam[i]),
            slopes=(float(self.slope0[i]), float(self.slope1[i])),
            update_length=float(self.update_length[i]),
            order=int(self.order_of[i]),
        )

    def to_csv(self, path) -> None:
        """One row per mesh point:
        ix,iy,x,y,U,Ux,Uy,state,order,p1,p2,lambda,updlen"""
        n = self.grid.n
        h = self.grid.h
        with open(path, "w") as fh:
            fh.write("ix,iy,x,y,U,Ux,Uy,state,order,p1,p2,lambda,updlen\n")
            for i in range(self.grid.size):
                ix, iy = divmod(i, n)
                fh.write(
                    "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%d,%d,%.17g,%.17g\n"
                    % (ix, iy, self.grid.x0 + ix * h, self.grid.y0 + iy * h,
                       self.u[i], self.gx[i], self.gy[i], self.state[i],
                       self.order_of[i], self.parent1[i], self.parent2[i],
                       self.lam[i], self.update_length[i]))

    def u2d(self) -> np.ndarray:
        return self.u.reshape(self.grid.n, self.grid.n)

    def grad2d(self) -> tuple[np.ndarray, np.ndarray]:
        n = self.grid.n
        return self.gx.reshape(n, n), self.gy.reshape(n, n)
