"""Drift fields for 2D SDEs dX = b(X)dt + sqrt(eps) dW.

A field bundles the drift b, its Jacobian Db, and the symmetric second
derivative tensor D2b, all needed by the curved-path updates of the
marching solvers.  Built-in fields carry closed-form derivatives and,
where known, the exact quasipotential, which the benchmark harness uses
to measure errors.

The solver kernels are numba-compiled and dispatch on an integer field
kind, so built-in fields run at native speed.  User-defined fields with
plain Python callables are supported through an object-mode escape
hatch (slow, but exact same code path).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np
from numba import njit, objmode

# field kind codes used by the compiled kernels
KIND_ROTATIONAL = 0
KIND_MAIER_STEIN = 1
KIND_LINEAR = 2
KIND_CONSTANT = 3
KIND_CUSTOM = 9

# registry of Python-callable fields, keyed by handle stored in params[0]
_CUSTOM_FIELDS: dict[int, "CustomField"] = {}
_next_handle = [0]


def _register_custom(f: "CustomField") -> int:
    _next_handle[0] += 1
    _CUSTOM_FIELDS[_next_handle[0]] = f
    return _next_handle[0]


def _custom_b(handle: int, px: float, py: float):
    v = _CUSTOM_FIELDS[handle].b(np.array([px, py]))
    return float(v[0]), float(v[1])


def _custom_derivs(handle: int, px: float, py: float):
    f = _CUSTOM_FIELDS[handle]
    p = np.array([px, py])
    j = f.db(p)
    h = f.d2b(p)
    return (float(j[0, 0]), float(j[0, 1]), float(j[1, 0]), float(j[1, 1]),
            float(h[0, 0, 0]), float(h[0, 0, 1]), float(h[0, 1, 1]),
            float(h[1, 0, 0]), float(h[1, 0, 1]), float(h[1, 1, 1]))


@njit(cache=True)
def b_eval(kind, par, px, py):
    """Drift vector at (px, py) for the given field kind."""
    if kind == KIND_ROTATIONAL:
        a = par[0]
        g = 4.0 * px + 3.0 * px * px
        return -0.5 * g - a * py, -py + 0.5 * a * g
    elif kind == KIND_MAIER_STEIN:
        beta = par[0]
        return px - px ** 3 - beta * px * py * py, -(1.0 + px * px) * py
    elif kind == KIND_LINEAR:
        ux = px - par[4]
        uy = py - par[5]
        return par[0] * ux + par[1] * uy, par[2] * ux + par[3] * uy
    elif kind == KIND_CONSTANT:
        return par[0], par[1]
    else:
        with objmode(bx="float64", by="float64"):
            bx, by = _custom_b(int(par[0]), px, py)
        return bx, by


@njit(cache=True)
def field_eval2(kind, par, px, py):
    """Drift, Jacobian, and second derivatives at one point.

    Returns (b1, b2, b11, b12, b21, b22,
             h1xx, h1xy, h1yy, h2xx, h2xy, h2yy)
    where bij = d b_i / d x_j and hi** are the second derivatives of b_i.
    """
    if kind == KIND_ROTATIONAL:
        a = par[0]
        g = 4.0 * px + 3.0 * px * px
        gp = 4.0 + 6.0 * px
        return (-0.5 * g - a * py, -py + 0.5 * a * g,
                -0.5 * gp, -a, 0.5 * a * gp, -1.0,
                -3.0, 0.0, 0.0, 3.0 * a, 0.0, 0.0)
    elif kind == KIND_MAIER_STEIN:
        beta = par[0]
        return (px - px ** 3 - beta * px * py * py, -(1.0 + px * px) * py,
                1.0 - 3.0 * px * px - beta * py * py, -2.0 * beta * px * py,
                -2.0 * px * py, -(1.0 + px * px),
                -6.0 * px, -2.0 * beta * py, -2.0 * beta * px,
                -2.0 * py, -2.0 * px, 0.0)
    elif kind == KIND_LINEAR:
        ux = px - par[4]
        uy = py - par[5]
        return (par[0] * ux + par[1] * uy, par[2] * ux + par[3] * uy,
                par[0], par[1], par[2], par[3],
                0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    elif kind == KIND_CONSTANT:
        return (par[0], par[1],
                0.0, 0.0, 0.0, 0.0,
                0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    else:
        with objmode(b1="float64", b2="float64",
                     b11="float64", b12="float64", b21="float64", b22="float64",
                     h1xx="float64", h1xy="float64", h1yy="float64",
                     h2xx="float64", h2xy="float64", h2yy="float64"):
            b1, b2 = _custom_b(int(par[0]), px, py)
            (b11, b12, b21, b22,
             h1xx, h1xy, h1yy, h2xx, h2xy, h2yy) = _custom_derivs(int(par[0]), px, py)
        return (b1, b2, b11, b12, b21, b22,
                h1xx, h1xy, h1yy, h2xx, h2xy, h2yy)


@dataclass
class Jet:
    """Value-and-gradient pair carried per mesh point."""
    u: float
    g: np.ndarray


class DriftField:
    """Base class; subclasses fill in kind/params and the evaluators.

    Evaluators are pure functions of position (no internal state), so a
    field instance may be shared freely between threads.
    """

    kind: int = KIND_CUSTOM
    params: np.ndarray
    attractor: np.ndarray
    name: str = "custom"

    def b(self, p) -> np.ndarray:
        bx, by = b_eval(self.kind, self.params, float(p[0]), float(p[1]))
        return np.array([bx, by])

    def db(self, p) -> np.ndarray:
        r = field_eval2(self.kind, self.params, float(p[0]), float(p[1]))
        return np.array([[r[2], r[3]], [r[4], r[5]]])

    def d2b(self, p) -> np.ndarray:
        r = field_eval2(self.kind, self.params, float(p[0]), float(p[1]))
        return np.array([[[r[6], r[7]], [r[7], r[8]]],
                         [[r[9], r[10]], [r[10], r[11]]]])

    def exact_jet(self, p) -> Optional[Jet]:
        """Closed-form (U, grad U) where known, else None."""
        return None

    @property
    def has_exact(self) -> bool:
        return self.exact_jet(self.attractor) is not None

    def slowness(self, p, v) -> float:
        """Anisotropic slowness |b| - b.v/|v|; zero along the drift direction."""
        v = np.asarray(v, dtype=float)
        nv = math.hypot(v[0], v[1])
        if nv == 0.0:
            raise ValueError("slowness direction must be nonzero")
        b = self.b(p)
        return math.hypot(b[0], b[1]) - (b[0] * v[0] + b[1] * v[1]) / nv

    def rotational_component(self, p, grad_u) -> np.ndarray:
        """l = b + grad(U)/2, the part of the drift tangent to level sets."""
        return self.b(p) + 0.5 * np.asarray(grad_u, dtype=float)

    def hjb_residual(self, p) -> float:
        """b.gradU + |gradU|^2/2 evaluated with the exact solution."""
        jet = self.exact_jet(p)
        if jet is None:
            raise ValueError(f"field {self.name!r} has no exact solution")
        b = self.b(p)
        g = jet.g
        return float(b @ g + 0.5 * (g @ g))


class RotationalTestField(DriftField):
    """Nonlinear drift with tunable rotation strength a.

    Attractor at the origin, saddle at (-4/3, 0).  The quasipotential in
    the basin is U = 2x^2 + x^3 + y^2 for every a, which makes this the
    workhorse convergence benchmark.
    """

    kind = KIND_ROTATIONAL
    name = "rotational"

    def __init__(self, a: float = 1.0):
        self.a = float(a)
        self.params = np.array([self.a])
        self.attractor = np.zeros(2)

    def exact_jet(self, p) -> Jet:
        x, y = float(p[0]), float(p[1])
        return Jet(2.0 * x * x + x ** 3 + y * y,
                   np.array([4.0 * x + 3.0 * x * x, 2.0 * y]))

    def __repr__(self):
        return f"RotationalTestField(a={self.a})"


class MaierSteinField(DriftField):
    """Bistable nongradient drift; attractors (+-1, 0), saddle at 0.

    At beta = 1 the drift is the negative gradient of a known potential
    V and the quasipotential relative to either attractor is 2V.
    """

    kind = KIND_MAIER_STEIN
    name = "maier-stein"

    def __init__(self, beta: float = 3.0):
        if beta <= 0:
            raise ValueError("beta must be positive")
        self.beta = float(beta)
        self.params = np.array([self.beta])
        self.attractor = np.array([-1.0, 0.0])

    @staticmethod
    def potential(p) -> float:
        x, y = float(p[0]), float(p[1])
        return x ** 4 / 4 - x ** 2 / 2 + x ** 2 * y ** 2 / 2 + y ** 2 / 2 + 0.25

    def exact_jet(self, p) -> Optional[Jet]:
        if self.beta != 1.0:
            return None
        x, y = float(p[0]), float(p[1])
        return Jet(2.0 * self.potential(p),
                   2.0 * np.array([x ** 3 - x + x * y * y, x * x * y + y]))

    def __repr__(self):
        return f"MaierSteinField(beta={self.beta})"


class LinearField(DriftField):
    """b(p) = A (p - center); useful for tests and local analysis."""

    kind = KIND_LINEAR
    name = "linear"

    def __init__(self, a_matrix, center=(0.0, 0.0)):
        a = np.asarray(a_matrix, dtype=float)
        self.a_matrix = a
        self.params = np.array([a[0, 0], a[0, 1], a[1, 0], a[1, 1],
                                center[0], center[1]])
        self.attractor = np.asarray(center, dtype=float)


class ConstantField(DriftField):
    """Spatially constant drift; no attractor, test use only."""

    kind = KIND_CONSTANT
    name = "constant"

    def __init__(self, c):
        self.params = np.asarray(c, dtype=float)
        self.attractor = np.zeros(2)


class CustomField(DriftField):
    """Wraps user callables.  Missing derivatives fall back to central
    differences with step 1e-5 (1 + |x|), good enough for the Newton
    updates when b is smooth."""

    kind = KIND_CUSTOM
    name = "custom"

    def __init__(self, b: Callable, db: Optional[Callable] = None,
                 d2b: Optional[Callable] = None, attractor=(0.0, 0.0),
                 exact: Optional[Callable] = None):
        self._b = b
        self._db = db
        self._d2b = d2b
        self._exact = exact
        self.attractor = np.asarray(attractor, dtype=float)
        handle = _register_custom(self)
        self.params = np.array([float(handle)])

    def b(self, p) -> np.ndarray:
        return np.asarray(self._b(np.asarray(p, dtype=float)), dtype=float)

    def _fd_step(self, p) -> float:
        return 1e-5 * (1.0 + math.hypot(p[0], p[1]))

    def db(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self._db is not None:
            return np.asarray(self._db(p), dtype=float)
        s = self._fd_step(p)
        j = np.empty((2, 2))
        for k in range(2):
            e = np.zeros(2)
            e[k] = s
            j[:, k] = (self.b(p + e) - self.b(p - e)) / (2 * s)
        return j

    def d2b(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if self._d2b is not None:
            return np.asarray(self._d2b(p), dtype=float)
        s = self._fd_step(p)
        h = np.empty((2, 2, 2))
        for k in range(2):
            e = np.zeros(2)
            e[k] = s
            h[:, :, k] = (self.db(p + e) - self.db(p - e)) / (2 * s)
        # enforce symmetry in the last two indices
        h[:, 0, 1] = h[:, 1, 0] = 0.5 * (h[:, 0, 1] + h[:, 1, 0])
        return h

    def exact_jet(self, p) -> Optional[Jet]:
        if self._exact is None:
            return None
        u, g = self._exact(np.asarray(p, dtype=float))
        return Jet(float(u), np.asarray(g, dtype=float))


_FIELD_NAMES = {
    "rotational": (RotationalTestField, {"a": 1.0}),
    "maier-stein": (MaierSteinField, {"beta": 3.0}),
}


def available_fields() -> list[str]:
    return sorted(_FIELD_NAMES)


def field_by_name(name: str, **params) -> DriftField:
    """Look up a built-in field for the CLI; raises KeyError on unknown names."""
    try:
        cls, defaults = _FIELD_NAMES[name]
    except KeyError:
        raise KeyError(
            f"unknown field {name!r}; valid fields: {', '.join(available_fields())}"
        ) from None
    kwargs = dict(defaults)
    kwargs.update(params)
    return cls(**kwargs)
