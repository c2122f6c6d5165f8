"""Rectangular parameter grids and finite-difference calculus of
quaternion-valued functions and 1-forms.

Orientation is fixed once: the complex structure rotates ``du`` into ``dv``
(``J d/du = d/dv``).  Hence for ``alpha = a_u du + a_v dv`` the operator
``*alpha = alpha o J`` has coefficients ``(a_v, -a_u)``.

2-forms are stored by their value on the pair ``(d/du, J d/du)``, which is
the coordinate value ``omega(d/du, d/dv)``.  Metric quantities compared with
such values must use ``|f_u|^2`` as the conformal factor.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .quat import qmul


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class Grid:
    nu: int
    nv: int
    u0: float
    v0: float
    hu: float
    hv: float

    def __post_init__(self):
        if self.nu < 3 or self.nv < 3:
            raise GridError(f"grid too small: need nu, nv >= 3, got {self.nu}x{self.nv}")
        if not (self.hu > 0 and self.hv > 0):
            raise GridError("grid spacings must be positive")

    @classmethod
    def from_ranges(cls, nu, nv, u_range, v_range) -> "Grid":
        (u0, u1), (v0, v1) = u_range, v_range
        return cls(int(nu), int(nv), float(u0), float(v0),
                   (u1 - u0) / (nu - 1), (v1 - v0) / (nv - 1))

    @property
    def shape(self):
        return (self.nu, self.nv)

    @property
    def u(self):
        return self.u0 + self.hu * np.arange(self.nu)

    @property
    def v(self):
        return self.v0 + self.hv * np.arange(self.nv)

    @property
    def u_range(self):
        return (self.u0, self.u0 + self.hu * (self.nu - 1))

    @property
    def v_range(self):
        return (self.v0, self.v0 + self.hv * (self.nv - 1))

    @property
    def h(self):
        return max(self.hu, self.hv)

    @property
    def center(self):
        return (self.nu // 2, self.nv // 2)

    def mesh(self):
        return np.meshgrid(self.u, self.v, indexing="ij")

    def refine(self) -> "Grid":
        """Halve both spacings; old samples stay samples of the new grid."""
        return Grid(2 * self.nu - 1, 2 * self.nv - 1, self.u0, self.v0,
                    self.hu / 2, self.hv / 2)

    def to_dict(self):
        return {"nu": self.nu, "nv": self.nv,
                "u_range": list(self.u_range), "v_range": list(self.v_range)}


def _check_shape(grid, arr, name):
    if arr.shape != (grid.nu, grid.nv, 4):
        raise GridError(f"{name} has shape {arr.shape}, expected {(grid.nu, grid.nv, 4)}")


@dataclass(frozen=True, eq=False)
class QuatField:
    """Quaternion-valued function sampled on a grid, values of shape (nu, nv, 4)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        _check_shape(self.grid, self.values, "field")

    def __add__(self, other):
        return QuatField(self.grid, self.values + _vals(other))

    def __sub__(self, other):
        return QuatField(self.grid, self.values - _vals(other))

    def __neg__(self):
        return QuatField(self.grid, -self.values)

    def scale(self, c):
        return QuatField(self.grid, self.values * c)

    @property
    def real(self):
        return self.values[..., 0]

    @property
    def vec(self):
        return self.values[..., 1:]

    def at(self, idx):
        return self.values[idx[0], idx[1]]


@dataclass(frozen=True, eq=False)
class Form1:
    """Quaternion-valued 1-form ``a_u du + a_v dv``."""

    grid: Grid
    a_u: np.ndarray
    a_v: np.ndarray

    def __post_init__(self):
        _check_shape(self.grid, self.a_u, "a_u")
        _check_shape(self.grid, self.a_v, "a_v")

    def __add__(self, other):
        _same_grid(self, other)
        return Form1(self.grid, self.a_u + other.a_u, self.a_v + other.a_v)

    def __sub__(self, other):
        _same_grid(self, other)
        return Form1(self.grid, self.a_u - other.a_u, self.a_v - other.a_v)

    def __neg__(self):
        return Form1(self.grid, -self.a_u, -self.a_v)

    def scale(self, c):
        """Multiply by a real constant or a real (nu, nv) field."""
        c = np.asarray(c, dtype=float)
        if c.ndim:
            c = c[..., None]
        return Form1(self.grid, self.a_u * c, self.a_v * c)

    def lmul(self, q):
        """Pointwise ``q alpha`` for a quaternion field or constant ``q``."""
        q = _vals(q)
        return Form1(self.grid, qmul(q, self.a_u), qmul(q, self.a_v))

    def rmul(self, q):
        """Pointwise ``alpha q``."""
        q = _vals(q)
        return Form1(self.grid, qmul(self.a_u, q), qmul(self.a_v, q))

    def pointwise_norm(self):
        """max(|a_u|, |a_v|) per sample."""
        return np.maximum(np.linalg.norm(self.a_u, axis=-1), np.linalg.norm(self.a_v, axis=-1))


@dataclass(frozen=True, eq=False)
class Form2Q:
    """2-form stored by its value on ``(d/du, d/dv)``."""

    grid: Grid
    q: np.ndarray

    def __post_init__(self):
        _check_shape(self.grid, self.q, "q")

    def __sub__(self, other):
        return Form2Q(self.grid, self.q - other.q)

    def __add__(self, other):
        return Form2Q(self.grid, self.q + other.q)

    def norm(self):
        return np.linalg.norm(self.q, axis=-1)


def _vals(x):
    return x.values if isinstance(x, QuatField) else np.asarray(x, dtype=float)


def _same_grid(a, b):
    if a.grid != b.grid:
        raise GridError("grid mismatch")


def _deriv(x, h, axis):
    """np.gradient with edge_order=2, but with the one-sided boundary stencil
    written on differences, ``(4 (x1 - x0) - (x2 - x0)) / 2h``, so constants
    differentiate to exactly zero.
    """
    out = np.gradient(x, h, axis=axis, edge_order=2)
    x = np.moveaxis(x, axis, 0)
    o = np.moveaxis(out, axis, 0)
    o[0] = (4.0 * (x[1] - x[0]) - (x[2] - x[0])) / (2.0 * h)
    o[-1] = ((x[-3] - x[-1]) - 4.0 * (x[-2] - x[-1])) / (2.0 * h)
    return out


def partials(F: QuatField):
    """Second-order finite differences ``(F_u, F_v)``.

    Central differences inside, second-order one-sided stencils on the
    boundary rows and columns.
    """
    g = F.grid
    Fu = _deriv(F.values, g.hu, 0)
    Fv = _deriv(F.values, g.hv, 1)
    return QuatField(g, Fu), QuatField(g, Fv)


def d_of_function(F: QuatField) -> Form1:
    Fu, Fv = partials(F)
    return Form1(F.grid, Fu.values, Fv.values)


def star(alpha: Form1) -> Form1:
    """``*alpha = alpha o J``; with ``J d/du = d/dv`` this is ``(a_v, -a_u)``."""
    return Form1(alpha.grid, alpha.a_v.copy(), -alpha.a_u)


def wedge(alpha: Form1, beta: Form1) -> Form2Q:
    """``(alpha ^ beta)(d/du, d/dv) = a_u b_v - a_v b_u`` (order matters)."""
    _same_grid(alpha, beta)
    return Form2Q(alpha.grid, qmul(alpha.a_u, beta.a_v) - qmul(alpha.a_v, beta.a_u))


def d_of_form(alpha: Form1) -> Form2Q:
    """Exterior derivative ``d/du a_v - d/dv a_u``."""
    g = alpha.grid
    dav_du = _deriv(alpha.a_v, g.hu, 0)
    dau_dv = _deriv(alpha.a_u, g.hv, 1)
    return Form2Q(g, dav_du - dau_dv)


def integrate(alpha: Form1, base=None):
    """Potential of an (approximately) closed 1-form.

    Trapezoidal edge sums along the two staircase paths from ``base`` (u
    first, then v; and v first, then u) are averaged.  Returns the potential
    (zero at ``base``) and the max discrepancy between the two paths, which
    is a path-independence residual: O(h^2) for closed forms, O(1) otherwise.
    """
    g = alpha.grid
    i0, j0 = g.center if base is None else base
    FA, FB = kernels.integrate_paths(alpha.a_u, alpha.a_v, g.hu, g.hv, int(i0), int(j0))
    residual = float(np.max(np.linalg.norm(FA - FB, axis=-1)))
    return QuatField(g, 0.5 * (FA + FB)), residual
