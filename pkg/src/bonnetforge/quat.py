"""Quaternion algebra.

Quaternions are stored as arrays whose last axis holds ``(w, x, y, z)``,
i.e. ``w + x i + y j + z k`` with the Hamilton convention ``ij = k``.  All
array functions broadcast over leading axes.  Points and vectors of R^3 are
purely imaginary quaternions (``w == 0``).

The scalar :class:`Quaternion` / :class:`ImQuaternion` types are thin value
wrappers around the same routines, convenient for parameters such as the
translation ``a`` or the right multiplier ``r`` of the Bonnet construction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels


class QuaternionDomainError(ValueError):
    """Raised when an operation needs an invertible quaternion and gets 0."""


def as_quat(real, vec):
    """Assemble quaternions from a real part and an imaginary 3-vector part."""
    real = np.asarray(real, dtype=float)
    vec = np.asarray(vec, dtype=float)
    shape = np.broadcast_shapes(real.shape, vec.shape[:-1])
    out = np.empty(shape + (4,))
    out[..., 0] = real
    out[..., 1:] = vec
    return out


def imag(vec):
    """Embed 3-vectors as purely imaginary quaternions."""
    return as_quat(0.0, vec)


def real(x):
    """Embed real scalars as quaternions with zero imaginary part."""
    x = np.asarray(x, dtype=float)
    out = np.zeros(x.shape + (4,))
    out[..., 0] = x
    return out


def qmul(p, q):
    """Hamilton product ``p q``."""
    return kernels.qmul(np.asarray(p, dtype=float), np.asarray(q, dtype=float))


def qconj(q):
    q = np.asarray(q, dtype=float)
    out = -q
    out[..., 0] = q[..., 0]
    return out


def qnorm2(q):
    q = np.asarray(q, dtype=float)
    return np.einsum("...i,...i->...", q, q)


def qnorm(q):
    return np.sqrt(qnorm2(q))


def qinv(q):
    """Multiplicative inverse ``conj(q) / |q|^2``.

    Raises QuaternionDomainError if any entry is exactly zero.
    """
    n2 = qnorm2(q)
    if np.any(n2 == 0.0):
        raise QuaternionDomainError("non-invertible quaternion")
    return qconj(q) / n2[..., None]


def qsplit(q):
    """Exact split into ``(real part, imaginary 3-vector)``."""
    q = np.asarray(q, dtype=float)
    return q[..., 0].copy(), q[..., 1:].copy()


def sandwich(lam, p):
    """The spin map ``p -> conj(lam) p lam``.

    For imaginary ``p`` the result is imaginary with norm ``|lam|^2 |p|``;
    the scalar part is zeroed explicitly only by callers that want it.
    """
    return kernels.sandwich(np.asarray(lam, dtype=float), np.asarray(p, dtype=float))


def dot3(a, b):
    return np.einsum("...i,...i->...", np.asarray(a)[..., -3:], np.asarray(b)[..., -3:])


def cross3(a, b):
    return np.cross(np.asarray(a)[..., -3:], np.asarray(b)[..., -3:])


def to_rotation_matrix(q):
    """Matrix R with ``R v = q v conj(q)`` for unit ``q``."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = np.moveaxis(q, -1, 0)
    R = np.empty(q.shape[:-1] + (3, 3))
    R[..., 0, 0] = 1 - 2 * (y * y + z * z)
    R[..., 0, 1] = 2 * (x * y - w * z)
    R[..., 0, 2] = 2 * (x * z + w * y)
    R[..., 1, 0] = 2 * (x * y + w * z)
    R[..., 1, 1] = 1 - 2 * (x * x + z * z)
    R[..., 1, 2] = 2 * (y * z - w * x)
    R[..., 2, 0] = 2 * (x * z - w * y)
    R[..., 2, 1] = 2 * (y * z + w * x)
    R[..., 2, 2] = 1 - 2 * (x * x + y * y)
    return R


def from_rotation_matrix(R):
    """Unit quaternion q with ``q v conj(q) = R v``.

    Shepperd's method: per matrix, pick the largest of ``(trace, R00, R11,
    R22)`` as pivot so the square root is taken of a number >= 1/4 and the
    division is well conditioned for every rotation angle.  The sign of the
    result is arbitrary (``q`` and ``-q`` give the same ``R``).
    """
    R = np.asarray(R, dtype=float)
    shape = R.shape[:-2]
    R = R.reshape(-1, 3, 3)
    tr = R[:, 0, 0] + R[:, 1, 1] + R[:, 2, 2]
    diag = np.stack([tr, R[:, 0, 0], R[:, 1, 1], R[:, 2, 2]], axis=-1)
    pivot = np.argmax(diag, axis=-1)
    q = np.empty((R.shape[0], 4))

    m = pivot == 0
    s = 2.0 * np.sqrt(1.0 + tr[m])
    q[m, 0] = 0.25 * s
    q[m, 1] = (R[m, 2, 1] - R[m, 1, 2]) / s
    q[m, 2] = (R[m, 0, 2] - R[m, 2, 0]) / s
    q[m, 3] = (R[m, 1, 0] - R[m, 0, 1]) / s

    m = pivot == 1
    s = 2.0 * np.sqrt(1.0 + R[m, 0, 0] - R[m, 1, 1] - R[m, 2, 2])
    q[m, 0] = (R[m, 2, 1] - R[m, 1, 2]) / s
    q[m, 1] = 0.25 * s
    q[m, 2] = (R[m, 0, 1] + R[m, 1, 0]) / s
    q[m, 3] = (R[m, 0, 2] + R[m, 2, 0]) / s

    m = pivot == 2
    s = 2.0 * np.sqrt(1.0 + R[m, 1, 1] - R[m, 0, 0] - R[m, 2, 2])
    q[m, 0] = (R[m, 0, 2] - R[m, 2, 0]) / s
    q[m, 1] = (R[m, 0, 1] + R[m, 1, 0]) / s
    q[m, 2] = 0.25 * s
    q[m, 3] = (R[m, 1, 2] + R[m, 2, 1]) / s

    m = pivot == 3
    s = 2.0 * np.sqrt(1.0 + R[m, 2, 2] - R[m, 0, 0] - R[m, 1, 1])
    q[m, 0] = (R[m, 1, 0] - R[m, 0, 1]) / s
    q[m, 1] = (R[m, 0, 2] + R[m, 2, 0]) / s
    q[m, 2] = (R[m, 1, 2] + R[m, 2, 1]) / s
    q[m, 3] = 0.25 * s

    q /= np.linalg.norm(q, axis=-1, keepdims=True)
    return q.reshape(shape + (4,))


@dataclass(frozen=True)
class Quaternion:
    w: float = 0.0
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0

    @classmethod
    def from_array(cls, arr) -> "Quaternion":
        w, x, y, z = (float(c) for c in np.asarray(arr, dtype=float).reshape(4))
        return cls(w, x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def __eq__(self, other):
        # value equality, so ImQuaternion(0, 0, 1) == Quaternion(0, 0, 0, 1)
        if not isinstance(other, Quaternion):
            return NotImplemented
        return (self.w, self.x, self.y, self.z) == (other.w, other.x, other.y, other.z)

    def __hash__(self):
        return hash((self.w, self.x, self.y, self.z))

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion.from_array(qmul(self.as_array(), other.as_array()))
        return Quaternion.from_array(self.as_array() * float(other))

    def __rmul__(self, other):
        return Quaternion.from_array(self.as_array() * float(other))

    def __truediv__(self, other):
        return Quaternion.from_array(self.as_array() / float(other))

    def __add__(self, other):
        if not isinstance(other, Quaternion):
            other = Quaternion(float(other))
        return Quaternion.from_array(self.as_array() + other.as_array())

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, Quaternion):
            other = Quaternion(float(other))
        return Quaternion.from_array(self.as_array() - other.as_array())

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def conj(self) -> "Quaternion":
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def norm(self) -> float:
        return float(qnorm(self.as_array()))

    def inv(self) -> "Quaternion":
        return Quaternion.from_array(qinv(self.as_array()))

    def split(self) -> tuple[float, "ImQuaternion"]:
        return self.w, ImQuaternion(self.x, self.y, self.z)

    def sandwich(self, p: "Quaternion") -> "Quaternion":
        """``conj(self) p self``."""
        return Quaternion.from_array(sandwich(self.as_array(), p.as_array()))


class ImQuaternion(Quaternion):
    """Purely imaginary quaternion, i.e. a vector of R^3."""

    def __init__(self, x: float = 0.0, y: float = 0.0, z: float = 0.0):
        super().__init__(0.0, float(x), float(y), float(z))

    def __repr__(self):
        return f"ImQuaternion(x={self.x!r}, y={self.y!r}, z={self.z!r})"

    def vector(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])


ONE = Quaternion(1.0)
I = ImQuaternion(1.0, 0.0, 0.0)
J = ImQuaternion(0.0, 1.0, 0.0)
K = ImQuaternion(0.0, 0.0, 1.0)
