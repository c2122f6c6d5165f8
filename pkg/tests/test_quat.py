import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation
from sympy.algebras.quaternion import Quaternion as SymQ

from bonnetforge.quat import (I, J, K, ONE, ImQuaternion, Quaternion, QuaternionDomainError,
                              cross3, dot3, from_rotation_matrix, qconj, qinv, qmul, qnorm,
                              qsplit, sandwich, to_rotation_matrix)

from conftest import random_imag, random_quats


def test_unit_relations():
    assert I * J == K
    assert J * K == I
    assert K * I == J
    for u in (I, J, K):
        assert u * u == Quaternion(-1.0)
    assert I * J * K == Quaternion(-1.0)


def test_conjugate_product():
    assert (ONE + I) * (ONE - I) == Quaternion(2.0)


def test_mul_matches_sympy(rng):
    ints = rng.integers(-9, 10, size=(200, 2, 4))
    for p, q in ints:
        want = SymQ(*map(int, p)) * SymQ(*map(int, q))
        got = qmul(p.astype(float), q.astype(float))
        assert list(got) == [float(want.a), float(want.b), float(want.c), float(want.d)]


def test_imaginary_product_is_minus_dot_plus_cross(rng):
    a = random_imag(rng, 10_000)
    b = random_imag(rng, 10_000)
    ab = qmul(a, b)
    assert np.max(np.abs(ab[:, 0] + np.einsum("ij,ij->i", a[:, 1:], b[:, 1:]))) <= 1e-14 * 10
    assert np.max(np.abs(ab[:, 1:] - np.cross(a[:, 1:], b[:, 1:]))) <= 1e-14 * 10
    assert np.allclose(dot3(a, b), np.einsum("ij,ij->i", a[:, 1:], b[:, 1:]))
    assert np.allclose(cross3(a, b), np.cross(a[:, 1:], b[:, 1:]))


def test_norm_is_multiplicative(rng):
    p = random_quats(rng, 10_000)
    q = random_quats(rng, 10_000)
    rel = np.abs(qnorm(qmul(p, q)) - qnorm(p) * qnorm(q)) / (qnorm(p) * qnorm(q))
    assert rel.max() <= 1e-14


def test_q_times_conj_is_norm_squared(rng):
    q = random_quats(rng, 1000)
    r = qmul(q, qconj(q))
    assert np.allclose(r[:, 0], qnorm(q) ** 2, rtol=1e-14)
    assert np.max(np.abs(r[:, 1:])) <= 1e-14 * np.max(qnorm(q) ** 2)


def test_conj_inv_split():
    assert I.conj() == -I
    inv = (2 * K).inv()
    assert inv == -0.5 * K
    assert 2 * K * inv == ONE
    w, v = (3 * ONE + 4 * J).split()
    assert w == 3.0
    assert v == ImQuaternion(0, 4, 0)
    assert isinstance(v, ImQuaternion)
    re, im = qsplit(np.array([3.0, 0, 4, 0]))
    assert re == 3.0 and list(im) == [0, 4, 0]


def test_inv_of_zero_raises():
    with pytest.raises(QuaternionDomainError, match="non-invertible quaternion"):
        Quaternion().inv()


@pytest.mark.parametrize("log_scale", [-6, -3, 0, 3, 6])
def test_inverse_accuracy(rng, log_scale):
    q = random_quats(rng, 2000)
    q *= 10.0**log_scale / qnorm(q)[:, None]
    r = qmul(qinv(q), q)
    assert np.max(np.abs(r - np.array([1, 0, 0, 0]))) <= 1e-13


def test_sandwich_examples():
    p = I
    assert ONE.sandwich(p) == p
    # (1 - k) i (1 + k) = (1 - k)(i - j) = i - j - j - i = -2j
    assert (ONE + K).sandwich(I) == Quaternion(0, 0, -2, 0)


@settings(max_examples=200, deadline=None)
# magnitudes below 1e-50 are flushed to zero: squaring them underflows in qnorm
@given(st.lists(st.floats(-1e3, 1e3).map(lambda x: 0.0 if abs(x) < 1e-50 else x),
                min_size=7, max_size=7))
def test_sandwich_is_imaginary_and_scales(xs):
    lam = np.array(xs[:4])
    p = np.array([0.0] + xs[4:])
    out = sandwich(lam, p)
    scale = qnorm(lam) ** 2 * qnorm(p)
    assert abs(out[0]) <= 1e-14 * scale
    assert abs(qnorm(out) - scale) <= 1e-13 * scale


def test_sandwich_unit_is_rotation(rng):
    lam = random_quats(rng, 1000)
    lam /= qnorm(lam)[:, None]
    p = random_imag(rng, 1000)
    assert np.allclose(qnorm(sandwich(lam, p)), qnorm(p), rtol=1e-14)


def test_rotation_matrix_matches_scipy(rng):
    q = random_quats(rng, 500)
    q /= qnorm(q)[:, None]
    R = Rotation.from_quat(np.roll(q, -1, axis=1)).as_matrix()
    assert np.allclose(to_rotation_matrix(q), R, atol=1e-14)
    back = from_rotation_matrix(R)
    sign = np.sign(np.einsum("ij,ij->i", back, q))
    assert np.allclose(back * sign[:, None], q, atol=1e-14)


@pytest.mark.parametrize("angle", [0.0, 1e-9, np.pi / 2, np.pi - 1e-9, np.pi])
@pytest.mark.parametrize("axis", [(1, 0, 0), (0, 1, 0), (0, 0, 1), (1, -2, 0.5)])
def test_rotation_matrix_branches(angle, axis):
    axis = np.array(axis, dtype=float) / np.linalg.norm(axis)
    q = np.concatenate([[np.cos(angle / 2)], np.sin(angle / 2) * axis])
    back = from_rotation_matrix(to_rotation_matrix(q))
    assert min(np.abs(back - q).max(), np.abs(back + q).max()) <= 1e-12


def test_sandwich_rotates_by_conjugate():
    # conj(lam) v lam = R(conj(lam)) v
    lam = np.array([np.cos(0.3), 0.0, 0.0, np.sin(0.3)])
    v = np.array([0.0, 1.0, 0.0, 0.0])
    want = to_rotation_matrix(qconj(lam)) @ v[1:]
    assert np.allclose(sandwich(lam, v)[1:], want, atol=1e-15)
