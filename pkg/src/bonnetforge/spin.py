"""Spin transformations ``d f~ = conj(lam) df lam`` of a conformal immersion."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Form1, QuatField, d_of_function, integrate, star
from .quat import qinv, qmul, qnorm, qnorm2, sandwich
from .surface import SurfaceJet

VANISHING_THRESHOLD = 1e-10


class SpinError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SpinFactor:
    lam: QuatField
    rho: np.ndarray
    dirac_residual: float


def _lam(lam):
    return lam.values if isinstance(lam, QuatField) else np.asarray(lam, dtype=float)


def check_nonvanishing(lam):
    n = qnorm(_lam(lam))
    if np.min(n) <= VANISHING_THRESHOLD * np.max(n):
        idx = np.unravel_index(np.argmin(n), n.shape)
        raise SpinError(f"spin factor vanishes at sample {tuple(int(i) for i in idx)}")


def apply_spin_pointwise(jet: SurfaceJet, lam) -> Form1:
    """``conj(lam) df lam`` coefficientwise, projected onto Im H."""
    lam = _lam(lam)
    check_nonvanishing(lam)
    gu = sandwich(lam, jet.df.a_u)
    gv = sandwich(lam, jet.df.a_v)
    gu[..., 0] = 0.0
    gv[..., 0] = 0.0
    return Form1(jet.grid, gu, gv)


def dirac_sides(jet: SurfaceJet, lam: QuatField):
    """``(*dlam + N dlam, df lam)`` as 1-forms."""
    dlam = d_of_function(lam)
    lhs = star(dlam) + dlam.lmul(jet.N)
    return lhs, jet.df.rmul(lam)


def estimate_rho(jet: SurfaceJet, lam: QuatField):
    """Pointwise least-squares ``rho`` in ``*dlam + N dlam = rho df lam``.

    Both coordinate components enter the fit.  Returns ``(rho, residual)``
    where the residual is the max pointwise defect norm relative to
    ``|f_u| |lam|``.
    """
    lhs, b = dirac_sides(jet, lam)
    num = dot4(lhs.a_u, b.a_u) + dot4(lhs.a_v, b.a_v)
    den = qnorm2(b.a_u) + qnorm2(b.a_v)
    rho = num / den
    defect = lhs - b.scale(rho)
    scale = np.sqrt(jet.conf_factor) * qnorm(lam.values)
    return rho, float(np.max(defect.pointwise_norm() / scale))


def dot4(a, b):
    return np.einsum("...i,...i->...", a, b)


def make_spin_factor(jet: SurfaceJet, lam: QuatField) -> SpinFactor:
    check_nonvanishing(lam)
    rho, res = estimate_rho(jet, lam)
    return SpinFactor(lam, rho, res)


def integrate_spin(jet: SurfaceJet, lam, base=None):
    """New immersion from ``conj(lam) df lam``; returns ``(f~, path_residual)``."""
    return integrate(apply_spin_pointwise(jet, lam), base)


def spin_geometry(jet: SurfaceJet, lam, rho):
    """Closed-form normal, conformal factor and mean curvature of the transform:
    ``lam^-1 N lam``, ``|lam|^4 |f_u|^2`` and ``(H + rho) / |lam|^2``.
    """
    lam = _lam(lam)
    n2 = qnorm2(lam)
    N_new = qmul(qmul(qinv(lam), jet.N.values), lam)
    N_new[..., 0] = 0.0
    return QuatField(jet.grid, N_new), n2 * n2 * jet.conf_factor, (jet.H + rho) / n2


def hdf_criterion(jet: SurfaceJet, lam: QuatField, tol: float = 1e-3):
    """Test ``*dlam + N dlam = 0``, i.e. whether ``H|df|`` is preserved.

    Returns ``(holds, residual)`` with the residual relative to ``|f_u||lam|``.
    """
    lhs, _ = dirac_sides(jet, lam)
    scale = np.sqrt(jet.conf_factor) * qnorm(lam.values)
    res = float(np.max(lhs.pointwise_norm() / scale))
    return res <= tol, res
