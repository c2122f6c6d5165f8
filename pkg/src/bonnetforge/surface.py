"""First-order data of a conformally parametrized surface in Im H.

Conventions (fixed for the whole package):

* orientation ``J d/du = d/dv``, so ``*df = N df`` reads ``f_v = N f_u``;
* normal ``N = f_u x f_v / |f_u x f_v|``;
* conformal / anti-conformal parts ``alpha_pm = (alpha -+ N *alpha) / 2``,
  which is what ``*alpha_pm = +-N alpha_pm`` forces under this orientation;
* mean curvature from ``(dN)_+ = H df``; with these choices the unit
  cylinder ``(cos u, sin u, v)`` has ``H = +1/2`` and the Laplace identity
  ``d*df = 2 H N |f_u|^2`` holds with a plus sign.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Form1, Form2Q, QuatField, d_of_form, d_of_function, star
from .quat import cross3, dot3, imag, qmul, real

#: |f_u x f_v| below this fraction of max |f_u|^2 is treated as degenerate.
DEGENERACY_THRESHOLD = 1e-10


class DegenerateImmersionError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SurfaceJet:
    f: QuatField
    df: Form1
    N: QuatField
    dN: Form1
    conf_factor: np.ndarray
    H: np.ndarray
    H_dv: np.ndarray
    omega: Form1
    analytic: tuple = ()

    @property
    def grid(self):
        return self.f.grid


def conformal_split(alpha: Form1, N):
    """Return ``(alpha_plus, alpha_minus)`` with ``*alpha_pm = +-N alpha_pm``."""
    n_star = star(alpha).lmul(N)
    return (alpha - n_star).scale(0.5), (alpha + n_star).scale(0.5)


def build_jet(f: QuatField, df: Form1 | None = None, N: QuatField | None = None,
              dN: Form1 | None = None) -> SurfaceJet:
    """Derive normal, conformal factor, H and omega from a sampled immersion.

    Any of ``df``, ``N`` and ``dN`` may be supplied in closed form; missing
    ones are computed by finite differences (``N`` from the cross product of
    ``df``).
    """
    analytic = tuple(name for name, x in (("df", df), ("N", N), ("dN", dN)) if x is not None)
    scale = max(float(np.max(np.abs(f.values))), 1.0)
    if np.max(np.abs(f.real)) > 1e-12 * scale:
        raise ValueError("immersion must be imaginary-valued")
    if df is None:
        df = d_of_function(f)
    fu, fv = df.a_u, df.a_v
    n = cross3(fu, fv)
    nn = np.linalg.norm(n, axis=-1)
    conf = dot3(fu, fu)
    bad = nn < DEGENERACY_THRESHOLD * np.max(conf)
    if np.any(bad):
        i, j = np.argwhere(bad)[0]
        raise DegenerateImmersionError(
            f"degenerate immersion at sample ({i}, {j}), (u, v) = "
            f"({f.grid.u[i]:.6g}, {f.grid.v[j]:.6g})")
    if N is None:
        N = QuatField(f.grid, imag(n / nn[..., None]))
    if dN is None:
        dN = d_of_function(N)
    dN_plus, _ = conformal_split(dN, N.values)
    H = dot3(dN_plus.a_u, fu) / conf
    H_dv = dot3(dN_plus.a_v, fv) / dot3(fv, fv)
    omega = dN - df.scale(H)
    return SurfaceJet(f=f, df=df, N=N, dN=dN, conf_factor=conf, H=H, H_dv=H_dv,
                      omega=omega, analytic=analytic)


def conformality_residual(jet: SurfaceJet) -> float:
    """max |*df - N df| / |f_u| over the grid."""
    defect = star(jet.df) - jet.df.lmul(jet.N)
    return float(np.max(defect.pointwise_norm() / np.sqrt(jet.conf_factor)))


def laplace_residual(jet: SurfaceJet, floor: float = 1.0) -> float:
    """Relative defect of ``d*df = 2 H N |df|^2``.

    Normalized pointwise by ``(|H| + floor) |f_u|^2``.
    """
    lhs = d_of_form(star(jet.df)).q
    rhs = 2.0 * (jet.H * jet.conf_factor)[..., None] * jet.N.values
    denom = (np.abs(jet.H) + floor) * jet.conf_factor
    return float(np.max(np.linalg.norm(lhs - rhs, axis=-1) / denom))


def codazzi_sides(jet: SurfaceJet):
    """Both sides of ``d omega = (*dH - dH N) df`` as 2-form values."""
    lhs = d_of_form(jet.omega)
    dH = d_of_function(QuatField(jet.grid, real(jet.H)))
    rhs = (star(dH) - dH.rmul(jet.N)).a_u
    return lhs, Form2Q(jet.grid, qmul(rhs, jet.df.a_u))


def codazzi_residual(jet: SurfaceJet) -> float:
    """max |lhs - rhs| of the Codazzi equation relative to max |dN|."""
    lhs, rhs = codazzi_sides(jet)
    scale = float(np.max(jet.dN.pointwise_norm())) + 1e-300
    return float(np.max((lhs - rhs).norm()) / scale)


def normal_residual(jet: SurfaceJet) -> float:
    """max of ||N| - 1| and |<N, f_u>|/|f_u|, |<N, f_v>|/|f_u|."""
    Nv = jet.N.values
    r = np.sqrt(jet.conf_factor)
    return float(max(np.max(np.abs(np.linalg.norm(Nv, axis=-1) - 1.0)),
                     np.max(np.abs(dot3(Nv, jet.df.a_u)) / r),
                     np.max(np.abs(dot3(Nv, jet.df.a_v)) / r)))
