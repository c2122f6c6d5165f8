"""Bonnet pairs from isothermic surfaces, and the converse.

Forward: with ``f*`` the dual of an isothermic ``f``, the spin factors
``lam_pm = +-eps + f* + a`` give two immersions ``f_pm`` with identical
metric and mean curvature that are not congruent.

Converse: a Bonnet pair ``f_pm`` is related by a unit spin factor ``lam``
(``df_+ = conj(lam) df_- lam``); ``f* = (lam - 1)^-1 + 1/2`` and
``df = conj(lam - 1) df_- (lam - 1)`` then define an isothermic surface with
dual ``f*`` of which ``f_pm`` are the transforms by ``+-1/2 + f*``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .grid import Form1, Grid, QuatField, d_of_function, integrate, wedge
from .isothermic import IsothermicSeed
from .quat import (ImQuaternion, Quaternion, from_rotation_matrix, qconj, qinv, qmul,
                   qnorm, qnorm2, sandwich, to_rotation_matrix)
from .spin import apply_spin_pointwise, hdf_criterion, spin_geometry
from .surface import SurfaceJet, build_jet


class BonnetError(ValueError):
    pass


#: default pass/fail thresholds of the forward verification report
FORWARD_GATES = {
    "metric_gap": 1e-12,
    "H_gap": 1e-12,
    "dirac_plus": 1e-2,
    "dirac_minus": 1e-2,
    "congruence_variation": 0.1,
}


@dataclass
class VerificationReport:
    residuals: dict
    grid: dict
    parameters: dict
    gates: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(g["pass"] for g in self.gates.values())

    def add_gate(self, name, value, tol, lower=False, source=""):
        """Record a gate; ``lower=True`` means the value must exceed ``tol``."""
        ok = bool(value > tol) if lower else bool(value <= tol)
        self.gates[name] = {"value": float(value), "tol": float(tol),
                            "kind": "min" if lower else "max", "pass": ok, "source": source}

    def to_dict(self):
        return {"residuals": {k: float(v) for k, v in self.residuals.items()},
                "grid": self.grid, "parameters": self.parameters,
                "gates": self.gates, "passed": self.passed}


@dataclass(frozen=True, eq=False)
class BonnetBundle:
    seed: IsothermicSeed
    epsilon: float
    a: ImQuaternion
    lambda_plus: QuatField
    lambda_minus: QuatField
    df_plus: Form1
    df_minus: Form1
    f_plus: QuatField
    f_minus: QuatField
    report: VerificationReport
    degenerate: bool = False


def _as_imq(a):
    if a is None:
        return ImQuaternion()
    if isinstance(a, Quaternion):
        if a.w != 0.0:
            raise BonnetError("translation a must be purely imaginary")
        return ImQuaternion(a.x, a.y, a.z)
    x, y, z = (float(c) for c in a)
    return ImQuaternion(x, y, z)


def spin_factors(seed: IsothermicSeed, epsilon: float, a=None):
    """``(lam_+, lam_-) = (eps + f* + a, -eps + f* + a)``."""
    a = _as_imq(a)
    core = seed.f_star.values + a.as_array()
    plus = core.copy()
    minus = core.copy()
    plus[..., 0] = core[..., 0] + epsilon
    minus[..., 0] = core[..., 0] - epsilon
    g = seed.f_star.grid
    return QuatField(g, plus), QuatField(g, minus)


def construct_pair(seed: IsothermicSeed, epsilon: float, a=None, allow_degenerate=False,
                   gates=None) -> BonnetBundle:
    """Spin-transform an isothermic seed into a Bonnet pair and verify it."""
    epsilon = float(epsilon)
    if epsilon == 0.0 and not allow_degenerate:
        raise BonnetError("epsilon = 0 degenerates the pair; pass allow_degenerate=True")
    a = _as_imq(a)
    jet = seed.jet
    lp, lm = spin_factors(seed, epsilon, a)
    dfp = apply_spin_pointwise(jet, lp)
    dfm = apply_spin_pointwise(jet, lm)
    fp, path_p = integrate(dfp, seed.base)
    fm, path_m = integrate(dfm, seed.base)

    metric_gap = max(_rel_gap(qnorm2(dfp.a_u), qnorm2(dfm.a_u)),
                     _rel_gap(qnorm2(dfp.a_v), qnorm2(dfm.a_v)))
    zero = np.zeros(jet.grid.shape)
    _, _, Hp = spin_geometry(jet, lp, zero)
    _, _, Hm = spin_geometry(jet, lm, zero)
    H_gap = float(np.max(np.abs(Hp - Hm)) / (np.max(np.abs(Hp)) + 1e-300))
    _, dirac_p = hdf_criterion(jet, lp)
    _, dirac_m = hdf_criterion(jet, lm)
    variation = congruence_variation(lp, lm, seed.base)

    report = VerificationReport(
        residuals={"metric_gap": metric_gap, "H_gap": H_gap, "dirac_plus": dirac_p,
                   "dirac_minus": dirac_m, "path_plus": path_p, "path_minus": path_m,
                   "congruence_variation": variation,
                   "congruence_distance": congruence_distance(fp, fm)},
        grid=jet.grid.to_dict(),
        parameters={"epsilon": epsilon, "a": [a.x, a.y, a.z], "base": list(seed.base)},
    )
    thresholds = dict(FORWARD_GATES, **(gates or {}))
    for name in ("metric_gap", "H_gap", "dirac_plus", "dirac_minus"):
        report.add_gate(name, report.residuals[name], thresholds[name], source="bonnet.construct_pair")
    if epsilon != 0.0:
        report.add_gate("congruence_variation", variation, thresholds["congruence_variation"],
                        lower=True, source="bonnet.construct_pair")
    return BonnetBundle(seed, epsilon, a, lp, lm, dfp, dfm, fp, fm, report,
                        degenerate=epsilon == 0.0)


def _rel_gap(x, y):
    return float(np.max(np.abs(x - y) / np.maximum(np.abs(x), np.abs(y))))


def congruence_variation(lam_plus: QuatField, lam_minus: QuatField, base) -> float:
    """Max deviation of the unit field ``lam_+^-1 lam_-`` from its base value.

    Zero iff the pair is congruent (constant relative spin factor).
    """
    mu = qmul(qinv(lam_plus.values), lam_minus.values)
    mu /= qnorm(mu)[..., None]
    return float(np.max(qnorm(mu - mu[base[0], base[1]])))


def _frames(df: Form1):
    fu = df.a_u[..., 1:]
    fv = df.a_v[..., 1:]
    e1 = fu / np.linalg.norm(fu, axis=-1, keepdims=True)
    w = fv - np.einsum("...i,...i->...", fv, e1)[..., None] * e1
    nw = np.linalg.norm(w, axis=-1, keepdims=True)
    if np.any(nw[..., 0] < 1e-12 * np.linalg.norm(fv, axis=-1)):
        raise BonnetError("frame degeneracy: f_u and f_v are parallel somewhere")
    e2 = w / nw
    return np.stack([e1, e2, np.cross(e1, e2)], axis=-1)


def bonnet_gaps(jet_minus: SurfaceJet, jet_plus: SurfaceJet):
    """Relative metric and mean-curvature gaps between two jets."""
    metric = max(_rel_gap(jet_plus.conf_factor, jet_minus.conf_factor),
                 _rel_gap(qnorm2(jet_plus.df.a_v), qnorm2(jet_minus.df.a_v)))
    H = float(np.max(np.abs(jet_plus.H - jet_minus.H)) / (np.max(np.abs(jet_minus.H)) + 1e-300))
    return metric, H


def jet_error_bars(jet: SurfaceJet):
    """Truncation-error estimates ``(metric, H)`` of a sampled jet.

    The jet is rebuilt from every other sample (spacing 2h, same analytic
    inputs) and compared on the shared samples: the metric bar is the
    relative change of ``|f_u|^2`` and ``|f_v|^2``, the H bar the change of
    H relative to ``max |H|``.  For a convergent scheme these differences
    bound the errors on the fine grid.
    """
    g = jet.grid
    if g.nu < 5 or g.nv < 5:
        return float("inf"), float("inf")
    sub = Grid((g.nu + 1) // 2, (g.nv + 1) // 2, g.u0, g.v0, 2 * g.hu, 2 * g.hv)

    def coarse(a):
        return a[::2, ::2]

    kw = {}
    if "df" in jet.analytic:
        kw["df"] = Form1(sub, coarse(jet.df.a_u), coarse(jet.df.a_v))
    if "N" in jet.analytic:
        kw["N"] = QuatField(sub, coarse(jet.N.values))
    if "dN" in jet.analytic:
        kw["dN"] = Form1(sub, coarse(jet.dN.a_u), coarse(jet.dN.a_v))
    c = build_jet(QuatField(sub, coarse(jet.f.values)), **kw)
    metric = max(_rel_gap(coarse(jet.conf_factor), c.conf_factor),
                 _rel_gap(coarse(qnorm2(jet.df.a_v)), qnorm2(c.df.a_v)))
    H = float(np.max(np.abs(coarse(jet.H) - c.H)) / (np.max(np.abs(jet.H)) + 1e-300))
    return metric, H


def recover_lambda(jet_minus: SurfaceJet, jet_plus: SurfaceJet, base=None, sign_hint=None,
                   metric_tol=None, H_tol=None) -> QuatField:
    """Unit spin factor ``lam`` with ``df_+ = conj(lam) df_- lam``.

    Pointwise, the rotation taking the orthonormalized frame of ``df_-`` to
    that of ``df_+`` is converted to a quaternion; signs are then made
    continuous from ``base``.  The remaining global sign is chosen so that
    ``lam(base)`` has nonnegative inner product with ``sign_hint`` (default
    -1, which keeps ``lam`` away from 1 at the base point).

    Both jets must describe a Bonnet pair: metric gap below ``metric_tol``
    and mean-curvature gap below ``H_tol``.  Sampled jets carry truncation
    error, so each tolerance defaults to ``1e-6`` plus twice the summed
    error bars of both jets (see ``jet_error_bars``).
    """
    if jet_minus.grid != jet_plus.grid:
        raise BonnetError("jets live on different grids")
    metric, H = bonnet_gaps(jet_minus, jet_plus)
    if metric_tol is None or H_tol is None:
        bm, bp = jet_error_bars(jet_minus), jet_error_bars(jet_plus)
        metric_tol = 1e-6 + 2.0 * (bm[0] + bp[0]) if metric_tol is None else metric_tol
        H_tol = 1e-6 + 2.0 * (bm[1] + bp[1]) if H_tol is None else H_tol
    if metric > metric_tol:
        raise BonnetError(f"not a Bonnet pair: metric gap {metric:.3g} > {metric_tol:.3g}")
    if H > H_tol:
        raise BonnetError(f"not a Bonnet pair: mean curvature gap {H:.3g} > {H_tol:.3g}")
    g = jet_minus.grid
    base = g.center if base is None else tuple(base)
    R = _frames(jet_plus.df) @ np.swapaxes(_frames(jet_minus.df), -1, -2)
    lam = qconj(from_rotation_matrix(R))
    lam = kernels.propagate_signs(lam, int(base[0]), int(base[1]))
    hint = np.array([-1.0, 0, 0, 0]) if sign_hint is None else _q(sign_hint)
    if float(lam[base[0], base[1]] @ hint) < 0.0:
        lam = -lam
    return QuatField(g, lam)


def _q(x):
    return x.as_array() if isinstance(x, Quaternion) else np.asarray(x, dtype=float)


@dataclass(frozen=True, eq=False)
class RecoveredIsothermic:
    f: QuatField
    f_star: QuatField
    df: Form1
    r: Quaternion
    tried: tuple
    imag_residual: float
    path_residual: float
    wedge_residual: float
    reproduce_minus: float
    reproduce_plus: float

    def residuals(self):
        return {"f_star_imag": self.imag_residual, "path": self.path_residual,
                "df_wedge_dfstar": self.wedge_residual,
                "reproduce_minus": self.reproduce_minus, "reproduce_plus": self.reproduce_plus}


_R_CANDIDATES = (("1", Quaternion(1.0)), ("i", ImQuaternion(1, 0, 0)),
                 ("j", ImQuaternion(0, 1, 0)), ("k", ImQuaternion(0, 0, 1)))


def recover_isothermic(jet_minus: SurfaceJet, lam: QuatField, r=None, base=None,
                       gap_tol=1e-6) -> RecoveredIsothermic:
    """Isothermic surface and dual from one partner and the unit spin factor.

    ``lam`` is first right-multiplied by the unit quaternion ``r`` (which
    rotates the partners against each other).  With ``r=None`` the choices
    1, i, j, k are tried in turn until ``lam r - 1`` stays above ``gap_tol``.
    """
    g = jet_minus.grid
    base = g.center if base is None else tuple(base)
    L = lam.values
    if np.max(np.abs(qnorm(L) - 1.0)) > 1e-8:
        raise BonnetError("spin factor must have unit norm")
    candidates = _R_CANDIDATES if r is None else (("given", r if isinstance(r, Quaternion)
                                                   else Quaternion.from_array(r)),)
    tried = []
    for name, rq in candidates:
        Lr = qmul(L, rq.as_array())
        m = Lr.copy()
        m[..., 0] -= 1.0
        gap = float(np.min(qnorm(m)))
        tried.append((name, gap))
        if gap > gap_tol:
            break
    else:
        raise BonnetError(f"lam r - 1 vanishes for every tried r: {tried}")

    minv = qinv(m)
    fs = minv.copy()
    fs[..., 0] += 0.5
    imag_res = float(np.max(np.abs(fs[..., 0]) / np.maximum(qnorm(fs), 1.0)))
    fs[..., 0] = 0.0
    f_star = QuatField(g, fs)

    du = sandwich(m, jet_minus.df.a_u)
    dv = sandwich(m, jet_minus.df.a_v)
    du[..., 0] = 0.0
    dv[..., 0] = 0.0
    df = Form1(g, du, dv)
    f, path = integrate(df, base)

    dfs = d_of_function(f_star)
    w = wedge(df, dfs).norm() / (np.sqrt(qnorm2(du)) * dfs.pointwise_norm())
    # spin transforms of f by -+1/2 + f* give back df_- and conj(lam r) df_- (lam r)
    lm_rec = fs.copy()
    lm_rec[..., 0] = -0.5
    lp_rec = fs.copy()
    lp_rec[..., 0] = 0.5
    rep_m = _form_gap(sandwich(lm_rec, du), sandwich(lm_rec, dv), jet_minus.df.a_u, jet_minus.df.a_v)
    target_u = sandwich(Lr, jet_minus.df.a_u)
    target_v = sandwich(Lr, jet_minus.df.a_v)
    rep_p = _form_gap(sandwich(lp_rec, du), sandwich(lp_rec, dv), target_u, target_v)
    return RecoveredIsothermic(f, f_star, df, rq, tuple(tried), imag_res, path,
                               float(np.max(w)), rep_m, rep_p)


def _form_gap(au, av, bu, bv):
    scale = np.maximum(qnorm(bu), qnorm(bv))
    return float(np.max(np.maximum(qnorm(au - bu), qnorm(av - bv)) / scale))


def optimal_rotation(P, Q):
    """Unit quaternion q minimizing sum |q p q^-1 - q_i|^2 over centred points.

    Closed form: q is the top eigenvector of the symmetric 4x4 matrix built
    from the cross-covariance of P and Q.
    """
    S = P.T @ Q
    (xx, xy, xz), (yx, yy, yz), (zx, zy, zz) = S
    M = np.array([
        [xx + yy + zz, yz - zy, zx - xz, xy - yx],
        [yz - zy, xx - yy - zz, xy + yx, zx + xz],
        [zx - xz, xy + yx, -xx + yy - zz, yz + zy],
        [xy - yx, zx + xz, yz + zy, -xx - yy + zz],
    ])
    w, V = np.linalg.eigh(M)
    return V[:, -1]


def congruence_distance(f: QuatField, g: QuatField) -> float:
    """RMS distance between ``f`` and ``g`` after the best proper rigid motion."""
    if f.grid != g.grid:
        raise BonnetError("fields live on different grids")
    P = f.vec.reshape(-1, 3)
    Q = g.vec.reshape(-1, 3)
    P = P - P.mean(axis=0)
    Q = Q - Q.mean(axis=0)
    R = to_rotation_matrix(optimal_rotation(P, Q))
    return float(np.sqrt(np.mean(np.sum((P @ R.T - Q) ** 2, axis=-1))))


def rigid_motion(f: QuatField, q, t=(0.0, 0.0, 0.0)) -> QuatField:
    """``q f q^-1 + t`` for unit ``q``."""
    q = _q(q)
    out = qmul(qmul(q, f.values), qconj(q))
    out[..., 0] = 0.0
    out[..., 1:] += np.asarray(t, dtype=float)
    return QuatField(f.grid, out)
