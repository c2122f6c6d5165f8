"""Isothermic seeds: generators in conformal curvature-line parameters,
the closed anti-conformal form tau, and the dual surface f*.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .grid import Form1, Grid, QuatField, d_of_form, integrate, star, wedge
from .quat import imag, qinv
from .surface import SurfaceJet, build_jet


class SeedError(ValueError):
    pass


def _analytic_jet(grid, fn, shear=0.0, exact_dN=False):
    """Sample ``fn(U, V) -> (f, f_u, f_v, N, N_u, N_v)`` (3-vector arrays).

    ``shear`` reparametrizes by ``(u, v) -> (u, v + shear u)``, which breaks
    conformality on purpose; derivatives follow by the chain rule.
    """
    U, V = grid.mesh()
    f, fu, fv, N, Nu, Nv = fn(U, V + shear * U)
    fu = fu + shear * fv
    Nu = Nu + shear * Nv
    df = Form1(grid, imag(fu), imag(fv))
    Nf = QuatField(grid, imag(N))
    dN = Form1(grid, imag(Nu), imag(Nv)) if exact_dN else None
    return build_jet(QuatField(grid, imag(f)), df=df, N=Nf, dN=dN)


def _stack(*c):
    return np.stack(np.broadcast_arrays(*c), axis=-1)


def _check_period(grid):
    u0, u1 = grid.u_range
    if u1 - u0 >= 2 * np.pi:
        raise SeedError("u-range must lie strictly inside one period (simply connected domain)")


def gen_cylinder(grid: Grid, radius: float = 1.0, shear: float = 0.0, exact_dN=False) -> SurfaceJet:
    """``f = r (cos u, sin u, v)``; outward normal, H = 1/(2r)."""
    _check_period(grid)
    if radius <= 0:
        raise SeedError("radius must be positive")
    r = float(radius)

    def fn(U, V):
        c, s, z = np.cos(U), np.sin(U), np.zeros_like(U)
        return (_stack(r * c, r * s, r * V), _stack(-r * s, r * c, z), _stack(z, z, r + z),
                _stack(c, s, z), _stack(-s, c, z), _stack(z, z, z))

    return _analytic_jet(grid, fn, shear, exact_dN)


def gen_catenoid(grid: Grid, shear: float = 0.0, exact_dN=False) -> SurfaceJet:
    """``f = (cosh v cos u, cosh v sin u, v)``, a minimal surface."""
    _check_period(grid)

    def fn(U, V):
        c, s, z = np.cos(U), np.sin(U), np.zeros_like(U)
        ch, sh = np.cosh(V), np.sinh(V)
        return (_stack(ch * c, ch * s, V), _stack(-ch * s, ch * c, z), _stack(sh * c, sh * s, 1 + z),
                _stack(c / ch, s / ch, -sh / ch), _stack(-s / ch, c / ch, z),
                _stack(-c * sh / ch**2, -s * sh / ch**2, -1 / ch**2))

    return _analytic_jet(grid, fn, shear, exact_dN)


def gen_sphere_stereo(grid: Grid, shear: float = 0.0, exact_dN=False) -> SurfaceJet:
    """Inverse stereographic projection onto the unit sphere.

    The orientation ``J d/du = d/dv`` makes the normal point inward
    (``N = -f``), so H = -1.
    """

    def fn(U, V):
        s = U * U + V * V
        d = 1.0 + s
        f = _stack(2 * U, 2 * V, s - 1) / d[..., None]
        fu = _stack(2 * d - 4 * U * U, -4 * U * V, 4 * U) / (d * d)[..., None]
        fv = _stack(-4 * U * V, 2 * d - 4 * V * V, 4 * V) / (d * d)[..., None]
        return f, fu, fv, -f, -fu, -fv

    return _analytic_jet(grid, fn, shear, exact_dN)


@dataclass(frozen=True, eq=False)
class Profile:
    """Meridian curve ``t -> (r(t), h(t))`` of a surface of revolution."""

    t: np.ndarray
    r: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        if len(self.t) < 4 or np.any(np.diff(self.t) <= 0):
            raise SeedError("profile needs >= 4 samples with strictly increasing t")
        if np.any(np.asarray(self.r) <= 0):
            raise SeedError("profile radius must be positive")

    @classmethod
    def from_functions(cls, r, h, t_range, n=2001):
        t = np.linspace(*t_range, n)
        return cls(t, np.asarray(r(t), dtype=float), np.asarray(h(t), dtype=float))

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        try:
            cols = {k: np.array([float(row[k]) for row in rows]) for k in ("t", "r", "h")}
        except KeyError as exc:
            raise SeedError(f"profile CSV needs columns t, r, h (missing {exc})") from None
        return cls(cols["t"], cols["r"], cols["h"])


def gen_revolution(grid: Grid, profile: Profile, t_start: float | None = None,
                   shear: float = 0.0, exact_dN=False) -> SurfaceJet:
    """Surface of revolution in conformal curvature-line parameters.

    The profile is interpolated by cubic splines and reparametrized by
    ``dt/dv = r / |c'|`` so that ``|f_u| = |f_v| = r``; ``t(v0) = t_start``
    (default: first profile sample).
    """
    _check_period(grid)
    rs = CubicSpline(profile.t, profile.r)
    hs = CubicSpline(profile.t, profile.h)
    t_lo, t_hi = float(profile.t[0]), float(profile.t[-1])
    t0 = t_lo if t_start is None else float(t_start)
    U, V = grid.mesh()
    V = V + shear * U
    t_of_v = _reparametrize(rs, hs, t0, grid.v0, V, (t_lo, t_hi))
    if np.any(np.diff(t_of_v, axis=1) <= 0):
        raise SeedError("non-monotone reparametrization")
    if np.any(rs(t_of_v) <= 0):
        raise SeedError("vanishing radius along the profile")

    T = t_of_v
    r, r1, r2 = rs(T), rs(T, 1), rs(T, 2)
    h, h1, h2 = hs(T), hs(T, 1), hs(T, 2)
    sp = np.hypot(r1, h1)
    tv = r / sp
    c, s, z = np.cos(U), np.sin(U), np.zeros_like(U)
    dsp = (r1 * r2 + h1 * h2) / sp
    gh = (h2 * sp - h1 * dsp) / sp**2
    gr = (r2 * sp - r1 * dsp) / sp**2
    f = _stack(r * c, r * s, h)
    fv = _stack(tv * r1 * c, tv * r1 * s, tv * h1)
    Nv = tv[..., None] * _stack(gh * c, gh * s, -gr)
    fu = _stack(-r * s, r * c, z) + shear * fv
    N = _stack(h1 * c / sp, h1 * s / sp, -r1 / sp)
    Nu = _stack(-h1 * s / sp, h1 * c / sp, z) + shear * Nv
    df = Form1(grid, imag(fu), imag(fv))
    dN = Form1(grid, imag(Nu), imag(Nv)) if exact_dN else None
    return build_jet(QuatField(grid, imag(f)), df=df, N=QuatField(grid, imag(N)), dN=dN)


def _reparametrize(rs, hs, t0, v0, V, t_bounds):
    """Solve ``dt/dv = r(t) / |c'(t)|`` with ``t(v0) = t0`` and evaluate at V."""
    t_lo, t_hi = t_bounds

    def rhs(v, t):
        return rs(t) / np.hypot(rs(t, 1), hs(t, 1))

    def leave(v, t):
        return min(t[0] - t_lo, t_hi - t[0]) + 1e-12

    leave.terminal = True
    out = np.empty_like(V)
    for mask, stop in ((V >= v0, V.max()), (V < v0, V.min())):
        if not mask.any() or stop == v0:
            out[mask] = t0
            continue
        sol = solve_ivp(rhs, (v0, float(stop)), [t0], method="DOP853", dense_output=True,
                        rtol=1e-12, atol=1e-12, events=leave)
        if sol.status != 0:
            raise SeedError("v-range maps outside the profile's t-range")
        out[mask] = sol.sol(V[mask])[0]
    return out


def make_tau(jet: SurfaceJet) -> Form1:
    """``tau = -f_u^{-1} du + f_v^{-1} dv`` for curvature-line parameters."""
    try:
        return Form1(jet.grid, -qinv(jet.df.a_u), qinv(jet.df.a_v))
    except ZeroDivisionError:
        raise SeedError("vanishing partial derivative") from None
    except ValueError as exc:
        raise SeedError(f"vanishing partial derivative: {exc}") from None


def make_cmc_tau(jet: SurfaceJet, tol: float = 1e-6, zero_tol: float = 5e-2) -> Form1:
    """For constant mean curvature, ``tau = omega`` (the trace-free part of dN).

    ``omega`` counts as zero when max |omega| is below ``zero_tol`` times
    max |dN|; on sampled umbilic surfaces omega is pure O(h^2) noise.
    """
    size = float(np.max(jet.omega.pointwise_norm()) / (np.max(jet.dN.pointwise_norm()) + 1e-300))
    if size < zero_tol:
        raise SeedError("tau = 0 is not a valid isothermic form (totally umbilic surface)")
    spread = float(np.max(np.abs(jet.H - jet.H.mean())))
    if spread > tol * max(1.0, abs(float(jet.H.mean()))):
        raise SeedError(f"mean curvature is not constant (spread {spread:.3g})")
    return jet.omega


def dual_surface(tau: Form1, base=None):
    """``f*`` with ``df* = tau`` and ``f*(base) = 0``; returns ``(f*, path_residual)``."""
    return integrate(tau, base)


def sphere_inversion(f: QuatField) -> QuatField:
    """Moebius inversion ``f -> f^{-1}`` of an imaginary-valued field."""
    return QuatField(f.grid, qinv(f.values))


@dataclass(frozen=True, eq=False)
class IsothermicSeed:
    jet: SurfaceJet
    tau: Form1
    f_star: QuatField
    base: tuple
    dtau_residual: float
    anticonf_residual: float
    wedge_residual: float
    path_residual: float

    def residuals(self):
        return {"dtau": self.dtau_residual, "anticonformal": self.anticonf_residual,
                "df_wedge_tau": self.wedge_residual, "dual_path": self.path_residual}


def tau_residuals(jet: SurfaceJet, tau: Form1):
    """``(closedness, anti-conformality, df ^ tau)`` residuals of a candidate tau.

    Closedness is max |d tau| relative to max |tau|; the other two are
    pointwise relative maxima.
    """
    tn = tau.pointwise_norm()
    if float(np.max(tn)) == 0.0:
        raise SeedError("tau vanishes identically")
    dtau = float(np.max(d_of_form(tau).norm()) / np.max(tn))
    anti = float(np.max((star(tau) + tau.lmul(jet.N)).pointwise_norm() / tn))
    w = float(np.max(wedge(jet.df, tau).norm() / (np.sqrt(jet.conf_factor) * tn)))
    return dtau, anti, w


def make_seed(jet: SurfaceJet, method: str = "curvature_lines", base=None,
              cmc_tol: float = 1e-6) -> IsothermicSeed:
    if method == "curvature_lines":
        tau = make_tau(jet)
    elif method == "cmc":
        tau = make_cmc_tau(jet, tol=cmc_tol)
    else:
        raise SeedError(f"unknown tau method {method!r}")
    base = jet.grid.center if base is None else tuple(base)
    dtau, anti, w = tau_residuals(jet, tau)
    f_star, path = dual_surface(tau, base)
    return IsothermicSeed(jet, tau, f_star, base, dtau, anti, w, path)


def dual_jet(seed: IsothermicSeed) -> SurfaceJet:
    """Jet of the dual surface, using ``tau`` as its exact differential."""
    return build_jet(seed.f_star, df=seed.tau)

