"""End-to-end pipeline stages driven by a RunConfig.

Each stage extends a shared context and records residual blocks and
pass/fail gates.  A stage stops the pipeline when one of its gates fails,
since later stages would run on invalid input.
"""
from __future__ import annotations

import numpy as np

from .bonnet import (BonnetError, construct_pair, recover_isothermic, recover_lambda)
from .config import RunConfig
from .convergence import converges, study
from .grid import Grid
from .isothermic import (Profile, SeedError, gen_catenoid, gen_cylinder, gen_revolution,
                         gen_sphere_stereo, make_seed, make_tau, tau_residuals)
from .quat import ImQuaternion, qinv, qmul, qnorm
from .spin import SpinError
from .surface import (DegenerateImmersionError, build_jet, codazzi_residual,
                      conformality_residual, laplace_residual, normal_residual)

ORDER = ("generate", "dual", "bonnet", "roundtrip")
PIPELINE_ERRORS = (SeedError, BonnetError, SpinError, DegenerateImmersionError)


def make_grid(cfg: RunConfig, grid: Grid | None = None) -> Grid:
    if grid is not None:
        return grid
    g = cfg.grid
    return Grid.from_ranges(g.nu, g.nv, g.u_range, g.v_range)


def make_jet(cfg: RunConfig, grid: Grid):
    s = cfg.seed
    if s.name == "cylinder":
        return gen_cylinder(grid, s.radius, shear=s.shear)
    if s.name == "catenoid":
        return gen_catenoid(grid, shear=s.shear)
    if s.name == "sphere":
        return gen_sphere_stereo(grid, shear=s.shear)
    return gen_revolution(grid, Profile.from_csv(s.profile), s.t_start, shear=s.shear)


class Run:
    """Mutable context of one pipeline invocation."""

    def __init__(self, cfg: RunConfig, grid: Grid | None = None):
        self.cfg = cfg
        self.tol = cfg.tolerances
        self.grid = make_grid(cfg, grid)
        self.base = cfg.params.base or self.grid.center
        self.blocks = {}
        self.gates = {}
        self.meshes = {}
        self.failed_stage = None
        self.error = None

    def gate(self, name, value, tol, source, lower=False):
        value = float(value)
        ok = value > tol if lower else value <= tol
        self.gates[name] = {"value": value, "tol": float(tol), "kind": "min" if lower else "max",
                            "pass": bool(ok), "source": source}
        return ok

    @property
    def passed(self):
        return self.error is None and all(g["pass"] for g in self.gates.values())

    def run(self, stage):
        stop = ORDER.index(stage)
        for name in ORDER[: stop + 1]:
            try:
                ok = getattr(self, "_" + name)()
            except PIPELINE_ERRORS as exc:
                self.error = {"stage": name, "type": type(exc).__name__, "message": str(exc)}
                self.failed_stage = name
                return self
            if not ok:
                self.failed_stage = name
                return self
        return self

    def _generate(self):
        jet = self.jet = make_jet(self.cfg, self.grid)
        self.meshes["seed"] = jet.f
        self.blocks["seed"] = {
            "conformality": conformality_residual(jet),
            "normal": normal_residual(jet),
            "laplace": laplace_residual(jet),
            "codazzi": codazzi_residual(jet),
            "H_mean": float(jet.H.mean()),
            "H_spread": float(np.max(jet.H) - np.min(jet.H)),
            "H_component_gap": float(np.max(np.abs(jet.H - jet.H_dv))),
            "max_radius": float(np.max(qnorm(jet.f.values))),
            "min_radius": float(np.min(qnorm(jet.f.values))),
        }
        ok = self.gate("seed.conformality", self.blocks["seed"]["conformality"],
                       self.tol["conformality"], "surface.conformality_residual")
        ok &= self.gate("seed.normal", self.blocks["seed"]["normal"], self.tol["normal"],
                        "surface.build_jet")
        return ok

    def _dual(self):
        method = self.cfg.seed.tau
        seed = self.seed = make_seed(self.jet, method, self.base, cmc_tol=self.tol["cmc_spread"])
        self.meshes["dual"] = seed.f_star
        dual = build_jet(seed.f_star, df=seed.tau)
        block = dict(seed.residuals())
        block["dual_normal_flip"] = float(np.max(qnorm(dual.N.values + self.jet.N.values)))
        self.blocks["dual"] = block
        ok = self.gate("dual.dtau", block["dtau"], self.tol["dtau"], "isothermic.make_seed")
        ok &= self.gate("dual.anticonformal", block["anticonformal"], self.tol["anticonformal"],
                        "isothermic.make_seed")
        ok &= self.gate("dual.df_wedge_tau", block["df_wedge_tau"], self.tol["df_wedge_tau"],
                        "isothermic.make_seed")
        return ok

    def _bonnet(self):
        p = self.cfg.params
        t = self.tol
        b = self.bundle = construct_pair(
            self.seed, p.epsilon, p.a, allow_degenerate=p.allow_degenerate,
            gates={"metric_gap": t["metric_gap"], "H_gap": t["H_gap"], "dirac_plus": t["dirac"],
                   "dirac_minus": t["dirac"], "congruence_variation": t["congruence_variation"]})
        self.meshes["plus"] = b.f_plus
        self.meshes["minus"] = b.f_minus
        self.blocks["bonnet"] = dict(b.report.residuals, degenerate=b.degenerate)
        ok = True
        for name, g in b.report.gates.items():
            ok &= self.gate("bonnet." + name, g["value"], g["tol"], g["source"],
                            lower=g["kind"] == "min")
        if b.degenerate:
            gap = float(np.max(qnorm(b.f_plus.values - b.f_minus.values)))
            self.blocks["bonnet"]["partner_gap"] = gap
            ok &= self.gate("bonnet.degenerate_coincidence", gap, 0.0, "bonnet.construct_pair")
        return ok

    def _roundtrip(self):
        b = self.bundle
        if b.degenerate:
            self.blocks["roundtrip"] = {"skipped": "degenerate pair"}
            return True
        p = self.cfg.params
        jm, jp = build_jet(b.f_minus), build_jet(b.f_plus)
        mu = qmul(qinv(b.lambda_minus.values), b.lambda_plus.values)
        lam = recover_lambda(jm, jp, self.base, sign_hint=mu[self.base[0], self.base[1]])
        r = None if p.r == "auto" else {"1": (1, 0, 0, 0), "i": (0, 1, 0, 0),
                                        "j": (0, 0, 1, 0), "k": (0, 0, 0, 1)}[p.r]
        rec = self.recovered = recover_isothermic(jm, lam, r=r, base=self.base)
        self.meshes["recovered_seed"] = rec.f
        self.meshes["recovered_dual"] = rec.f_star
        mu_u = mu / qnorm(mu)[..., None]
        block = dict(rec.residuals())
        block["lambda_error"] = float(np.max(qnorm(lam.values - mu_u)))
        block["r_tried"] = [[n, g] for n, g in rec.tried]
        ok = self.gate("roundtrip.f_star_imag", rec.imag_residual, self.tol["f_star_imag"],
                       "bonnet.recover_isothermic")
        if rec.r.as_array()[0] == 1.0:
            err = fstar_scale_error(self.seed, rec, p.epsilon, p.a, self.base)
            block["fstar_scale_error"] = err
            ok &= self.gate("roundtrip.fstar_scale", err, self.tol["fstar_C"] * self.grid.h**2,
                            "bonnet.recover_isothermic")
        self.blocks["roundtrip"] = block
        return ok

    def payload(self, stage):
        cfg = self.cfg.to_dict()
        cfg.pop("out")
        return {"stage": stage, "config": cfg, "grid": self.grid.to_dict(),
                "residuals": self.blocks, "gates": self.gates, "error": self.error,
                "failed_stage": self.failed_stage, "passed": self.passed}


def fstar_scale_error(seed, rec, epsilon, a, base):
    """max | recovered f* - (f* + a)/(2 eps) | after matching at ``base``."""
    target = (seed.f_star.values + ImQuaternion(*a).as_array()) / (2.0 * epsilon)
    d = rec.f_star.values - target
    d = d - d[base[0], base[1]]
    return float(np.max(qnorm(d)))


def refinement_errors(cfg: RunConfig, grid: Grid):
    """Quantities that must vanish as O(h^2) on one grid level."""
    run = Run(cfg, grid).run("roundtrip")
    if run.error:
        raise RuntimeError(run.error["message"])
    jet_fd = build_jet(run.jet.f)
    _, _, wedge_fd = tau_residuals(jet_fd, make_tau(jet_fd))
    out = {"dtau": run.blocks["dual"]["dtau"], "df_wedge_tau_fd": wedge_fd}
    if "bonnet" in run.blocks and not run.bundle.degenerate:
        out["dirac_plus"] = run.blocks["bonnet"]["dirac_plus"]
        out["dirac_minus"] = run.blocks["bonnet"]["dirac_minus"]
        if "fstar_scale_error" in run.blocks["roundtrip"]:
            out["fstar_scale_error"] = run.blocks["roundtrip"]["fstar_scale_error"]
    return out


def verify(cfg: RunConfig) -> Run:
    run = Run(cfg).run("roundtrip")
    if run.passed and cfg.levels > 0:
        table = study(run.grid, cfg.levels, lambda g: refinement_errors(cfg, g))
        run.blocks["convergence"] = table
        for name, errs in table["errors"].items():
            order = table["order"][name]
            ok = converges(table["h"], errs, cfg.tolerances["min_order"])
            run.gates["convergence." + name] = {
                "value": float("inf") if order is None else float(order),
                "tol": cfg.tolerances["min_order"], "kind": "min", "pass": bool(ok),
                "source": "convergence.study"}
    return run
