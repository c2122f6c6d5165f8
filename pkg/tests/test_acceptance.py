"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line naming the criterion and the
measured quantities, then re-raises on failure so pytest stays the judge.
"""
import contextlib
import dataclasses
import itertools
import json

import numpy as np
import pytest

from bonnetforge.bonnet import (congruence_distance, construct_pair, recover_isothermic,
                                recover_lambda, rigid_motion)
from bonnetforge.cli import main
from bonnetforge.convergence import converges, observed_order
from bonnetforge.grid import Form1, Grid, QuatField, integrate, star, wedge
from bonnetforge.io import payload_bytes, read_report
from bonnetforge.isothermic import (Profile, SeedError, gen_catenoid, gen_cylinder, gen_revolution,
                                    gen_sphere_stereo, make_cmc_tau, make_seed, make_tau,
                                    tau_residuals)
from bonnetforge.quat import qinv, qmul, qnorm, qnorm2
from bonnetforge.spin import apply_spin_pointwise, hdf_criterion
from bonnetforge.surface import build_jet, conformality_residual

from conftest import U_RANGE, random_imag, random_quats

LEVELS = (33, 65, 129)
EPSILONS = (0.25, 0.5, 2.0)
A_VALUES = ((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), (0.5, 0.5, -0.5))
TORUS = Profile.from_functions(lambda t: 2 + np.cos(t), np.sin, (-2.5, 2.5))
SEEDS = {
    "cylinder": (gen_cylinder, (-1.0, 1.0)),
    "catenoid": (gen_catenoid, (-1.0, 1.0)),
    "torus": (lambda g: gen_revolution(g, TORUS), (-0.5, 0.5)),
}


@pytest.fixture
def verdict(capsys):
    @contextlib.contextmanager
    def run(number, title):
        facts = {}
        try:
            yield facts
        except BaseException:
            with capsys.disabled():
                print(f"\nFAIL criterion {number}: {title} {_fmt(facts)}")
            raise
        with capsys.disabled():
            print(f"\nPASS criterion {number}: {title} {_fmt(facts)}")
    return run


def _fmt(facts):
    return " ".join(f"{k}={v:.3g}" if isinstance(v, float) else f"{k}={v}"
                    for k, v in facts.items())


def seed_grid(name, n):
    return Grid.from_ranges(n, n, U_RANGE, SEEDS[name][1])


def seed_jet(name, n):
    return SEEDS[name][0](seed_grid(name, n))


def test_criterion_1_algebra(rng, verdict):
    with verdict(1, "algebraic identities over 1e4 samples") as out:
        n = 10_000
        p, q = random_quats(rng, n), random_quats(rng, n)
        norm = np.max(np.abs(qnorm(qmul(p, q)) - qnorm(p) * qnorm(q)) / (qnorm(p) * qnorm(q)))
        a, b = random_imag(rng, n), random_imag(rng, n)
        want = np.concatenate([-np.einsum("ij,ij->i", a[:, 1:], b[:, 1:])[:, None],
                               np.cross(a[:, 1:], b[:, 1:])], axis=1)
        im = np.max(np.abs(qmul(a, b) - want))
        g = Grid.from_ranges(100, 100, (0, 1), (0, 1))
        alpha = Form1(g, rng.normal(size=g.shape + (4,)), rng.normal(size=g.shape + (4,)))
        beta = Form1(g, rng.normal(size=g.shape + (4,)), rng.normal(size=g.shape + (4,)))
        sa, sb = star(alpha), star(beta)
        key = np.max(np.abs(wedge(alpha, beta).q - (qmul(alpha.a_u, sb.a_u) - qmul(sa.a_u, beta.a_u))))
        ss = star(star(alpha))
        star2 = max(np.max(np.abs(ss.a_u + alpha.a_u)), np.max(np.abs(ss.a_v + alpha.a_v)))
        out.update(norm=norm, im=im, wedge=key, star2=star2)
        assert max(norm, im, key, star2) <= 1e-13


def test_criterion_2_convention_oracle(verdict):
    with verdict(2, "cylinder conventions and catenoid H") as out:
        cyl = gen_cylinder(seed_grid("cylinder", 65), exact_dN=True)
        conf = conformality_residual(cyl)
        H_spread = float(np.max(np.abs(cyl.H - cyl.H_dv)))
        H_err = float(np.max(np.abs(cyl.H - 0.5)))
        hs, errs = [], []
        for n in LEVELS:
            jet = seed_jet("catenoid", n)
            hs.append(jet.grid.h)
            errs.append(float(np.max(np.abs(jet.H))))
        C = max(e / h**2 for h, e in zip(hs, errs))
        order = observed_order(hs, errs)
        out.update(star_df=conf, H_du_dv=H_spread, H_minus_half=H_err, catenoid_C=C, order=order)
        assert conf <= 1e-12 and H_spread <= 1e-12 and H_err <= 1e-12
        assert order >= 1.9


def test_criterion_3_isothermic(verdict):
    with verdict(3, "tau closedness, df^tau and the catenoid dual") as out:
        for name in SEEDS:
            hs, d_errs, w_errs = [], [], []
            for n in LEVELS:
                jet = build_jet(seed_jet(name, n).f)
                dtau, _, w = tau_residuals(jet, make_tau(jet))
                hs.append(jet.grid.h)
                d_errs.append(dtau)
                w_errs.append(w)
            out[f"{name}_dtau_order"] = observed_order(hs, d_errs)
            out[f"{name}_wedge_order"] = observed_order(hs, w_errs)
            assert converges(hs, d_errs) and converges(hs, w_errs), (name, d_errs, w_errs)
        hs, errs = [], []
        for n in LEVELS:
            seed = make_seed(seed_jet("catenoid", n))
            d = seed.f_star.values - seed.jet.N.values
            errs.append(float(np.max(qnorm(d - d[seed.base]))))
            hs.append(seed.jet.grid.h)
        out["dual_minus_N_order"] = observed_order(hs, errs)
        assert converges(hs, errs)


def test_criterion_4_bonnet_forward(verdict):
    with verdict(4, "Bonnet pairs over seeds x epsilon x a") as out:
        worst_metric = worst_H = 0.0
        worst_order = np.inf
        worst_ratio = np.inf
        q = np.array([0.5, 0.5, -0.5, 0.5])
        for name in SEEDS:
            seeds = {n: make_seed(seed_jet(name, n)) for n in LEVELS}
            for eps, a in itertools.product(EPSILONS, A_VALUES):
                hs, dp, dm = [], [], []
                for n in LEVELS:
                    b = construct_pair(seeds[n], eps, a)
                    r = b.report.residuals
                    hs.append(b.seed.jet.grid.h)
                    dp.append(r["dirac_plus"])
                    dm.append(r["dirac_minus"])
                worst_metric = max(worst_metric, r["metric_gap"])
                worst_H = max(worst_H, r["H_gap"])
                assert r["metric_gap"] <= 1e-12 and r["H_gap"] <= 1e-12, (name, eps, a)
                assert converges(hs, dp) and converges(hs, dm), (name, eps, a, dp, dm)
                worst_order = min(worst_order, observed_order(hs, dp), observed_order(hs, dm))
                # noise floor: distance of f_+ to a rigidly moved copy of itself
                floor = congruence_distance(b.f_plus, rigid_motion(b.f_plus, q, (1.0, -2.0, 0.5)))
                floor = max(floor, np.finfo(float).eps * float(np.max(qnorm(b.f_plus.values))))
                dist = congruence_distance(b.f_plus, b.f_minus)
                worst_ratio = min(worst_ratio, dist / floor)
                assert dist > 1e3 * floor, (name, eps, a, dist, floor)
        out.update(metric_gap=worst_metric, H_gap=worst_H, min_dirac_order=worst_order,
                   min_distance_over_floor=worst_ratio)


def _round_trip_error(n, eps, a):
    seed = make_seed(seed_jet("cylinder", n))
    b = construct_pair(seed, eps, a)
    jm, jp = build_jet(b.f_minus), build_jet(b.f_plus)
    mu = qmul(qinv(b.lambda_minus.values), b.lambda_plus.values)
    mu /= qnorm(mu)[..., None]
    lam = recover_lambda(jm, jp, sign_hint=mu[seed.base])
    rec = recover_isothermic(jm, lam)
    want = (seed.f_star.values + [0.0, *a]) / (2 * eps)
    d = rec.f_star.values - want
    return seed.jet.grid.h, float(np.max(qnorm(d - d[seed.base])))


def test_criterion_5_bonnet_converse(verdict):
    C = 10.0
    with verdict(5, f"round trip recovers f*/(2 eps) within {C:g} h^2") as out:
        hs, errs = zip(*(_round_trip_error(n, 0.5, (0.0, 0.0, 0.0)) for n in LEVELS))
        out["order"] = observed_order(hs, errs)
        out["C_half"] = max(e / h**2 for h, e in zip(hs, errs))
        assert converges(hs, errs)
        assert all(e <= C * h**2 for h, e in zip(hs, errs))
        worst = 0.0
        for eps, a in itertools.product((0.25, 2.0), A_VALUES):
            h, e = _round_trip_error(65, eps, a)
            worst = max(worst, e / h**2)
        out["C_general"] = worst
        assert worst <= C


def test_criterion_6_degenerations(verdict):
    with verdict(6, "epsilon = 0, constant dual, umbilic sphere") as out:
        seed = make_seed(seed_jet("cylinder", 65))
        b = construct_pair(seed, 0.0, (0.0, 0.0, 5.0), allow_degenerate=True)
        out["eps0_gap"] = float(np.max(np.abs(b.f_plus.values - b.f_minus.values)))
        assert b.degenerate and out["eps0_gap"] == 0.0
        flat = dataclasses.replace(seed, f_star=QuatField(seed.jet.grid,
                                                          np.zeros_like(seed.f_star.values)))
        fb = construct_pair(flat, 0.5, (0.0, 1.0, 0.0))
        out["constant_dual_variation"] = fb.report.residuals["congruence_variation"]
        assert not fb.report.gates["congruence_variation"]["pass"] and not fb.report.passed
        sphere = gen_sphere_stereo(Grid.from_ranges(65, 65, (-1, 1), (-1, 1)))
        with pytest.raises(SeedError, match="tau = 0"):
            make_cmc_tau(sphere)
        out["sphere"] = "rejected"


def _respin(jet, form):
    f, _ = integrate(form)
    return build_jet(f, df=form)


def test_criterion_7_spin_relation(rng, verdict):
    with verdict(7, "spin inverse, composition, unit factors, H|df|") as out:
        jet = seed_jet("cylinder", 33)
        g = jet.grid
        lam = rng.normal(size=g.shape + (4,))
        there = apply_spin_pointwise(jet, lam)
        back = apply_spin_pointwise(_respin(jet, there), qinv(lam))
        inverse = max(np.max(np.abs(back.a_u - jet.df.a_u)), np.max(np.abs(back.a_v - jet.df.a_v)))
        mu = rng.normal(size=g.shape + (4,))
        step = apply_spin_pointwise(_respin(jet, there), mu)
        once = apply_spin_pointwise(jet, qmul(lam, mu))
        comp = max(np.max(np.abs(step.a_u - once.a_u)),
                   np.max(np.abs(step.a_v - once.a_v))) / np.max(qnorm(once.a_u))
        unit = lam / qnorm(lam)[..., None]
        conf = float(np.max(np.abs(qnorm2(apply_spin_pointwise(jet, unit).a_u) - jet.conf_factor)))
        hs, dirac, hdf = [], [], []
        for n in LEVELS:
            seed = make_seed(seed_jet("cylinder", n))
            lp = construct_pair(seed, 2.0, (0.5, 0.5, -0.5)).lambda_plus
            new = _respin(seed.jet, apply_spin_pointwise(seed.jet, lp))
            hs.append(seed.jet.grid.h)
            dirac.append(hdf_criterion(seed.jet, lp)[1])
            hdf.append(float(np.max(np.abs(new.H * np.sqrt(new.conf_factor)
                                           - seed.jet.H * np.sqrt(seed.jet.conf_factor)))))
        out.update(inverse=inverse, composition=comp, unit_conf=conf,
                   dirac=dirac[-1], hdf_order=observed_order(hs, hdf))
        assert inverse <= 1e-13 and comp <= 1e-14 and conf <= 1e-12
        assert converges(hs, dirac) and converges(hs, hdf)


@pytest.mark.parametrize("command", ["generate", "dual", "bonnet", "roundtrip", "verify"])
def test_criterion_8_determinism(tmp_path, verdict, command):
    with verdict(8, f"byte-identical outputs for '{command}'") as out:
        outs = []
        for k in range(2):
            cfg = {"run_id": "det", "seed": {"name": "catenoid"}, "grid": {"nu": 65, "nv": 65},
                   "params": {"epsilon": 0.25, "a": [0.5, 0.5, -0.5]},
                   "out": str(tmp_path / f"run{k}")}
            path = tmp_path / f"cfg{k}.json"
            path.write_text(json.dumps(cfg))
            main([command, "--config", str(path)])
            outs.append(tmp_path / f"run{k}")
        reps = [read_report(o / "det_report.json") for o in outs]
        assert payload_bytes(reps[0]["payload"]) == payload_bytes(reps[1]["payload"])
        objs = sorted(p.name for p in outs[0].glob("*.obj"))
        assert objs == sorted(p.name for p in outs[1].glob("*.obj"))
        for name in objs:
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
        out.update(objs=len(objs), sha=reps[0]["payload_sha256"][:12])
