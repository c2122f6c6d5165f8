"""Command-line entry point ``bonnetforge``.

Exit codes: 0 success, 1 a verification gate failed, 2 configuration error,
3 I/O error.
"""
from __future__ import annotations

import argparse
import datetime
import os
import sys

from . import __version__, kernels
from .config import STAGES, ConfigError, load_config, override
from .io import write_obj, write_report
from .pipeline import Run, verify

MESH_STAGES = {
    "generate": ("seed",),
    "dual": ("seed", "dual"),
    "bonnet": ("seed", "dual", "plus", "minus"),
    "roundtrip": ("seed", "dual", "plus", "minus", "recovered_seed", "recovered_dual"),
    "verify": (),
}


def build_parser():
    p = argparse.ArgumentParser(prog="bonnetforge", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=STAGES)
    p.add_argument("--config", help="JSON run configuration")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--levels", type=int, help="refinement levels for verify")
    p.add_argument("--epsilon", type=float, help="real part parameter of the spin factors")
    p.add_argument("--a", help="imaginary translation of the dual, as x,y,z")
    return p


def execute(command, cfg):
    """Run a command; returns ``(Run, files written)``."""
    run = verify(cfg) if command == "verify" else Run(cfg).run(command)
    os.makedirs(cfg.out, exist_ok=True)
    files = []
    for name in MESH_STAGES[command]:
        if name in run.meshes:
            path = os.path.join(cfg.out, f"{cfg.run_id}_{name}.obj")
            write_obj(path, run.meshes[name])
            files.append(path)
    path = os.path.join(cfg.out, f"{cfg.run_id}_report.json")
    sidecar = {"timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
               "backend": kernels.BACKEND, "version": __version__, "out": cfg.out}
    write_report(path, run.payload(command), sidecar)
    files.append(path)
    return run, files


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        cfg = override(cfg, epsilon=args.epsilon, a=args.a, levels=args.levels, out=args.out)
    except ConfigError as exc:
        print(f"bonnetforge: config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"bonnetforge: cannot read config: {exc}", file=sys.stderr)
        return 3
    try:
        run, files = execute(args.command, cfg)
    except OSError as exc:
        print(f"bonnetforge: I/O error: {exc}", file=sys.stderr)
        return 3
    for f in files:
        print(f)
    if run.error:
        print(f"bonnetforge: {run.error['stage']}: {run.error['message']}", file=sys.stderr)
    failed = [n for n, g in run.gates.items() if not g["pass"]]
    for n in failed:
        g = run.gates[n]
        print(f"FAIL {n}: {g['value']:.3e} (tol {g['tol']:.3e})", file=sys.stderr)
    return 0 if run.passed else 1


if __name__ == "__main__":
    sys.exit(main())
