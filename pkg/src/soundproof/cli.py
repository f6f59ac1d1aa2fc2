"""Command line front end.

Subcommands: mesh-gen, mesh-validate, run, spectra, check.
Exit codes: 0 success, 1 check failed / validation violations,
2 configuration error, 3 I/O error, 4 solver failure.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import diagnostics as dg
from . import harness, mesh as meshmod
from .stepper import SolverError

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_SOLVER = 4


def _cmd_mesh_gen(args) -> int:
    m = meshmod.build_regular(args.nx, args.nz, args.lx, args.lz)
    if args.perturb > 0.0:
        m, _, seed, rej = meshmod.accept_perturbed(
            m, args.perturb, args.seed,
            max_dh=args.max_dh if args.max_dh > 0 else None)
        print(f"perturbed mesh accepted with seed {seed} ({rej} rejections)")
    meshmod.save_mesh(m, args.out)
    print(f"wrote {m.n_cells} triangles to {args.out}")
    return EXIT_OK


def _cmd_mesh_validate(args) -> int:
    m = meshmod.load_mesh(args.file)
    violations = meshmod.validate(m)
    if violations:
        for v in violations:
            print(v)
        print(f"{len(violations)} violation(s)")
        return EXIT_FAILED
    d = meshmod.build_dual(m)
    q = meshmod.quality(m, d)
    print(f"ok: {m.n_cells} triangles, max dh {q.max_dh:.6g}, "
          f"h in [{q.min_h:.6g}, {q.max_h:.6g}], "
          f"min angle {np.degrees(q.min_angle):.3f} deg")
    return EXIT_OK


def _cmd_run(args) -> int:
    cfg = harness.load_config(args.config)
    out = args.out or cfg.out_dir
    result = harness.run(cfg, out)
    cons = result.conservation
    print(f"completed {cfg.n_steps} steps of {cfg.case} ({cfg.kind})")
    print(f"energy amplitude {cons.energy_amplitude():.3e}, "
          f"drift {cons.energy_drift_rate():.3e}/s, "
          f"mass amplitude {cons.mass_amplitude():.3e}")
    print(f"outputs in {out}")
    return EXIT_OK


def _cmd_spectra(args) -> int:
    data = np.genfromtxt(args.probes, delimiter=",", names=True)
    rows = []
    for pid in np.unique(data["probe_id"].astype(int)):
        sel = data["probe_id"].astype(int) == pid
        series = data["value"][sel][np.argsort(data["t"][sel])]
        s = dg.dft(series, args.dt)
        rows.extend((pid, f, a) for f, a in zip(s.freq, s.amplitude))
    dg.write_csv(args.out, ["probe_id", "freq", "amplitude"], rows)
    print(f"wrote spectra for {len(np.unique(data['probe_id']))} probes to {args.out}")
    return EXIT_OK


def _cmd_check(args) -> int:
    cfg = harness.load_config(args.config)
    result = harness.CHECK_SUITES[args.suite](cfg)
    print(result)
    return EXIT_OK if result.passed else EXIT_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="soundproof",
                                description="Structure-preserving soundproof flow solver")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("mesh-gen", help="generate a (perturbed) channel mesh")
    g.add_argument("--nx", type=int, required=True)
    g.add_argument("--nz", type=int, required=True)
    g.add_argument("--lx", type=float, required=True)
    g.add_argument("--lz", type=float, required=True)
    g.add_argument("--perturb", type=float, default=0.0, metavar="C")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--max-dh", type=float, default=0.0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_mesh_gen)

    g = sub.add_parser("mesh-validate", help="validate a mesh file")
    g.add_argument("file")
    g.set_defaults(func=_cmd_mesh_validate)

    g = sub.add_parser("run", help="run a configured case")
    g.add_argument("--config", required=True)
    g.add_argument("--out", default=None)
    g.set_defaults(func=_cmd_run)

    g = sub.add_parser("spectra", help="amplitude spectra from a probes.csv")
    g.add_argument("--probes", required=True)
    g.add_argument("--dt", type=float, required=True)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_spectra)

    g = sub.add_parser("check", help="run a verification suite against a config")
    g.add_argument("--suite", required=True, choices=sorted(harness.CHECK_SUITES))
    g.add_argument("--config", required=True)
    g.set_defaults(func=_cmd_check)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (harness.ConfigError, meshmod.MeshError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
