"""Command line front end.

    bosonclt hartree --config standard.cfg [--output DIR] [--overwrite]
    bosonclt bogoliubov --config standard.cfg
    bosonclt clt --config standard.cfg
    bosonclt fock-selftest [--output DIR]
    bosonclt combinatorics-selftest [--output DIR]
    bosonclt report RUN_DIR

Every run writes ``config.cfg``, its stage outputs and ``manifest.json``.
Failures print a JSON error record on stderr and exit nonzero.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import build_grid, build_initial, build_potential, load
from .errors import BosonCLTError, ConfigError, IntegrityError
from .io import RunDirectory, fmt, read_csv, read_manifest

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_CONFIG, EXIT_STAGE, EXIT_COLLISION, EXIT_INTEGRITY = 0, 1, 2, 3, 4, 5, 6

MOMENT_HEADER = ["N", "t", "k", "exact", "gaussian", "abs_error", "sigma2", "trace_gap"]


def _meta(subcommand, cfg=None):
    from .kernels import BACKEND
    meta = {"tool": "bosonclt", "version": __version__, "backend": BACKEND, "subcommand": subcommand,
            "created": time.strftime("%Y-%m-%dT%H:%M:%S")}
    if cfg is not None:
        meta["config_sha256"] = cfg.digest()
    return meta


def _open_run(args, cfg, default):
    out = args.output or (cfg.output if cfg is not None else default)
    run = RunDirectory(out, overwrite=args.overwrite)
    if cfg is not None:
        run.write_text("config.cfg", cfg.dumps())
    return run


def _table(rows, out=None):
    out = out or sys.stdout
    width = max(len(r[0]) for r in rows)
    for name, err, tol, ok in rows:
        print(f"{name:<{width}}  {'PASS' if ok else 'FAIL'}  worst={err:.3e}  tol={tol:.1e}", file=out)


def cmd_hartree(args, cfg):
    from .hartree import hartree_evolve
    grid = build_grid(cfg)
    V = build_potential(cfg, grid)
    phi0 = build_initial(cfg, grid)
    traj = hartree_evolve(phi0, cfg.T, cfg.dt, V, cfg.kappa)
    run = _open_run(args, cfg, "runs/hartree")
    norms, energies = traj.norms(), traj.energies()
    run.write_csv("hartree.csv", ["t", "norm", "energy"], zip(traj.times, norms, energies))
    run.write_binary("hartree_states.bin", traj.states)
    summary = {"M": grid.M, "samples": len(traj), "mass_drift": float(np.max(np.abs(norms - 1))),
               "energy_drift": float(np.max(np.abs(energies - energies[0])) / max(abs(energies[0]), 1e-300))}
    run.write_json("hartree.json", summary)
    run.finalize(_meta("hartree", cfg))
    print(json.dumps(summary))
    return EXIT_OK


def _bogoliubov_outputs(run, sc):
    pair = sc.pair
    run.write_binary("pair.bin", pair.U, pair.V)
    summary = {"M": sc.grid.M, "t": pair.t, "s": pair.s, "sigma2": {sc.observable.name: sc.sigma2}}
    summary.update({k: v for k, v in sc.diagnostics.items()})
    run.write_json("bogoliubov.json", summary)
    return summary


def cmd_bogoliubov(args, cfg):
    from .clt import prepare_scenario
    sc = prepare_scenario(cfg)
    run = _open_run(args, cfg, "runs/bogoliubov")
    summary = _bogoliubov_outputs(run, sc)
    run.finalize(_meta("bogoliubov", cfg))
    print(json.dumps(summary, sort_keys=True))
    return EXIT_OK


def cmd_clt(args, cfg):
    from .clt import clt_run, prepare_scenario
    sc = prepare_scenario(cfg)
    reports = clt_run(cfg, sc)
    run = _open_run(args, cfg, "runs/clt")
    _bogoliubov_outputs(run, sc)
    run.write_csv("moments.csv", MOMENT_HEADER, [row for r in reports for row in r.rows()])
    run.write_json("moments.json", {"reports": [r.to_dict() for r in reports]})
    run.finalize(_meta("clt", cfg))
    print(",".join(MOMENT_HEADER))
    for r in reports:
        for row in r.rows():
            print(",".join(fmt(v) for v in row))
    return EXIT_OK


def _selftest_cmd(name, fn, args):
    rows = fn(seed=args.seed)
    _table(rows)
    if args.output:
        run = RunDirectory(args.output, overwrite=args.overwrite)
        run.write_csv(f"{name}.csv", ["check", "worst_error", "tolerance", "passed"],
                      [(n, e, t, "true" if ok else "false") for n, e, t, ok in rows])
        run.finalize(_meta(name))
    return EXIT_OK if all(r[3] for r in rows) else EXIT_FAIL


def cmd_fock_selftest(args, cfg):
    from .fock.selftest import selftest
    return _selftest_cmd("fock-selftest", selftest, args)


def cmd_combinatorics_selftest(args, cfg):
    from .combinatorics import selftest
    return _selftest_cmd("combinatorics-selftest", selftest, args)


def emit_report(run_dir) -> str:
    """Summary of a run directory after verifying its manifest; deterministic for identical contents."""
    run_dir = Path(run_dir)
    manifest = read_manifest(run_dir)
    files = manifest["files"]
    lines = [f"run {run_dir.name}: {manifest.get('subcommand', '?')} (bosonclt {manifest.get('version', '?')})"]
    if "config_sha256" in manifest:
        lines.append(f"config sha256 {manifest['config_sha256']}")
    if "moments.csv" in files:
        header, rows = read_csv(run_dir / "moments.csv")
        col = {h: i for i, h in enumerate(header)}
        by_N = {}
        for r in rows:
            by_N.setdefault(int(r[col["N"]]), []).append(r)
        for N in sorted(by_N):
            rs = by_N[N]
            lines.append(f"N = {N}  t = {float(rs[0][col['t']]):.6g}  sigma2 = {float(rs[0][col['sigma2']]):.6g}  "
                         f"trace gap = {float(rs[0][col['trace_gap']]):.6g}")
            lines.append("   k        exact     gaussian    abs error")
            for r in rs:
                lines.append(f"  {int(r[col['k']]):2d}  {float(r[col['exact']]):11.4e}  "
                             f"{float(r[col['gaussian']]):11.4e}  {float(r[col['abs_error']]):11.4e}")
        Ns = sorted(by_N)
        ks = sorted({int(r[col["k"]]) for r in rows})
        lines.append("error trend in N:")
        for k in ks:
            errs = [float(next(r for r in by_N[N] if int(r[col["k"]]) == k)[col["abs_error"]]) for N in Ns]
            mono = all(b < a for a, b in zip(errs, errs[1:]))
            lines.append(f"  k = {k}: {'decreasing' if mono else 'not monotone'}  "
                         + " -> ".join(f"{e:.3e}" for e in errs))
    for name in ("bogoliubov.json", "hartree.json"):
        if name in files:
            data = json.loads((run_dir / name).read_text())
            checks = {k: v for k, v in sorted(data.items()) if isinstance(v, float) and k not in ("t", "s")}
            lines.append(f"invariants ({name}):")
            lines.extend(f"  {k} = {v:.3e}" for k, v in checks.items())
    for name in sorted(files):
        if name.endswith("selftest.csv"):
            header, rows = read_csv(run_dir / name)
            lines.append(f"{name}:")
            lines.extend(f"  {r[0]}: {'PASS' if r[3] == 'true' else 'FAIL'} ({float(r[1]):.3e})" for r in rows)
    return "\n".join(lines) + "\n"


def cmd_report(args, cfg):
    sys.stdout.write(emit_report(args.run_dir))
    return EXIT_OK


COMMANDS = {
    "hartree": cmd_hartree,
    "bogoliubov": cmd_bogoliubov,
    "clt": cmd_clt,
    "fock-selftest": cmd_fock_selftest,
    "combinatorics-selftest": cmd_combinatorics_selftest,
    "report": cmd_report,
}


def build_parser():
    p = argparse.ArgumentParser(prog="bosonclt", description="Mean-field CLT laboratory for bosons on a lattice.")
    p.add_argument("--version", action="version", version=f"bosonclt {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="{" + ",".join(COMMANDS) + "}")
    for name in ("hartree", "bogoliubov", "clt"):
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="INI run configuration")
        s.add_argument("--output", help="run directory (default: the config's output)")
        s.add_argument("--overwrite", action="store_true")
    for name in ("fock-selftest", "combinatorics-selftest"):
        s = sub.add_parser(name)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--output", help="also write a run directory")
        s.add_argument("--overwrite", action="store_true")
    s = sub.add_parser("report")
    s.add_argument("run_dir")
    return p


def _error(kind, exc, code):
    rec = {"error": kind, "type": type(exc).__name__, "message": str(exc)}
    stage = getattr(exc, "stage", None)
    if stage:
        rec["stage"] = stage
    print(json.dumps(rec), file=sys.stderr)
    return code


def run_subcommand(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        cfg = load(args.config) if getattr(args, "config", None) else None
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        return _error("config", exc, EXIT_CONFIG)
    except FileExistsError as exc:
        return _error("output-collision", exc, EXIT_COLLISION)
    except IntegrityError as exc:
        return _error("integrity", exc, EXIT_INTEGRITY)
    except BosonCLTError as exc:
        return _error("stage", exc, EXIT_STAGE)


def main():
    sys.exit(run_subcommand())


if __name__ == "__main__":
    main()
