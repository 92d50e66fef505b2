"""
Command line interface.

Exit codes: 0 success, 1 usage or input error, 2 verification failure,
3 numerical divergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .config import SimConfig, load_config
from .errors import (ConfigError, DivergenceError, SnapshotError, StationarySolverError)

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_DIVERGED = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser():
    p = _Parser(prog="selfdual", description="Self-dual Navier-Stokes reduction toolkit.")
    p.add_argument("--config", help="configuration file (key = value)")
    p.add_argument("--output-dir", help="directory for CSV and snapshot output")
    p.add_argument("--seed", type=int, help="override initial.seed")
    p.add_argument("--threads", type=int, default=1, help="FFT worker threads (default 1)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("simulate-ns", help="integrate the 3D Navier-Stokes equations")
    sub.add_parser("simulate-selfdual", help="integrate the scalar self-dual equation")
    s = sub.add_parser("simulate-axisym", help="integrate the axisymmetric scalar equation")
    s.add_argument("--signs", choices=("derived", "printed"), default="derived")

    s = sub.add_parser("verify-kernels", help="closed-form kernels versus direct evaluation")
    s.add_argument("--samples", type=int, default=10_000)
    s.add_argument("--seed", type=int, default=None, dest="sub_seed")
    s.add_argument("--tol", type=float, default=1e-12)
    s.add_argument("--report", help="write the JSON report to this file")

    s = sub.add_parser("verify-equivalence", help="full solver versus scalar equation")
    s.add_argument("--resolution", type=int, default=32)
    s.add_argument("--t-end", type=float, default=0.5)
    s.add_argument("--tol", type=float, default=1e-9)

    s = sub.add_parser("verify-symmetry", help="helical duality commutes with the flow")
    s.add_argument("--resolution", type=int, default=32)
    s.add_argument("--t-end", type=float, default=0.5)
    s.add_argument("--tol", type=float, default=1e-9)

    s = sub.add_parser("find-stationary", help="Newton-Krylov search for stationary w")
    s.add_argument("--nu", type=float, default=1.0)
    s.add_argument("--max-iter", type=int, default=50)
    s.add_argument("--tol", type=float, default=1e-10)
    s.add_argument("--guess", help="axisym snapshot used as the initial guess")
    s.add_argument("--nr", type=int, default=32)
    s.add_argument("--nz", type=int, default=16)

    s = sub.add_parser("diagnose", help="print diagnostics of a snapshot")
    s.add_argument("snapshot")
    return p


def _config(args):
    cfg = load_config(args.config) if args.config else SimConfig()
    if args.seed is not None:
        cfg = cfg.with_updates(initial_seed=args.seed)
    return cfg


def _outdir(args, cfg):
    out = args.output_dir or cfg.output_dir
    os.makedirs(out, exist_ok=True)
    return out


def _emit(obj):
    print(json.dumps(obj, indent=2, sort_keys=True, default=float))


def cmd_simulate_ns(args):
    from .navier_stokes import run
    cfg = _config(args)
    out = _outdir(args, cfg)
    traj = run(cfg, output_dir=out)
    _emit({"output_dir": out, "samples": len(traj), "final_time": traj[-1][0].t,
           "seed": cfg.seed, "final_energy": traj[-1][1].E})
    return EXIT_OK


def cmd_simulate_selfdual(args):
    from .diagnostics import write_csv
    from .helical import build_basis
    from .navier_stokes import random_scalar
    from .scalar import run_scalar
    from .snapshot import write_snapshot
    from .spectral import make_grid
    cfg = _config(args)
    if cfg.initial.kind != "random-band":
        raise ConfigError(["simulate-selfdual supports initial.kind = random-band only"])
    grid = make_grid(cfg.resolution, cfg.box_size)
    basis = build_basis(grid)
    v0 = random_scalar(grid, np.random.default_rng(cfg.seed), cfg.initial.band, cfg.initial.amplitude)
    out = _outdir(args, cfg)
    try:
        traj = run_scalar(cfg, v0, basis)
    except DivergenceError as exc:
        write_csv(os.path.join(out, "diagnostics.csv"), [r for *_, r in exc.trajectory])
        raise
    write_csv(os.path.join(out, "diagnostics.csv"), [r for *_, r in traj])
    t, v, rec = traj[-1]
    write_snapshot(os.path.join(out, "final.sdns"), v.to_physical(), grid, kind="scalar3d",
                   time=t, nu=cfg.nu, scheme=cfg.scheme)
    _emit({"output_dir": out, "samples": len(traj), "final_time": t, "seed": cfg.seed,
           "final_energy": rec.E, "max_abs_helicity": max(abs(r.H_inst) for *_, r in traj)})
    return EXIT_OK


def cmd_simulate_axisym(args):
    from .axisym import AxisymGrid, confined_profile, evolve_axisym, odd_even_rhs, tail_fraction
    from .snapshot import write_snapshot
    cfg = _config(args)
    if cfg.initial.kind == "file":
        from .snapshot import read_snapshot
        from .axisym import AxisymScalar
        snap = read_snapshot(cfg.initial.path, expect_kind="axisym")
        v0 = AxisymScalar(snap.grid, snap.values)
    else:
        grid = AxisymGrid(cfg.resolution[0], cfg.resolution[2], R=cfg.box_size[0], Lz=cfg.box_size[2])
        v0 = confined_profile(grid, amplitude=cfg.initial.amplitude)
    out = _outdir(args, cfg)
    traj = evolve_axisym(v0, cfg.nu, cfg.dt, cfg.t_end, signs=args.signs, dealias=cfg.dealias,
                         scheme=cfg.scheme, output_every=cfg.output_every)
    with open(os.path.join(out, "axisym.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "L2", "odd_L2", "even_L2", "tail_frac"])
        for t, v in traj:
            r = v.reflect()
            w.writerow([t, v.norm(), (v - r).norm() / 2, (v + r).norm() / 2,
                        tail_fraction(v.grid, v.coef)])
    t, v = traj[-1]
    write_snapshot(os.path.join(out, "final.sdns"), v.values, v.grid, kind="axisym", time=t,
                   nu=cfg.nu, scheme=cfg.scheme)
    dm, dp = odd_even_rhs(v, cfg.nu, args.signs)
    _emit({"output_dir": out, "samples": len(traj), "final_time": t, "final_L2": v.norm(),
           "final_rhs_odd_L2": dm.norm(), "final_rhs_even_L2": dp.norm()})
    return EXIT_OK


def cmd_verify_kernels(args):
    from .kernels import format_report, verify_kernels
    seed = args.sub_seed if args.sub_seed is not None else (args.seed or 0)
    report = verify_kernels(samples=args.samples, seed=seed, tol=args.tol)
    text = format_report(report)
    print(text)
    if args.report:
        with open(args.report, "w") as fh:
            fh.write(text + "\n")
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def _verify(args, fn, label):
    res = fn(resolution=args.resolution, t_end=args.t_end, seed=args.seed or 0)
    ok = res["max_rel_dev"] <= args.tol
    print(f"{label}: max relative trajectory deviation {res['max_rel_dev']:.3e} "
          f"(tol {args.tol:g}) {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_verify_equivalence(args):
    from .verify import equivalence_check
    return _verify(args, equivalence_check, "equivalence")


def cmd_verify_symmetry(args):
    from .verify import symmetry_check
    return _verify(args, symmetry_check, "duality symmetry")


def cmd_find_stationary(args):
    from .axisym import AxisymGrid, AxisymScalar
    from .snapshot import read_snapshot, write_snapshot
    from .stationary import bmo_diagnostic, solve_stationary
    if args.guess:
        snap = read_snapshot(args.guess, expect_kind="axisym")
        w0 = AxisymScalar(snap.grid, snap.values)
    else:
        w0 = AxisymScalar(AxisymGrid(args.nr, args.nz), np.zeros((args.nr, args.nz)))
    res = solve_stationary(w0, args.nu, max_iter=args.max_iter, tol=args.tol)
    bmo = bmo_diagnostic(res.w)
    _emit({"converged": res.converged, "iterations": res.iterations, "residual_norm": res.residual_norm,
           "history": res.history, "message": res.message, "sup_w_r": bmo.sup_w_r,
           "bmo_proxy": bmo.bmo_proxy, "w_L2": res.w.norm()})
    if args.output_dir:
        os.makedirs(args.output_dir, exist_ok=True)
        write_snapshot(os.path.join(args.output_dir, "stationary.sdns"), res.w.values, res.w.grid,
                       kind="axisym", nu=args.nu)
    return EXIT_OK if res.converged else EXIT_VERIFY


def cmd_diagnose(args):
    from .snapshot import read_snapshot
    snap = read_snapshot(args.snapshot)
    info = {"kind": snap.kind, "time": snap.time, "nu": snap.nu, "scheme": snap.scheme}
    if snap.kind == "axisym":
        from .axisym import AxisymScalar, oddness_residual, tail_fraction
        from .stationary import bmo_diagnostic
        v = AxisymScalar(snap.grid, snap.values)
        bmo = bmo_diagnostic(v)
        info.update(L2=v.norm(), tail_frac=tail_fraction(v.grid, v.coef),
                    odd_residual=oddness_residual(v), sup_w_r=bmo.sup_w_r, bmo_proxy=bmo.bmo_proxy)
    else:
        from dataclasses import asdict
        from .diagnostics import Accumulators, compute_record
        from .spectral import SpectralScalar, SpectralVector
        if snap.kind == "scalar3d":
            from .helical import build_basis
            from .scalar import reconstruct_velocity
            u = reconstruct_velocity(SpectralScalar.from_physical(snap.grid, snap.values),
                                     build_basis(snap.grid))
        else:
            u = SpectralVector.from_physical(snap.grid, snap.values, divergence_free=True)
        info.update(asdict(compute_record(u, snap.time, Accumulators())))
    _emit(info)
    return EXIT_OK


COMMANDS = {
    "simulate-ns": cmd_simulate_ns,
    "simulate-selfdual": cmd_simulate_selfdual,
    "simulate-axisym": cmd_simulate_axisym,
    "verify-kernels": cmd_verify_kernels,
    "verify-equivalence": cmd_verify_equivalence,
    "verify-symmetry": cmd_verify_symmetry,
    "find-stationary": cmd_find_stationary,
    "diagnose": cmd_diagnose,
}


def main(argv=None):
    from .spectral import set_fft_workers
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    if args.threads is not None and args.threads < 1:
        print("selfdual: error: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE
    set_fft_workers(args.threads)
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, SnapshotError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"selfdual: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DivergenceError, StationarySolverError) as exc:
        print(f"selfdual: numerical divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
