"""Command-line interface.

Exit codes: 0 success, 2 configuration error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import experiments as ex
from .analysis import condition_number_2, elman_constants
from .dg import assemble
from .errors import ConfigError, SchwarzError
from .verify import property_checks

EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _common(p):
    p.add_argument("--config", help="JSON experiment config")
    p.add_argument("--profile", choices=sorted(ex.PROFILES), default="desk")
    p.add_argument("--penalty", type=float, help="penalty constant c_e")
    p.add_argument("--degree", type=int, help="polynomial degree r")
    p.add_argument("--alpha", type=float, help="hybrid relaxation parameter")
    p.add_argument("--tol", type=float, help="GMRES and multiplicative relative tolerance")
    p.add_argument("--boundary-only-penalty", action="store_true",
                   help="penalize jumps on the domain boundary only")
    p.add_argument("--out", help="output directory")


def build_parser():
    parser = argparse.ArgumentParser(prog="nsschwarz",
                                     description="Schwarz preconditioners for 1-D IPDG "
                                                 "convection-diffusion problems")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("assemble", help="assemble one test system and print a summary")
    p.add_argument("test_id", nargs="?", default="test1")
    p.add_argument("--h-inv", type=int)
    _common(p)

    p = sub.add_parser("run-test", help="three Schwarz methods over the J list")
    p.add_argument("test_id")
    _common(p)

    p = sub.add_parser("sweep-hh", help="kappa_A(P_ad) over fine/coarse mesh pairs")
    p.add_argument("test_id")
    p.add_argument("--J", type=int, default=4)
    _common(p)

    p = sub.add_parser("spectrum", help="eigenvalue CSVs of A and P_ad")
    p.add_argument("test_id")
    _common(p)

    p = sub.add_parser("alpha-sweep", help="hybrid method over several relaxation parameters")
    p.add_argument("test_id")
    p.add_argument("--J", type=int, default=4)
    p.add_argument("--alphas", type=float, nargs="+", default=list(ex.ALPHAS))
    _common(p)

    p = sub.add_parser("verify", help="run the algebraic property checks")
    p.add_argument("--seed", type=int, default=0)
    _common(p)
    return parser


def make_config(args) -> ex.ExperimentConfig:
    test_id = getattr(args, "test_id", "test1")
    overrides = {}
    if args.config:
        cfg = ex.load_config(Path(args.config), test_id)
    else:
        cfg = ex.ExperimentConfig.for_profile(
            args.profile, ex.test_problem(test_id) if test_id != "custom"
            else ex.test_problem("test1"))
    prob = {}
    if args.penalty is not None:
        prob["penalty_ce"] = args.penalty
    if args.degree is not None:
        prob["degree_r"] = args.degree
        prob.setdefault("penalty_ce", 10.0 * (args.degree + 1) ** 2)
    if args.boundary_only_penalty:
        prob["boundary_only_penalty"] = True
    if prob:
        cfg.problem = cfg.problem.with_(**prob)
    if args.alpha is not None:
        overrides["alpha"] = args.alpha
    if args.tol is not None:
        overrides["gmres_tol"] = overrides["mult_tol"] = args.tol
    if args.out:
        overrides["outputs"] = args.out
    for k, v in overrides.items():
        setattr(cfg, k, v)
    cfg.__post_init__()
    return cfg


def cmd_assemble(args, cfg):
    h_inv = args.h_inv or cfg.h_inv
    s = assemble(cfg.problem, h_inv)
    el = elman_constants(s.A)
    print(f"n = {s.n}  (1/h = {h_inv}, r = {cfg.problem.degree_r}, c_e = {cfg.problem.penalty_ce:g})")
    print(f"kappa_2(A) = {condition_number_2(s.A):.6g}")
    print(f"c_p(A) = {el.c_p:.6g}   C_p(A) = {el.C_p:.6g}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        np.savez(out / f"{args.test_id}_system.npz", A=s.A, f=s.f)
    return 0


def cmd_run_test(args, cfg):
    rows = ex.run_test(cfg, args.test_id)
    print(ex.rows_to_text(rows), end="")
    print(f"wrote {Path(cfg.outputs) / (args.test_id + '.csv')}")
    failed = len(rows) < len(cfg.J_list) or not all(r.gmres_converged for r in rows)
    return EXIT_SOLVER if failed else 0


def cmd_sweep(args, cfg):
    grid = ex.sweep_hH(cfg, args.test_id, args.J)
    h_invs, H_invs = ex.SWEEP_GRIDS.get(args.J, ([cfg.h_inv], [cfg.H_inv]))
    print("1/H \\ 1/h " + " ".join(f"{h:>11}" for h in h_invs))
    for Hi, row in zip(H_invs, grid):
        print(f"{Hi:>10} " + " ".join(f"{v:>11.5g}" for v in row))
    return 0


def cmd_spectrum(args, cfg):
    spectra = ex.emit_spectrum(cfg, args.test_id)
    for name, spec in spectra.items():
        print(f"{name:>12}: n = {len(spec)}, diameter = {spec.diameter:.6g}, "
              f"rho = {spec.spectral_radius:.6g}")
    return 0


def cmd_alpha_sweep(args, cfg):
    rows = ex.alpha_sweep(cfg, args.test_id, args.J, args.alphas)
    print(f"{'alpha':>6} {'it_hy':>6} {'kA(P_hy)':>10} {'c_p(P_hy)':>10}")
    for r in rows:
        it = str(r["gmres_iters_hy"]) + ("" if r["converged"] else "!")
        print(f"{r['alpha']:>6g} {it:>6} {r['kappa_A_hy']:>10.4g} {r['c_p_hy']:>10.4g}")
    return 0 if all(r["converged"] for r in rows) else EXIT_SOLVER


def cmd_verify(args, cfg):
    ok = True
    for test_id in ex.TESTS:
        problem = ex.test_problem(test_id, penalty_ce=cfg.problem.penalty_ce,
                                  degree_r=cfg.problem.degree_r)
        print(f"[{test_id}]")
        for check in property_checks(problem, seed=args.seed):
            print("  " + str(check))
            ok &= check.passed
    return 0 if ok else EXIT_SOLVER


COMMANDS = {"assemble": cmd_assemble, "run-test": cmd_run_test, "sweep-hh": cmd_sweep,
            "spectrum": cmd_spectrum, "alpha-sweep": cmd_alpha_sweep, "verify": cmd_verify}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = make_config(args)
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SchwarzError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
