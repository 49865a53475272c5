"""Command-line front end: ``ris-sop {sop-theory,sop-mc,optimize,sweep,validate}``.

Exit codes: 0 success, 1 criterion or configuration failure, 2 numerical error.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

import numpy as np

from . import validation
from .analytics import DegenerateChannelError, sop_high_snr_bound, sop_theory
from .harness import SCHEMES, ConfigError, evaluate_scheme, load_scenario, run_scenario, write_csv
from .model import DimensionError, NoiseModel, SystemConfig, main_capacity, random_channels
from .montecarlo import DEFAULT_TRIALS, empirical_sop
from .optimize import PHASE_SOLVERS, alternating_optimize

DEFAULT_SYSTEM = dict(n_t=10, n_r=3, n_e=2, n_s=32, alpha=0.8, beta=0.8, r_s=3.0)


def _point(args):
    """System config and noise model for single-point commands."""
    if args.config is None:
        return SystemConfig.from_snr_db(9.0, **DEFAULT_SYSTEM), NoiseModel()
    s = load_scenario(args.config)
    return s.system, s.noise


def _design(args):
    cfg, noise = _point(args)
    ch = random_channels(cfg, args.seed, noise)
    eve_ch, phase, bf, it = evaluate_scheme(args.scheme, cfg, ch, args.seed)
    return cfg, eve_ch, phase, bf, it


def cmd_sop_theory(args):
    cfg, ch, phase, bf, it = _design(args)
    out = {
        "scheme": args.scheme,
        "seed": args.seed,
        "c_m": main_capacity(cfg, ch, phase, bf),
        "sop_theory": sop_theory(cfg, ch, phase, bf),
        "sop_high_snr_bound": sop_high_snr_bound(cfg, ch, phase, bf),
        "iterations": it,
    }
    print(json.dumps(out, indent=2))
    return 0


def cmd_sop_mc(args):
    cfg, ch, phase, bf, _ = _design(args)
    est = empirical_sop(cfg, ch, phase, bf, args.trials, args.seed, workers=args.workers)
    out = {
        "scheme": args.scheme,
        "seed": args.seed,
        "sop_theory": sop_theory(cfg, ch, phase, bf),
        "sop_mc": est.p_hat,
        "sop_mc_stderr": est.std_err,
        "trials": est.trials,
    }
    print(json.dumps(out, indent=2))
    return 0


def cmd_optimize(args):
    cfg, noise = _point(args)
    ch = random_channels(cfg, args.seed, noise)
    rep = alternating_optimize(cfg, ch, args.solver, seed=args.seed, xi=args.xi, iter_max=args.iter_max)
    print("iteration,p_out,z")
    for row in rep.trace:
        print(f"{row.iteration},{row.p_out:.9g},{row.z:.9g}")
    print(f"# converged={rep.converged} iterations_used={rep.iterations_used} best_p_out={sop_theory(cfg, ch, rep.final_q, rep.final_b):.9g}")
    return 0


def cmd_sweep(args):
    if args.config is None:
        raise ConfigError("sweep needs --config")
    s = load_scenario(args.config)
    overrides = {}
    if args.seed_given:
        overrides["seed"] = args.seed
    if args.trials is not None:
        overrides["trials"] = args.trials
    if overrides:
        s = replace(s, **overrides)
    rows = run_scenario(s, workers=args.workers, timing=args.timing)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_csv(rows, fh)
    else:
        sys.stdout.write(write_csv(rows))
    return 0


def cmd_validate(args):
    overrides = {}
    if args.inject_failure:
        # test hook: an impossible tolerance must surface as a failure
        overrides["numerical_kernels"] = {"gamma_tol": -1.0}
    only = {int(x) for x in args.only.split(",")} if args.only else None
    results = validation.run_all(args.seed, overrides, echo=lambda line: print(line, flush=True), only=only)
    print(validation.report(results))
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario JSON file")
    common.add_argument("--seed", type=int, default=None, help="64-bit seed (default 0)")
    common.add_argument("--trials", type=int, default=None, help="Monte Carlo trials")
    common.add_argument("--out", help="output path (default stdout)")
    common.add_argument("--workers", type=int, default=None)

    p = argparse.ArgumentParser(prog="ris-sop", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    for name, fn, help_ in (
        ("sop-theory", cmd_sop_theory, "closed-form outage at one design point"),
        ("sop-mc", cmd_sop_mc, "Monte Carlo outage at one design point"),
    ):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.add_argument("--scheme", choices=SCHEMES, default="mrt_rand")
        sp.set_defaults(func=fn)

    sp = sub.add_parser("optimize", parents=[common], help="one alternating-optimization run")
    sp.add_argument("--solver", choices=PHASE_SOLVERS, default="manifold")
    sp.add_argument("--xi", type=float, default=1e-5)
    sp.add_argument("--iter-max", type=int, default=50)
    sp.set_defaults(func=cmd_optimize)

    sp = sub.add_parser("sweep", parents=[common], help="run a scenario sweep to CSV")
    sp.add_argument("--timing", action="store_true", help="fill the wall_ms column")
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("validate", parents=[common], help="run the acceptance criteria")
    sp.add_argument("--only", help="comma-separated criterion numbers")
    sp.add_argument("--inject-failure", action="store_true", help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_validate)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    args.seed_given = args.seed is not None
    if args.seed is None:
        args.seed = 0
    if args.seed < 0 or args.seed >= 2**64:
        print("error: seed must be an unsigned 64-bit integer", file=sys.stderr)
        return 1
    if args.trials is None and args.command == "sop-mc":
        args.trials = DEFAULT_TRIALS
    try:
        return args.func(args)
    except (ConfigError, DimensionError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (FloatingPointError, np.linalg.LinAlgError, DegenerateChannelError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
