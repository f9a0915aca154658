"""Command line entry point: ``rsma-sim sweep | analytic | verify``."""

import argparse
import sys

from . import asymptotics, harness
from .channel import db_to_linear, dbm_to_watts, estimation_error_variance
from .exceptions import ConfigurationError


def _pt_from_args(args, default=None):
    if args.pt is not None:
        return args.pt
    if args.pt_db is not None:
        return float(db_to_linear(args.pt_db))
    if getattr(args, "pt_dbm", None) is not None:
        return float(dbm_to_watts(args.pt_dbm))
    return default


def _add_pt(p, dbm=True):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--pt", type=float, help="transmit power, linear (W or relative to sigma2)")
    g.add_argument("--pt-db", type=float, help="transmit power in dB relative to sigma2")
    if dbm:
        g.add_argument("--pt-dbm", type=float, help="transmit power in dBm")


def cmd_sweep(args):
    if args.config:
        spec = harness.load_config(args.config)
    else:
        over = {}
        pt = _pt_from_args(args)
        if pt is not None:
            over["Pt"] = pt
        if args.N is not None:
            over["N"] = args.N
        spec = harness.preset(args.preset, **over)
    if args.trials is not None:
        spec.trials_per_point = args.trials
    if args.drops is not None:
        spec.drops = args.drops
    seed = spec.fixed.seed if args.seed is None else args.seed
    rows = harness.run_sweep(spec, seed=seed, threads=args.threads)
    text = harness.rows_to_csv(rows) if args.format == "csv" else harness.rows_to_json(rows, spec, seed)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_analytic(args):
    pt = _pt_from_args(args, default=10.0)
    beta_err = 0.0 if args.N is None else estimation_error_variance(pt, args.N)
    print(f"theta={args.theta:g} K={args.K} beta={args.beta:g} sigma2={args.sigma2:g} "
          f"Pt={pt:g} beta_err={beta_err:g}")
    print(f"{'rho':>6} {'common':>10} {'private':>10} {'ESR':>12}")
    for rho in args.rho:
        p = asymptotics.AsymptoticParams(
            theta=args.theta, beta_k=args.beta, beta_ave=args.beta,
            beta_hat_ave=args.beta + beta_err, sigma2_k=args.sigma2, Pt=pt, rho=rho,
        )
        common = asymptotics.ergodic_common_rate(p)
        private = asymptotics.ergodic_private_rate(p)
        print(f"{rho:6.3f} {common:10.5f} {private:10.5f} {common + args.K * private:12.5f}")
    return 0


def cmd_verify(args):
    checks = harness.verification_battery(seed=args.seed, quick=args.quick)
    for c in checks:
        print(f"[{'PASS' if c.passed else 'FAIL'}] {c.name}: {c.detail}")
    return 0 if all(c.passed for c in checks) else 1


def build_parser():
    ap = argparse.ArgumentParser(prog="rsma-sim", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("sweep", help="run a parameter sweep and write CSV or JSON")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--preset", choices=sorted(harness.PRESETS))
    src.add_argument("--config", help="JSON sweep description")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--trials", type=int, help="fading trials per point (per drop)")
    sp.add_argument("--drops", type=int, help="user drops (macrocell presets)")
    sp.add_argument("--N", type=int, help="training symbols (imperfect CSIT)")
    _add_pt(sp)
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("csv", "json"), default="csv")
    sp.add_argument("--threads", type=int, help="worker threads (default: $RSMA_SIM_THREADS or 1)")
    sp.set_defaults(func=cmd_sweep)

    an = sub.add_parser("analytic", help="large-system ergodic rates of the symmetric scenario")
    an.add_argument("--theta", type=float, default=5.0)
    an.add_argument("--K", type=int, default=100)
    an.add_argument("--beta", type=float, default=1.0)
    an.add_argument("--sigma2", type=float, default=1.0)
    an.add_argument("--N", type=int)
    an.add_argument("--rho", type=float, nargs="+", default=[0.5])
    _add_pt(an, dbm=False)
    an.set_defaults(func=cmd_analytic)

    ve = sub.add_parser("verify", help="convergence and MGF checks; exit 0 iff all pass")
    ve.add_argument("--seed", type=int, default=0)
    ve.add_argument("--quick", action="store_true")
    ve.set_defaults(func=cmd_verify)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
