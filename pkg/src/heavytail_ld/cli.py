"""Command line entry point ``heavytail-ld``.

Exit codes: 0 success, 2 configuration or argument error, 3 a discordant
cell under ``--strict``.
"""

import argparse
import json
import math
import sys

from .config import ConfigError, load_config
from .model import DomainError, TailModel
from .montecarlo import CostGateError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DISCORDANT = 3


def _dump(obj):
    from .experiment import _jsonable
    print(json.dumps(_jsonable(obj), indent=2, sort_keys=True))


def _cx(z):
    z = complex(z)
    return [z.real, z.imag]


def cmd_run(args):
    from .experiment import run_experiment
    cfg = load_config(args.config)
    report = run_experiment(cfg, out_dir=args.out or cfg.out_dir,
                            timestamp=not args.no_timestamp, workers=args.workers)
    s = report.summary
    print(f"{s['cells']} cells, {s['discordant']} discordant, {len(s['errors'])} errors;"
          f" output in {args.out or cfg.out_dir}")
    if args.strict and s["discordant"]:
        return EXIT_DISCORDANT
    return EXIT_OK


def cmd_charfn(args):
    from .charfn import F_jet, psi_exact, theta_jet
    model = TailModel(args.p)
    psi = psi_exact(model, args.t)
    out = {"t": args.t, "n": args.n, "p": args.p,
           "psi": {"value": _cx(psi.value), "d1": _cx(psi.d1), "d2": _cx(psi.d2),
                   "singular": psi.singular}}
    if args.t != 0:
        th = theta_jet(model, args.t)
        out["theta"] = {"value": _cx(th.value), "d1": _cx(th.d1), "d2": _cx(th.d2)}
    F, dF = F_jet(model, args.t, args.n)
    out["F"] = _cx(F)
    out["dF"] = _cx(dF)
    _dump(out)
    return EXIT_OK


def cmd_quad(args):
    from .quadrature import OscillandSpec, oscillatory_log_integral
    from .smoother import SmootherSpec
    spec = OscillandSpec(M=args.M, r=args.r, m=args.m,
                         smoother=None if args.no_window else SmootherSpec(epsilon=args.epsilon),
                         model=TailModel(args.p), epsilon=args.epsilon)
    res = oscillatory_log_integral(spec, check_decay=False)
    logM = math.log(args.M)
    _dump({"M": args.M, "r": args.r, "m": args.m, "value": _cx(res.value),
           "abs_error_estimate": res.abs_error_estimate, "periods_used": res.periods_used,
           "decay_ok": res.decay_ok, "ratio": abs(res.value) / logM ** args.r})
    return EXIT_OK


def cmd_invert(args):
    from .inversion import InversionConfig, deviation_delta
    from .smoother import SmootherSpec
    cfg = InversionConfig(n=args.n, N=args.N, g=args.g,
                          spec=SmootherSpec(args.epsilon, args.k, args.a),
                          model=TailModel(args.p), far_mode=args.far_mode)
    point = deviation_delta(cfg)
    _dump(point.as_dict())
    return EXIT_OK


def cmd_mc(args):
    from . import montecarlo as mc
    model = TailModel(args.p)
    if args.estimator == "conv2":
        _dump({"estimator": "conv2", "N": args.N, "p": args.p,
               "probability": mc.conv2_oracle(model, args.N)})
        return EXIT_OK
    if args.estimator == "naive":
        res = mc.naive_tail_estimate(model, args.n, args.N, args.trials, args.seed,
                                     workers=args.workers, force=args.force)
    else:
        res = mc.bigjump_tail_estimate(model, args.n, args.N, args.trials, args.seed,
                                       workers=args.workers)
    out = {"estimator": args.estimator, "n": args.n, "N": args.N, "p": args.p}
    out.update(res.as_dict())
    _dump(out)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="heavytail-ld",
                                     description="Large deviations of 1/x-tailed sums.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate an experiment grid")
    run.add_argument("--config", required=True)
    run.add_argument("--out")
    run.add_argument("--no-timestamp", action="store_true")
    run.add_argument("--strict", action="store_true", help="exit 3 if any cell is discordant")
    run.add_argument("--workers", type=int)
    run.set_defaults(func=cmd_run)

    charfn = sub.add_parser("charfn", help="characteristic function values")
    csub = charfn.add_subparsers(dest="action", required=True)
    ev = csub.add_parser("eval")
    ev.add_argument("--t", type=float, required=True)
    ev.add_argument("--n", type=int, default=1)
    ev.add_argument("--p", type=float, default=0.7)
    ev.set_defaults(func=cmd_charfn)

    quad = sub.add_parser("quad", help="quadrature diagnostics")
    qsub = quad.add_subparsers(dest="action", required=True)
    lem = qsub.add_parser("lemtec", help="period-paired log-oscillatory integral")
    lem.add_argument("--M", type=float, required=True)
    lem.add_argument("--r", type=int, default=0)
    lem.add_argument("--m", type=int, default=0)
    lem.add_argument("--p", type=float, default=0.7)
    lem.add_argument("--epsilon", type=float, default=0.5)
    lem.add_argument("--no-window", action="store_true", help="take psi_Y == 1")
    lem.set_defaults(func=cmd_quad)

    inv = sub.add_parser("invert", help="smoothed inversion at one (n, N)")
    inv.add_argument("--n", type=int, required=True)
    inv.add_argument("--N", type=float, required=True)
    inv.add_argument("--g", type=float)
    inv.add_argument("--far-mode", choices=("exact", "budgeted"), default="budgeted")
    inv.add_argument("--p", type=float, default=0.7)
    inv.add_argument("--epsilon", type=float, default=0.5)
    inv.add_argument("--k", type=int, default=4)
    inv.add_argument("--a", type=float, default=3.5)
    inv.set_defaults(func=cmd_invert)

    mcp = sub.add_parser("mc", help="Monte Carlo estimators and the n=2 oracle")
    mcp.add_argument("estimator", choices=("naive", "bigjump", "conv2"))
    mcp.add_argument("--n", type=int, default=2)
    mcp.add_argument("--N", type=float, required=True)
    mcp.add_argument("--trials", type=int, default=100_000)
    mcp.add_argument("--seed", type=int, default=1)
    mcp.add_argument("--p", type=float, default=0.7)
    mcp.add_argument("--workers", type=int, default=1)
    mcp.add_argument("--force", action="store_true", help="bypass the naive cost gate")
    mcp.set_defaults(func=cmd_mc)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError, CostGateError) as exc:
        print(f"heavytail-ld: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
