"""Command line interface.

Exit codes: 0 success, 1 verdict failure (including a signal found outside
the requested Orlicz space), 2 configuration or input error, 3 numerical error.
"""

import argparse
import csv
import json
import sys

import numpy as np

from .errors import ConfigError, InputError, MembershipError, NumericalError
from .experiments import (ExperimentConfig, emit_report, load_audit_config, run_certify,
                          run_convergence, run_inequality_audit)
from .kernels import REGISTERED, get_kernel
from .orlicz import luxemburg_from_samples, modular_from_samples, parse_phi, sample_function
from .sampling import SteklovOperator
from .signals import load_csv_signal, make_signal

EXIT_OK, EXIT_VERDICT, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3


def _signal(text):
    if text.startswith("csv:"):
        return load_csv_signal(text[4:])
    return make_signal(text)


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def cmd_certify(args):
    report = run_certify(args.kernels, tol_pou=args.tol_pou, tol_ft=args.tol_ft, K_ft=args.k_ft)
    _write(emit_report(report, args.format), args.out)
    for c in report.certificates:
        status = "PASS" if c.partition_of_unity_ok else "FAIL"
        print(f"{status} {c.kernel_id} max_dev={c.max_pou_deviation:.3e} "
              f"agree={c.checks_agree}", file=sys.stderr)
    return EXIT_OK if report.passed else EXIT_VERDICT


def cmd_reconstruct(args):
    f = _signal(args.signal)
    op = SteklovOperator(f, args.kernel, args.r, args.w)
    B = f.support_bound or 0.0
    xs = np.linspace(-B - 1.0, B + 1.0, args.points)
    s, fx = op(xs), f(xs)
    rows = ["x,S,f,abs_error\n"] + [f"{x!r},{a!r},{b!r},{abs(a - b)!r}\n"
                                   for x, a, b in zip(xs.tolist(), s.tolist(), fx.tolist())]
    _write("".join(rows), args.out)
    if args.coef_out:
        with open(args.coef_out, "w", newline="") as fh:
            wr = csv.writer(fh, lineterminator="\n")
            wr.writerow(["k", "k_over_w", "value"])
            for k, kw, v in op.coefficients.rows():
                wr.writerow([k, repr(kw), repr(v)])
    return EXIT_OK


def cmd_converge(args):
    cfg = ExperimentConfig.from_json(args.config)
    report = run_convergence(cfg)
    fmt = args.format or cfg.format
    _write(emit_report(report, fmt), args.out or cfg.output)
    v = report.verdicts
    ok = all(x["monotone_within_error"] for k, x in v.items()
             if not (k == "lux_error" and not parse_phi(cfg.phi).convex))
    return EXIT_OK if ok else EXIT_VERDICT


def cmd_audit(args):
    cases, spec, budget, out, fmt = load_audit_config(args.config)
    report = run_inequality_audit(cases, spec, budget)
    _write(emit_report(report, args.format or fmt), args.out or out)
    return EXIT_OK if report.passed else EXIT_VERDICT


def cmd_norm(args):
    phi = parse_phi(args.phi)
    f = _signal(args.signal)
    samples = sample_function(f)
    out = {"phi": phi.id, "signal": f.id,
           "modular": modular_from_samples(phi, samples, args.lam).value, "lambda": args.lam}
    if phi.convex:
        lux = luxemburg_from_samples(phi, samples, args.tol)
        out["luxemburg_norm"] = lux.value
        out["luxemburg_error"] = lux.error
    print(json.dumps(out))
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="steklov", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("certify", help="check partition of unity and moments of kernels")
    c.add_argument("kernels", nargs="*", default=list(REGISTERED),
                   help="kernel ids (default: all registered)")
    c.add_argument("--tol-pou", type=float, default=1e-6)
    c.add_argument("--tol-ft", type=float, default=1e-6)
    c.add_argument("--k-ft", type=int, default=5)
    c.add_argument("--format", choices=("csv", "json"), default="csv")
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_certify)

    r = sub.add_parser("reconstruct", help="evaluate S_w^r f on a grid")
    r.add_argument("--signal", required=True, help="catalog id or csv:<path>")
    r.add_argument("--kernel", required=True)
    r.add_argument("--r", type=int, required=True)
    r.add_argument("--w", type=float, required=True)
    r.add_argument("--points", type=int, default=401)
    r.add_argument("--out", default=None, help="grid CSV (default stdout)")
    r.add_argument("--coef-out", default=None, help="also write the coefficients here")
    r.set_defaults(func=cmd_reconstruct)

    v = sub.add_parser("converge", help="run a convergence ladder from a JSON config")
    v.add_argument("--config", required=True)
    v.add_argument("--format", choices=("csv", "json"), default=None)
    v.add_argument("--out", default=None)
    v.set_defaults(func=cmd_converge)

    a = sub.add_parser("audit", help="audit the modular inequality over JSON cases")
    a.add_argument("--config", required=True)
    a.add_argument("--format", choices=("csv", "json"), default=None)
    a.add_argument("--out", default=None)
    a.set_defaults(func=cmd_audit)

    n = sub.add_parser("norm", help="modular and Luxemburg norm of a signal")
    n.add_argument("--phi", required=True)
    n.add_argument("--signal", required=True)
    n.add_argument("--lam", type=float, default=1.0)
    n.add_argument("--tol", type=float, default=1e-8)
    n.set_defaults(func=cmd_norm)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "reconstruct":
            get_kernel(args.kernel)
        return args.func(args)
    except MembershipError as exc:
        # a negative membership answer is a verdict about the data, not a bad config
        print(f"membership: {exc}", file=sys.stderr)
        return EXIT_VERDICT
    except (ConfigError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
