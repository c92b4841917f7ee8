"""Command-line interface: ``qmatfun {divergence,mean,quadrature,resources,validate}``.

Every command prints a human-readable table followed by machine-readable
``key=value`` lines; ``--out`` writes the ``key=value`` block (or, for
``mean``, the result matrix) to a file instead.

Exit codes
----------
0  success
1  result outside tolerance, or a validation suite failed
2  usage error (argparse)
3  I/O error (unreadable input, unwritable output)
4  invalid input (not Hermitian / not a state / bad parameter)
5  spectral window violated
6  requested capability not supported
"""

import argparse
import math
import os
import sys


from . import divergence as dv
from . import funcapprox as fa
from . import functions as F
from . import means as mn
from . import resources as rs
from . import validation as vl
from .errors import CapabilityError, QMatFunError, WindowError
from .matcore import format_matrix, read_matrix

EXIT_OK = 0
EXIT_TOLERANCE = 1
EXIT_USAGE = 2
EXIT_IO = 3
EXIT_INPUT = 4
EXIT_WINDOW = 5
EXIT_CAPABILITY = 6

SEED_ENV = "QMATFUN_SEED"


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        return 0


def _spec_from_args(args):
    return F.from_name(args.f, t=getattr(args, "t", None), p=getattr(args, "p", None),
                       alpha=getattr(args, "alpha", None))


def _emit(args, table, kv, payload=None):
    sys.stdout.write(table)
    sys.stdout.write(kv)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(payload if payload is not None else kv)


def cmd_divergence(args):
    rho = read_matrix(args.rho)
    sigma = read_matrix(args.sigma)
    f = _spec_from_args(args)
    access = "sample_emulated" if args.access.startswith("sample") else "purification"
    rep = dv.estimate_divergence(rho, sigma, f, args.route, args.eps, access,
                                 noise=args.noise, seed=args.seed)
    kv = rep.as_kv() + f"seed={args.seed}\n"
    table = rep.as_table()
    if args.explain:
        table += "\nprovenance:\n" + rep.encoding.explain(max_depth=args.explain_depth) + "\n"
    _emit(args, table, kv)
    return EXIT_OK if (rep.within_tolerance or args.noise) else EXIT_TOLERANCE


def cmd_mean(args):
    A = read_matrix(args.A)
    B = read_matrix(args.B)
    f = _spec_from_args(args)
    rep = mn.compute_mean(A, B, f, args.method, args.delta, args.eps, args.m)
    table = rep.as_table()
    if args.explain and rep.encoding is not None:
        table += "\nprovenance:\n" + rep.encoding.explain(max_depth=args.explain_depth) + "\n"
    _emit(args, table, rep.as_kv(), format_matrix(rep.result, f"{f.label} via {rep.method}"))
    ok = rep.method == "oracle" or not rep.error > max(args.eps, rep.ledger_bound)
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_quadrature(args):
    kind = args.kind
    if kind == "log-poly":
        p = fa.log_poly(args.beta, args.eps)
        rows = [(str(k), f"{c:.17g}") for k, c in enumerate(p.coefficients)]
        table = rs.format_table(("k", "chebyshev coefficient"), rows)
        kv = (f"kind=log_poly\nbeta={args.beta:.17g}\neps={args.eps:.17g}\n"
              f"degree={p.degree}\ncharged_degree={p.charged_degree}\n"
              f"certified_error={p.certified_error:.17g}\n")
        _emit(args, table, kv)
        return EXIT_OK if p.certified_error <= args.eps else EXIT_TOLERANCE
    if kind == "log-resolvent":
        r = fa.log_stieltjes(args.beta, args.eps) if args.m is None else fa.log_resolvent(args.beta, args.m)
    elif kind == "kraus":
        r = fa.kraus_rational(_spec_from_args(args), args.delta, args.eps, upper=args.upper,
                              m=args.m)
    elif kind == "stieltjes":
        r = fa.monotone_stieltjes_rational(_spec_from_args(args), args.delta, args.eps,
                                           upper=args.upper, m=args.m)
    elif kind == "mixture":
        rule = fa.kubo_ando_measure(_spec_from_args(args), args.m or 16,
                                    (args.delta, args.upper))
        table = rs.format_table(("node", "weight"),
                                [(f"{s:.17g}", f"{w:.17g}") for s, w in zip(rule.nodes, rule.weights)])
        kv = rule.to_text()
        _emit(args, table, kv)
        return EXIT_OK
    else:  # pragma: no cover - argparse restricts choices
        raise CapabilityError(kind)
    rows = [(f"{t:.17g}", f"{w:.17g}") for t, w in zip(r.nodes, r.weights)]
    table = rs.format_table(("node", "weight"), rows)
    table += f"m = {r.m}\ncertified error = {r.certified_error:.3e}\n"
    bound = r.poles.theoretical_bound
    if bound is not None and not math.isnan(bound):
        table += f"theoretical bound = {bound:.3e}\n"
    kv = r.to_text()
    _emit(args, table, kv)
    return EXIT_OK if (args.m is not None or r.certified_error <= args.eps) else EXIT_TOLERANCE


def cmd_resources(args):
    lines = []
    if args.which in ("divergence", "all"):
        for route in (1, 2):
            for access in ("purification", "sample"):
                c = rs.divergence_cost(route, access, args.kappa_sigma, args.kappa_gamma,
                                       args.eps, args.N, args.T)
                lines.append(c)
        lines.append(rs.evaluate("divergence.sample.repetitions", kappa_sigma=args.kappa_sigma,
                                 kappa_gamma=args.kappa_gamma, eps=args.eps))
    if args.which in ("means", "all"):
        lines.append(rs.mean_cost(args.C_A, args.C_B, args.delta, args.eps))
    rows = [(c.ident, ", ".join(f"{k}={v:g}" for k, v in c.inputs.items()), f"{c.value:.6g}",
             ", ".join(f"{k}:{v:.3f}" for k, v in c.exponents.items()))
            for c in lines]
    table = rs.format_table(("formula", "inputs", "predicted", "local exponents"), rows)
    kv = "".join(f"{c.ident}={c.value:.17g}\n" for c in lines)
    _emit(args, table, kv)
    return EXIT_OK


def cmd_validate(args):
    names = None if args.suite == "all" else [args.suite]
    results = vl.run_suites(names, fixtures=args.fixtures)
    ok_all = True
    out = []
    for name, checks in results.items():
        ok = all(c.ok for c in checks)
        ok_all &= ok
        out.append(f"{name}: {'PASS' if ok else 'FAIL'} ({sum(c.ok for c in checks)}/{len(checks)})")
        out.extend(c.line() for c in checks)
    text = "\n".join(out) + "\n"
    kv = "".join(f"suite.{n}={'pass' if all(c.ok for c in cs) else 'fail'}\n"
                 for n, cs in results.items())
    _emit(args, text, kv)
    return EXIT_OK if ok_all else EXIT_TOLERANCE


def _positive_float(text):
    v = float(text)
    if not v > 0 or math.isnan(v):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text}")
    return v


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qmatfun",
        description="Block-encoding simulations of maximal f-divergences and operator means.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=_default_seed(),
                       help=f"random seed (default: ${SEED_ENV} or 0)")
        p.add_argument("--out", help="write the machine-readable output to this file")

    p = sub.add_parser("divergence", help="estimate D_f(rho || sigma)")
    p.add_argument("--f", default="xlogx", help="xlogx | chi_square | kl_form | power_alpha")
    p.add_argument("--alpha", type=float, help="exponent for power_alpha")
    p.add_argument("--rho", required=True)
    p.add_argument("--sigma", required=True)
    p.add_argument("--route", choices=("1", "2", "general"), default="1")
    p.add_argument("--access", choices=("purification", "sample", "sample_emulated"),
                   default="purification")
    p.add_argument("--eps", type=_positive_float, default=1e-3)
    p.add_argument("--noise", action="store_true", help="add seeded trace-estimation noise")
    p.add_argument("--explain", action="store_true", help="print the provenance tree")
    p.add_argument("--explain-depth", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("mean", help="compute a Kubo-Ando mean")
    p.add_argument("--f", default="geometric",
                   help="arithmetic | harmonic | geometric | logarithmic | heinz | power_mean")
    p.add_argument("--t", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--A", required=True)
    p.add_argument("--B", required=True)
    p.add_argument("--method", choices=("oracle", "harmonic-mixture", "stieltjes"),
                   default="oracle")
    p.add_argument("--delta", type=_positive_float)
    p.add_argument("--eps", type=_positive_float, default=1e-4)
    p.add_argument("--m", type=int)
    p.add_argument("--explain", action="store_true")
    p.add_argument("--explain-depth", type=int, default=None)
    common(p)
    p.set_defaults(func=cmd_mean)

    p = sub.add_parser("quadrature", help="print a certified approximation")
    p.add_argument("kind", choices=("log-poly", "log-resolvent", "kraus", "stieltjes", "mixture"))
    p.add_argument("--beta", type=_positive_float, default=1 / 16)
    p.add_argument("--eps", type=_positive_float, default=1e-6)
    p.add_argument("--f", default="xlogx")
    p.add_argument("--t", type=float)
    p.add_argument("--p", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--delta", type=_positive_float, default=0.1)
    p.add_argument("--upper", type=_positive_float, default=10.0)
    p.add_argument("--m", type=int)
    common(p)
    p.set_defaults(func=cmd_quadrature)

    p = sub.add_parser("resources", help="evaluate cost formulas")
    p.add_argument("which", nargs="?", choices=("divergence", "means", "all"), default="all")
    p.add_argument("--kappa-sigma", type=float, default=4.0)
    p.add_argument("--kappa-gamma", type=float, default=8.0)
    p.add_argument("--eps", type=_positive_float, default=1e-3)
    p.add_argument("--N", type=int, default=8)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--C-A", dest="C_A", type=float, default=1.0)
    p.add_argument("--C-B", dest="C_B", type=float, default=1.0)
    p.add_argument("--delta", type=_positive_float, default=0.1)
    common(p)
    p.set_defaults(func=cmd_resources)

    p = sub.add_parser("validate", help="run the invariant suites")
    p.add_argument("--suite", choices=("all",) + tuple(vl.SUITES), default="all")
    p.add_argument("--fixtures", help="directory of fixture matrices (default: packaged)")
    common(p)
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except OSError as exc:
        sys.stderr.write(f"qmatfun: I/O error: {exc}\n")
        return EXIT_IO
    except WindowError as exc:
        sys.stderr.write(f"qmatfun: window error: {exc}\n")
        return EXIT_WINDOW
    except CapabilityError as exc:
        sys.stderr.write(f"qmatfun: unsupported: {exc}\n")
        return EXIT_CAPABILITY
    except (QMatFunError, ValueError) as exc:
        sys.stderr.write(f"qmatfun: invalid input: {exc}\n")
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
