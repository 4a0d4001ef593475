"""Command-line driver: data subcommands plus the `verify` suites."""

from __future__ import annotations

import argparse
import csv
import io
import cmath
import json
import os
import sys
import time
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.interpolate import griddata

from . import __version__
from .cycles import (SingularEvaluationError, cm_cycle_degree, geodesic_from_form, heegner_points,
                     j_invariant, trace_cm, trace_geodesic)
from .greens import (LiftEvaluator, ResolventEvaluator, SingularPointError, hilbert_green,
                     lift_closed_form)
from .lattice import build_LA_lattice, build_signature12_lattice, sig12_coset
from .lfunc import (EvenSignError, InsufficientCoefficientsError, central_derivative,
                    dirichlet_spec, fe_residual, lambda_eval, rankin_selberg_coeffs, standard_spec)
from .modforms import ap_table, cache_path, hecke_theta, newform_coefficients
from .quadfield import class_group, class_number_from_l_value, is_fundamental
from .suites import SUITES, Check, SuiteConfig, run_suite
from .weil import relation_residuals, weil_generators

SCHEMA_VERSION = 1
CACHE_ENV = "GZVERIFY_CACHE_DIR"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
WEIL_TOL = 1e-9


class UsageError(ValueError):
    pass


# ------------------------------------------------------------- reports


def _plain(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (complex, np.complexfloating)):
        return float(x.real) if x.imag == 0 else [float(x.real), float(x.imag)]
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    return x


def report_dict(suite: str, checks: Sequence[Check], wall_time: float) -> dict:
    rows = []
    for c in sorted(checks, key=lambda c: c.id):
        rows.append({"id": c.id, "description": c.description, "expected": _plain(c.expected),
                     "computed": _plain(c.computed), "tol": c.tol, "pass": bool(c.passed)})
    return {"schema_version": SCHEMA_VERSION, "suite": suite, "checks": rows,
            "wall_time_s": round(wall_time, 3)}


def emit_report(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", "description", "expected", "computed", "tol", "pass"])
        for r in report["checks"]:
            w.writerow([r["id"], r["description"], json.dumps(r["expected"]), json.dumps(r["computed"]),
                        r["tol"], r["pass"]])
        return buf.getvalue()
    lines = [f"suite {report['suite']}"]
    for r in report["checks"]:
        lines.append(f"{'PASS' if r['pass'] else 'FAIL'} {r['id']}: expected {r['expected']}, "
                     f"computed {r['computed']} (tol {r['tol']})")
    npass = sum(r["pass"] for r in report["checks"])
    lines.append(f"{npass}/{len(report['checks'])} passed in {report['wall_time_s']} s")
    return "\n".join(lines) + "\n"


def _write(text: str, output: Optional[str]):
    sys.stdout.write(text)
    if output:
        with open(output, "w") as fh:
            fh.write(text)


def _emit_data(payload: dict, fmt: str):
    if fmt == "json":
        sys.stdout.write(json.dumps(_plain_tree(payload), indent=2) + "\n")
    else:
        for k, v in payload.items():
            sys.stdout.write(f"{k}: {_plain_tree(v)}\n")


def _plain_tree(x):
    if isinstance(x, dict):
        return {k: _plain_tree(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain_tree(v) for v in x]
    return _plain(x)


# ------------------------------------------------------------- argument parsing


def _complex(text: str) -> complex:
    try:
        z = complex(text.replace(" ", "").replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None
    return z


def _upper(text: str) -> complex:
    z = _complex(text)
    if z.imag <= 0:
        raise argparse.ArgumentTypeError(f"{text!r} is not in the upper half-plane")
    return z


def _curve(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("curve needs five integers a1,a2,a3,a4,a6") from None
    if len(vals) != 5:
        raise argparse.ArgumentTypeError("curve needs five integers a1,a2,a3,a4,a6")
    return vals


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="gzverify", description="Numerical checks for theta lifts, "
                                "Rankin-Selberg L-functions and CM cycle sums.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("--format", choices=("json", "csv", "text"), default="text")
    p.add_argument("--cache-dir", default=None, help=f"a_p cache directory (default ${CACHE_ENV})")
    # --format is accepted before or after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)
    _add = sub.add_parser
    sub.add_parser = lambda *a, **k: _add(*a, parents=[common], **k)

    c = sub.add_parser("classgroup", help="class group of a fundamental discriminant")
    c.add_argument("--disc", type=int, required=True)
    c.add_argument("--narrow", action="store_true", help="narrow class group (real fields)")

    c = sub.add_parser("lattice", help="Gram matrix and discriminant module")
    c.add_argument("--family", choices=("sig12", "LA"), default=None,
                   help="signature (1,2) level-N lattice or signature (2,2) lattice L_A")
    c.add_argument("--N", type=_positive_int, default=None)
    c.add_argument("--disc", type=int, default=None)
    c.add_argument("--class", "--class-index", dest="class_index", type=int, default=0)

    c = sub.add_parser("theta", help="Hecke theta series coefficients of an ideal class")
    c.add_argument("--disc", type=int, required=True)
    c.add_argument("--class", "--class-index", dest="class_index", type=int, default=0)
    c.add_argument("--prec", type=_positive_int, default=30)

    c = sub.add_parser("ap", help="Frobenius traces of an elliptic curve")
    c.add_argument("--curve", type=_curve, required=True)
    c.add_argument("--pmax", type=_positive_int, default=100)
    c.add_argument("--cache", default=None, help="cache file, one 'p a_p' pair per line")

    c = sub.add_parser("lfunc", help="completed L-function values or central derivative")
    c.add_argument("mode", choices=("rs", "deriv", "std", "dirichlet"),
                   help="rs: Rankin-Selberg with a class group character; deriv: central "
                        "derivative (Rankin-Selberg with --disc, standard otherwise)")
    c.add_argument("--curve", type=_curve)
    c.add_argument("--level", type=_positive_int, help="conductor of the curve")
    c.add_argument("--disc", type=int)
    c.add_argument("--chi", type=int, default=0, help="class group character index")
    c.add_argument("--sign", type=int, choices=(-1, 1), help="root number for std")
    c.add_argument("--prec", type=_positive_int)
    c.add_argument("--eval", "--s", dest="s", type=_complex, action="append", default=None,
                   help="repeatable evaluation point")
    c.add_argument("--classical", action="store_true",
                   help="read --eval in the classical normalization (center 1 for weight 2)")

    c = sub.add_parser("heegner", help="Heegner points on X0(N)")
    c.add_argument("--N", type=_positive_int, required=True)
    c.add_argument("--disc", type=int, required=True)
    c.add_argument("--r", type=int, required=True)
    c.add_argument("--relax", action="store_true", help="allow gcd(D, 2N) > 1")

    c = sub.add_parser("trace", help="trace of a function over CM points or closed geodesics")
    c.add_argument("--kind", choices=("cm", "geo"), default="cm")
    c.add_argument("--fn", choices=("j744", "file"), default="j744")
    c.add_argument("--grid", default=None, help="CSV lookup grid: re tau, im tau, value[, imag value]")
    c.add_argument("--order", type=int, choices=(0, 1, 3), default=1,
                   help="grid interpolation order: nearest, linear or cubic")
    c.add_argument("--N", type=_positive_int, default=1)
    c.add_argument("--disc", type=int, required=True)
    c.add_argument("--r", type=int, default=None, help="square root of D mod 4N (cm kind)")
    c.add_argument("--relax", action="store_true")
    c.add_argument("--quad-points", type=_positive_int, default=64)

    c = sub.add_parser("greens", help="CSV grid of a Green's function")
    c.add_argument("--kind", choices=("lift", "hilbert", "resolvent"), required=True)
    c.add_argument("--N", type=_positive_int, default=1)
    c.add_argument("--disc", type=int, default=-4)
    c.add_argument("--r", type=int, default=0)
    c.add_argument("--s", type=float, required=True)
    c.add_argument("--z", type=_upper, action="append", required=True, help="repeatable point")
    c.add_argument("--w", type=_upper, default=None, help="second point (hilbert, resolvent)")
    c.add_argument("--m", type=int, default=1, help="norm for the hilbert kind")

    c = sub.add_parser("weil", help="Weil representation relation residuals")
    g = c.add_mutually_exclusive_group(required=True)
    g.add_argument("--N", type=_positive_int)
    g.add_argument("--disc", type=int)
    c.add_argument("--check", action="store_true", help=f"exit 1 if a residual exceeds {WEIL_TOL}")

    c = sub.add_parser("verify", help="run a verification suite")
    c.add_argument("suite", choices=tuple(SUITES) + ("all",))
    c.add_argument("--max-disc", type=_positive_int, default=500)
    c.add_argument("--disc", type=int, default=-139)
    c.add_argument("--prec", type=_positive_int, default=20000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--output", default=None)
    return p


# ------------------------------------------------------------- commands


def _cache_dir(args) -> Optional[str]:
    return args.cache_dir or os.environ.get(CACHE_ENV) or None


def _fundamental(d: Optional[int]) -> int:
    if d is None or not is_fundamental(d):
        raise UsageError(f"{d} is not a fundamental discriminant")
    return d


def cmd_classgroup(args) -> int:
    d = _fundamental(args.disc)
    cg = class_group(d, narrow=args.narrow)
    _emit_data({"disc": d, "h": cg.h, "narrow": cg.narrow, "unit_count": cg.field.unit_count,
                "forms": [[f.a, f.b, f.c] for f in cg.classes],
                "table": [list(row) for row in cg.composition_table],
                "characters": [list(ch) for ch in cg.characters],
                "h_from_L1": class_number_from_l_value(d)}, args.format)
    return EXIT_OK


def cmd_lattice(args) -> int:
    family = args.family or ("LA" if args.disc is not None else "sig12")
    if family == "sig12":
        if args.N is None:
            raise UsageError("--N is required for the sig12 family")
        L, D = build_signature12_lattice(args.N)
    else:
        L, D = build_LA_lattice(_fundamental(args.disc), args.class_index, args.N or 1)
    module = None
    if D is not None:
        module = {"order": D.order, "cosets": [[str(x) for x in v] for v in D.cosets],
                  "qvalues": [str(q) for q in D.qvalues]}
    _emit_data({"family": family, "label": L.label,
                "gram": [[str(x) for x in row] for row in L.gram],
                "signature": list(L.signature), "det": str(L.det()),
                "disc_module": module, "level": D.level if D else None}, args.format)
    return EXIT_OK


def cmd_theta(args) -> int:
    d = _fundamental(args.disc)
    th = hecke_theta(d, args.class_index, args.prec)
    if args.format == "json":
        _emit_data({"disc": d, "class_index": args.class_index,
                    "coefficients": [str(c) for c in th.coefficients]}, "json")
    else:
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["m", "r_A(m)"])
        for m, c in enumerate(th.coefficients):
            w.writerow([m, str(c)])
    return EXIT_OK


def cmd_ap(args) -> int:
    cache = args.cache
    if cache is None:
        cdir = _cache_dir(args)
        if cdir:
            os.makedirs(cdir, exist_ok=True)
            cache = cache_path(cdir, args.curve)
    table = ap_table(args.curve, args.pmax, cache=cache)
    if args.format == "json":
        _emit_data({"curve": list(args.curve), "ap": {str(p): a for p, a in sorted(table.items())}}, "json")
    else:
        for p in sorted(table):
            sys.stdout.write(f"{p} {table[p]}\n")
    return EXIT_OK


def _spec_from_args(args):
    if args.mode == "dirichlet":
        return dirichlet_spec(_fundamental(args.disc), args.prec)
    if args.curve is None or args.level is None:
        raise UsageError("--curve and --level are required for this mode")
    prec = args.prec or 20000
    nf = newform_coefficients(args.curve, prec, args.level)
    if args.mode == "std" or (args.mode == "deriv" and args.disc is None):
        if args.sign is None:
            raise UsageError("--sign is required for the standard L-function")
        return standard_spec(nf, sign=args.sign, prec=prec)
    return rankin_selberg_coeffs(nf, _fundamental(args.disc), args.chi, prec=prec)


def _one_or_list(xs: list):
    return xs[0] if len(xs) == 1 else xs


def cmd_lfunc(args) -> int:
    spec = _spec_from_args(args)
    samples = args.s or [0.5]
    if args.classical:
        samples = [s - 0.5 for s in samples]
    out = {"mode": args.mode, "label": spec.label}
    if args.mode == "deriv":
        cd = central_derivative(spec)
        out.update(value=cd.lambda_prime, error_estimate=cd.agreement, L_prime=cd.l_prime)
    else:
        vals = [lambda_eval(spec, s, T=1.2, tail_tol=np.inf) for s in samples]
        out.update(s=_one_or_list(samples), value=_one_or_list([v.value for v in vals]),
                   error_estimate=_one_or_list([v.error_estimate for v in vals]))
    out.update(sign=spec.sign, conductor=spec.conductor, residual=fe_residual(spec, samples))
    _emit_data(out, args.format)
    return EXIT_OK


def cmd_heegner(args) -> int:
    hp = heegner_points(args.N, args.disc, args.r, strict=not args.relax)
    _emit_data({"N": args.N, "disc": args.disc, "r": args.r, "count": len(hp.points),
                "degree": cm_cycle_degree(args.N, args.disc, r=args.r, strict=not args.relax),
                "points": [{"form": [p.form.a, p.form.b, p.form.c], "tau": p.tau,
                            "stabilizer_order": p.stabilizer_order} for p in hp.points]}, args.format)
    return EXIT_OK


def grid_function(path: str, order: int = 1) -> Callable[[complex], complex]:
    """Interpolant of a CSV lookup grid with rows re tau, im tau, value[, imag value]."""
    pts, vals = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            try:
                nums = [float(x) for x in row]
            except ValueError:
                continue  # header or comment
            if len(nums) not in (3, 4):
                raise UsageError(f"grid rows need 3 or 4 numbers, got {row}")
            pts.append(nums[:2])
            vals.append(complex(nums[2], nums[3] if len(nums) == 4 else 0.0))
    if len(pts) < 3:
        raise UsageError(f"grid {path} has fewer than 3 points")
    pts_arr, vals_arr = np.array(pts), np.array(vals)
    method = {0: "nearest", 1: "linear", 3: "cubic"}[order]

    def F(z: complex) -> complex:
        z = complex(z)
        return complex(griddata(pts_arr, vals_arr, [(z.real, z.imag)], method=method)[0])

    return F


def _trace_function(args) -> Callable[[complex], complex]:
    if args.fn == "j744":
        return lambda z: j_invariant(z) - 744
    if not args.grid:
        raise UsageError("--grid is required with --fn file")
    return grid_function(args.grid, args.order)


def cmd_trace(args) -> int:
    F = _trace_function(args)
    out = {"kind": args.kind, "fn": args.fn, "N": args.N, "disc": args.disc}
    if args.kind == "cm":
        r = args.r
        if r is None:
            r = next((x for x in range(2 * args.N) if (args.disc - x * x) % (4 * args.N) == 0), None)
            if r is None:
                raise UsageError(f"{args.disc} is not a square mod {4 * args.N}")
        out.update(r=r, trace=trace_cm(F, args.N, args.disc, r, strict=not args.relax))
    else:
        if args.N != 1:
            raise UsageError("geodesic traces are available for N = 1")
        d = _fundamental(args.disc)
        if d < 0:
            raise UsageError("geodesic traces need a positive discriminant")
        terms = []
        for f in class_group(d, narrow=True).classes:
            geo = geodesic_from_form(1, f)
            val = complex(trace_geodesic(F, geo, quad_points=args.quad_points))
            if not cmath.isfinite(val):
                raise SingularEvaluationError(f"function is not finite along the geodesic of {f}")
            terms.append({"form": [f.a, f.b, f.c], "length": geo.length, "value": val})
        out.update(geodesics=terms, trace=sum(t["value"] for t in terms))
    _emit_data(out, args.format)
    return EXIT_OK


def cmd_greens(args) -> int:
    rows = []
    if args.kind == "lift":
        L, D = build_signature12_lattice(args.N)
        ev = LiftEvaluator(L, D, sig12_coset(D, args.r), Fraction(-args.disc, 4 * args.N), args.s)
        for z in args.z:
            g = lift_closed_form(ev, z)
            rows.append((z.real, z.imag, "", "", g.value, g.tail_bound))
    else:
        if args.w is None:
            raise UsageError("--w is required for this kind")
        for z in args.z:
            if args.kind == "hilbert":
                L, D = build_LA_lattice(_fundamental(args.disc), 0, 1)
                g = hilbert_green(L, D, z, args.w, args.s, args.m)
            else:
                g = ResolventEvaluator(args.N, args.s).evaluate(z, args.w)
            rows.append((z.real, z.imag, args.w.real, args.w.imag, g.value, g.tail_bound))
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["x", "y", "x2", "y2", "value", "tail_bound"])
    for r in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in r])
    return EXIT_OK


def cmd_weil(args) -> int:
    if args.N is not None:
        _, D = build_signature12_lattice(args.N)
    else:
        _, D = build_LA_lattice(_fundamental(args.disc), 0, 1)
    res = relation_residuals(weil_generators(D))
    ok = all(v <= WEIL_TOL for v in res.values())
    _emit_data({"order": D.order, "residuals": res, "tol": WEIL_TOL, "pass": ok}, args.format)
    return EXIT_FAIL if args.check and not ok else EXIT_OK


def cmd_verify(args) -> int:
    cfg = SuiteConfig(max_disc=args.max_disc, disc=args.disc, prec=args.prec, seed=args.seed,
                      cache_dir=_cache_dir(args))
    t0 = time.perf_counter()
    checks = run_suite(args.suite, cfg)
    rep = report_dict(args.suite, checks, time.perf_counter() - t0)
    _write(emit_report(rep, args.format), args.output)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


COMMANDS = {
    "classgroup": cmd_classgroup, "lattice": cmd_lattice, "theta": cmd_theta, "ap": cmd_ap,
    "lfunc": cmd_lfunc, "heegner": cmd_heegner, "trace": cmd_trace, "greens": cmd_greens,
    "weil": cmd_weil, "verify": cmd_verify,
}

_USAGE_ERRORS = (UsageError, ValueError, KeyError, SingularPointError, EvenSignError,
                 InsufficientCoefficientsError)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except _USAGE_ERRORS as exc:
        sys.stderr.write(f"gzverify: error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
