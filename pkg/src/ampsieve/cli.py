"""Command-line front end.

    ampsieve classical-bound --N 30 --Q 3 --omega zero
    ampsieve verify-minorant --poly default-sign
    ampsieve dual-check --N 20 --Q 20 --trials 100 --seed 7
    ampsieve sign-change --level 1000003 --A 2 --num-forms 10000 --seed 1

Every subcommand writes one JSON record ``{command, params, result, passed}``
(or a CSV table with ``--format csv``) to ``--output``, to
``$AMPSIEVE_OUTPUT_DIR/<command>.<ext>`` when that variable is set, or to
stdout.  Exit status: 0 pass, 1 failed check, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import harmonic, modform, residue_sieve, sato_tate
from .reports import dumps, frac_str, to_jsonable

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
OUTPUT_DIR_ENV = "AMPSIEVE_OUTPUT_DIR"


class UsageError(Exception):
    pass


def _ensemble(args, prime_bound: int):
    if args.ensemble:
        return modform.load_ensemble(args.ensemble, level_q=args.level, prime_bound=prime_bound, k=args.k)
    return modform.synthetic_ensemble(args.num_forms, prime_bound, args.level, args.seed)


def _poly(name: str) -> sato_tate.MinorantPoly:
    if name == "default-sign":
        return sato_tate.MinorantPoly.sign_default()
    if name.startswith("file:"):
        return sato_tate.MinorantPoly.load(name[len("file:"):])
    raise UsageError(f"unknown polynomial {name!r} (use default-sign or file:<path>)")


# each handler returns (result dict, passed, csv rows or None)


def cmd_classical_bound(args):
    omega = residue_sieve.OmegaSystem.from_preset(args.omega, args.Q, args.seed)
    delta = Fraction(args.delta) if args.delta is not None else None
    check = residue_sieve.verify_sieve(omega, args.N, delta)
    result = to_jsonable(check)
    rows = [{"quantity": k, "value": v} for k, v in result["report"].items()]
    return result, check.passed, rows


def cmd_sift(args):
    omega = residue_sieve.OmegaSystem.from_preset(args.omega, args.Q, args.seed)
    members = residue_sieve.sift_bruteforce(omega, args.N)
    return {"count": len(members), "members": members}, True, [{"n": n} for n in members]


def cmd_dual_check(args):
    rows = [harmonic.dual_check(N, Q, args.trials, args.seed) for N in args.N for Q in args.Q]
    table = [to_jsonable(r) for r in rows]
    return {"rows": table}, all(r.passed for r in rows), table


def cmd_squares_demo(args):
    rows, fitted = residue_sieve.squares_trend(args.N, args.omega)
    table = []
    for r in rows:
        row = to_jsonable(r)
        row["fitted_ratio"] = fitted * r.log_quarter
        table.append(row)
    passed = all(r.passed and r.count >= math.isqrt(r.N) for r in rows) if args.omega == "nonsquares" else all(r.passed for r in rows)
    return {"rows": table, "fitted_constant": fitted}, passed, table


def _minorants(args, ens):
    Y = _poly(args.poly)
    return {p: Y for p in ens.primes}


def cmd_modform_cor1(args):
    ens = _ensemble(args, args.Q)
    report = modform.cor1_check(ens, _minorants(args, ens))
    result = to_jsonable(report)
    return result, report.ratio is not None or report.lhs == 0, [result]


def cmd_modform_cor2(args):
    ens = _ensemble(args, args.Q)
    report = modform.cor2_bound(ens, _minorants(args, ens), args.N)
    result = to_jsonable(report)
    return result, report.chain_holds, [_flat(result)]


def cmd_sign_change(args):
    Q = math.floor(math.log(args.level) ** args.A)
    ens = _ensemble(args, max(Q, 2))
    report = modform.sign_change_experiment(ens, args.A, Y=_poly(args.poly), epsilon=args.epsilon)
    result = to_jsonable(report)
    passed = report.sieve is None or (report.sieve.chain_holds and bool(report.probability_within_bound))
    return result, passed, [_flat(result)]


def cmd_verify_minorant(args):
    Y = _poly(args.poly)
    report = sato_tate.verify_minorant(Y, grid_points=args.grid)
    result = to_jsonable(report)
    result["poly"] = Y.to_json()
    result["monomial"] = [frac_str(c) for c in Y.monomial()]
    rows = [{"x": x, "Y": y, "sgn": s} for x, y, s in sato_tate.minorant_graph(Y, args.graph_points)]
    return result, report.passed, rows


def _flat(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        if isinstance(v, dict):
            out.update(_flat(v, f"{prefix}{k}."))
        else:
            out[f"{prefix}{k}"] = v
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ampsieve", description="Large sieve inequalities by amplification, checked numerically.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--output", "-o", help="report path (default: stdout or $%s)" % OUTPUT_DIR_ENV)
        p.add_argument("--format", choices=["json", "csv"], default="json")
        p.add_argument("--seed", type=int, default=0)
        return p

    omega_help = "zero | squares | nonsquares | random | file:<path>"

    p = common(sub.add_parser("classical-bound", help="exact sieve bounds plus brute-force count"))
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--Q", type=int, required=True)
    p.add_argument("--omega", default="zero", help=omega_help)
    p.add_argument("--delta", help="override Delta (rational, e.g. 38 or 77/2)")
    p.set_defaults(handler=cmd_classical_bound)

    p = common(sub.add_parser("sift", help="brute-force sifted set"))
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--Q", type=int, required=True)
    p.add_argument("--omega", default="zero", help=omega_help)
    p.set_defaults(handler=cmd_sift)

    p = common(sub.add_parser("dual-check", help="random vectors vs Gram extreme vs N-1+Q^2"))
    p.add_argument("--N", type=int, nargs="+", required=True)
    p.add_argument("--Q", type=int, nargs="+", required=True)
    p.add_argument("--trials", type=int, default=100)
    p.set_defaults(handler=cmd_dual_check)

    p = common(sub.add_parser("squares-demo", help="bounds for the sieve keeping perfect squares"))
    p.add_argument("--N", type=int, nargs="+", default=[10**4, 10**5, 10**6])
    p.add_argument("--omega", default="nonsquares", choices=["nonsquares", "squares"])
    p.set_defaults(handler=cmd_squares_demo)

    def modform_common(p):
        p.add_argument("--level", type=int, default=1_000_003, help="level q")
        p.add_argument("--num-forms", type=int, default=10_000)
        p.add_argument("--ensemble", help="eigenvalue CSV instead of a synthetic ensemble")
        p.add_argument("--k", type=int, help="weight of the loaded forms (metadata)")
        p.add_argument("--poly", default="default-sign", help="default-sign | file:<path>")
        return p

    p = modform_common(common(sub.add_parser("modform-cor1", help="variance bound for sum_p (Y_p - beta_p0)")))
    p.add_argument("--Q", type=int, default=10)
    p.set_defaults(handler=cmd_modform_cor1)

    p = modform_common(common(sub.add_parser("modform-cor2", help="amplified sieve bound for forms")))
    p.add_argument("--Q", type=int, default=10)
    p.add_argument("--N", type=int, default=210)
    p.set_defaults(handler=cmd_modform_cor2)

    p = modform_common(common(sub.add_parser("sign-change", help="forms with lambda_f(p) <= 0 for p <= (log q)^A")))
    p.add_argument("--A", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=0.1)
    p.set_defaults(handler=cmd_sign_change)

    p = common(sub.add_parser("verify-minorant", help="check Y <= sgn on [-2, 2]"))
    p.add_argument("--poly", default="default-sign", help="default-sign | file:<path>")
    p.add_argument("--grid", type=int, default=100_000)
    p.add_argument("--graph-points", type=int, default=401, help="rows in the CSV graph")
    p.set_defaults(handler=cmd_verify_minorant)
    return parser


def _params(args) -> dict:
    skip = {"handler", "output", "format", "command"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _render(args, record: dict, rows) -> str:
    if args.format == "json":
        return dumps(record)
    buf = io.StringIO()
    rows = rows or []
    fields = list(rows[0]) if rows else []
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in row.items()})
    return buf.getvalue()


def _emit(args, text: str) -> None:
    target = args.output
    if target is None and os.environ.get(OUTPUT_DIR_ENV):
        target = Path(os.environ[OUTPUT_DIR_ENV]) / f"{args.command}.{args.format}"
    if target is None:
        sys.stdout.write(text)
    else:
        Path(target).parent.mkdir(parents=True, exist_ok=True)
        Path(target).write_text(text)


def _error(kind: str, message: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": message}, sort_keys=True) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        result, passed, rows = args.handler(args)
    except (UsageError, ValueError, KeyError, OSError) as exc:
        _error(type(exc).__name__, str(exc))
        return EXIT_USAGE
    record = {"command": args.command, "params": _params(args), "result": result, "passed": bool(passed)}
    _emit(args, _render(args, record, rows))
    if not passed:
        _error("CheckFailed", f"{args.command}: internal check failed")
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
