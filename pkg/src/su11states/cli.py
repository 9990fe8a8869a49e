"""``su11states`` command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 usage or parameter error.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys

import numpy as np

from .errors import ParameterError, SU11Error
from .fock import Representation, dump_fixture, oracle_moments
from .moments import Family, FamilyParams, analytic_state, check_params, full_report, oracle_state
from .report import MomentsReport
from .scheme import SchemeParams, run_pipeline

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

CSV_FIELDS = ("mean_K3", "var_K3", "mean_N", "var_N", "g2", "var_q", "var_p", "var_K1", "var_K2", "sat_residual")
CHI_PARAMS = ("chi_mag", "theta", "t", "u")
ETA_PARAMS = ("eta", "delta")


class UsageError(Exception):
    """Bad flag combination detected after argparse."""


def _fmt(x: float) -> str:
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def _family(args) -> Family:
    name = args.family_pos or args.family
    if name is None:
        raise UsageError("a family is required (k3-kplus, k3-kminus, k1k2, k2k3)")
    try:
        return Family.parse(name)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _rep_l(args) -> tuple[Representation, int]:
    if args.n is None:
        raise UsageError("--n <photon number> is required")
    if args.n < 0:
        raise UsageError("--n must be non-negative")
    return Representation.from_photon_number(args.n)


def _family_params(family: Family, args) -> FamilyParams:
    if family.uses_chi:
        if args.chi is None:
            raise UsageError(f"--chi is required for {family.value}")
        return FamilyParams.polar(args.chi, args.theta)
    if args.eta is None:
        raise UsageError(f"--eta is required for {family.value}")
    return FamilyParams(eta=args.eta)


def _header_params(family: Family, p: FamilyParams) -> dict:
    if family.uses_chi:
        return {"chi_mag": abs(p.chi), "theta": float(np.angle(p.chi)) if p.chi != 0 else 0.0}
    return {"eta": p.eta}


# -- subcommands ----------------------------------------------------------------------


def cmd_state(args, out) -> int:
    family = _family(args)
    rep, l = _rep_l(args)
    p = check_params(family, _family_params(family, args))
    state = analytic_state(family, p, rep, l, n_max=args.nmax)
    text = dump_fixture(state, l, family.value, _header_params(family, p))
    if args.dump:
        with open(args.dump, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    out.write(text)
    return EXIT_OK


def cmd_moments(args, out) -> int:
    family = _family(args)
    rep, l = _rep_l(args)
    p = check_params(family, _family_params(family, args))
    data = full_report(family, p, rep, l).as_dict()
    orc = oracle_moments(oracle_state(family, p, rep, l), family.pair).as_dict() if args.oracle else None
    if args.json:
        payload = {"closed_form": data, "oracle": orc} if orc else data
        out.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        return EXIT_OK
    for key, val in data.items():
        text = _fmt(val) if isinstance(val, float) else str(val)
        if orc is not None and isinstance(val, float):
            text += f"  oracle={_fmt(orc[key])}"
        out.write(f"{key} = {text}\n")
    return EXIT_OK


def _parse_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise UsageError(f"--range expects lo:hi, got {text!r}") from None
    if not lo < hi:
        raise UsageError("--range requires lo < hi")
    return lo, hi


def _scan_point(family: Family, param: str, x: float, args) -> FamilyParams:
    if param == "chi_mag":
        return FamilyParams.polar(x, args.theta)
    if param == "theta":
        if args.chi is None:
            raise UsageError("--chi is required when scanning theta")
        return FamilyParams.polar(args.chi, x)
    if param == "t":
        return FamilyParams.polar(1 / math.sqrt(x), args.theta) if x > 0 else FamilyParams.polar(math.inf, args.theta)
    if param == "u":
        return FamilyParams.polar(1 / x, args.theta) if x > 0 else FamilyParams.polar(math.inf, args.theta)
    if param == "eta":
        return FamilyParams(eta=x)
    return FamilyParams(eta=math.sqrt(1 - x) if x <= 1 else math.nan)  # delta = 1 - eta^2


def _row(report: MomentsReport) -> list[float]:
    vals = [getattr(report, f) for f in CSV_FIELDS[:-1]]
    return vals + [report.saturation_residual]


def scan_rows(family: Family, rep: Representation, l: int, param: str, grid, args, err=sys.stderr) -> list[list[float]]:
    rows = []
    for x in grid:
        try:
            p = check_params(family, _scan_point(family, param, float(x), args))
            vals = _row(full_report(family, p, rep, l))
        except (SU11Error, ArithmeticError, ValueError) as exc:
            err.write(f"note: {param}={_fmt(x)}: {type(exc).__name__}: {exc}; row emitted as nan\n")
            vals = [math.nan] * len(CSV_FIELDS)
        rows.append([float(x)] + vals)
    return rows


def cmd_scan(args, out) -> int:
    family = _family(args)
    rep, l = _rep_l(args)
    if args.param is None or args.range is None:
        raise UsageError("scan requires --param and --range")
    allowed = CHI_PARAMS if family.uses_chi else ETA_PARAMS
    if args.param not in allowed:
        raise UsageError(f"--param {args.param} is not admissible for {family.value} (use one of {', '.join(allowed)})")
    if args.points < 2:
        raise UsageError("--points must be at least 2")
    lo, hi = _parse_range(args.range)
    grid = np.linspace(lo, hi, args.points)
    rows = scan_rows(family, rep, l, args.param, grid, args)
    buf = io.StringIO(newline="\n")
    buf.write(",".join(("param",) + CSV_FIELDS) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(buf.getvalue())
    else:
        out.write(buf.getvalue())
    return EXIT_OK


def cmd_simulate(args, out) -> int:
    if args.n is None:
        raise UsageError("--n <photon count> is required")
    p = SchemeParams(args.xi1, args.xi2, args.theta1, args.theta2, args.measure, args.n)
    res = run_pipeline(p, n_two=args.nmax)
    pt = res.post
    sat = oracle_moments(res.final, pt.family.pair).saturation_residual
    lines = [
        ("chi", f"{_fmt(res.chi.real)}{'+' if res.chi.imag >= 0 else '-'}{_fmt(abs(res.chi.imag))}j"),
        ("chi_mag", _fmt(abs(res.chi))),
        ("family", pt.family.value),
        ("k", _fmt(p.rep.k)),
        ("l", str(p.l)),
        ("eta", _fmt(pt.eta)),
        ("phi", _fmt(pt.phi)),
        ("omega", _fmt(pt.omega)),
        ("P(n)", _fmt(res.probability)),
        ("fidelity", _fmt(res.fidelity)),
        ("conditional_residual", _fmt(res.conditional_residual)),
        ("final_residual", _fmt(res.final_residual)),
        ("saturation_residual", _fmt(sat)),
    ]
    for key, val in lines:
        out.write(f"{key} = {val}\n")
    return EXIT_OK


def cmd_verify(args, out) -> int:
    from .verify import check_fixture, run_all

    results = []
    for path in args.fixture or ():
        try:
            results.append(check_fixture(path))
        except (OSError, ValueError, KeyError, SU11Error) as exc:
            out.write(f"FAIL  fixture {path}: unreadable or malformed ({exc})\n")
            return EXIT_FAIL
    if not args.fixtures_only:
        results.extend(run_all(args.grid))
    for r in results:
        out.write(r.line() + "\n")
    failed = [r for r in results if not r.passed]
    out.write(f"{len(results) - len(failed)}/{len(results)} checks passed\n")
    return EXIT_FAIL if failed else EXIT_OK


# -- parser ---------------------------------------------------------------------------


def _add_family(sp: argparse.ArgumentParser) -> None:
    names = [f.value for f in Family]
    sp.add_argument("family_pos", nargs="?", choices=names, metavar="FAMILY", help=f"one of {', '.join(names)}")
    sp.add_argument("--family", choices=names)
    sp.add_argument("--n", type=int, help="photon number n; fixes k and l")
    sp.add_argument("--chi", type=float, help="|chi| for the chi families")
    sp.add_argument("--theta", type=float, default=0.0, help="phase of chi in radians")
    sp.add_argument("--eta", type=float, help="eta for k1k2 or k2k3")
    sp.add_argument("--nmax", type=int, help="Fock truncation override")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="su11states", description="SU(1,1) algebra eigenstates and intelligent states of the two-photon realization.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("state", help="print normalized Fock amplitudes in fixture format")
    _add_family(sp)
    sp.add_argument("--dump", metavar="PATH", help="also write the fixture to PATH")
    sp.set_defaults(func=cmd_state)

    sp = sub.add_parser("moments", help="print the closed-form moments report")
    _add_family(sp)
    sp.add_argument("--json", action="store_true")
    sp.add_argument("--oracle", action="store_true", help="print the brute-force values alongside")
    sp.set_defaults(func=cmd_moments)

    sp = sub.add_parser("scan", help="scan one parameter and emit CSV")
    _add_family(sp)
    sp.add_argument("--param", choices=CHI_PARAMS + ETA_PARAMS)
    sp.add_argument("--range", metavar="LO:HI")
    sp.add_argument("--points", type=int, default=101)
    sp.add_argument("--out", metavar="PATH")
    sp.set_defaults(func=cmd_scan)

    sp = sub.add_parser("simulate", help="run the amplifier + photon counting protocol")
    sp.add_argument("--xi1", type=float, default=0.0)
    sp.add_argument("--xi2", type=float, required=True)
    sp.add_argument("--theta1", type=float, default=0.0)
    sp.add_argument("--theta2", type=float, default=0.0)
    sp.add_argument("--measure", choices=("a", "b"), default="b")
    sp.add_argument("--n", type=int)
    sp.add_argument("--nmax", type=int, help="initial two-mode truncation per mode")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("verify", help="run the self-check suite")
    sp.add_argument("--grid", choices=("small", "full"), default="small")
    sp.add_argument("--fixture", action="append", metavar="PATH", help="golden fixture to compare (repeatable)")
    sp.add_argument("--fixtures-only", action="store_true", help="skip the built-in grid checks")
    sp.set_defaults(func=cmd_verify)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except UsageError as exc:
        sys.stderr.write(f"su11states: error: {exc}\n")
    except ParameterError as exc:
        sys.stderr.write(f"su11states: parameter error: {type(exc).__name__}: {exc}\n")
    except SU11Error as exc:
        sys.stderr.write(f"su11states: numerical error: {type(exc).__name__}: {exc}\n")
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
