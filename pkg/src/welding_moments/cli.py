"""Command-line front end.

Exit codes: 0 when every check passes, 1 for usage or domain errors,
2 when a mathematical inconsistency is detected.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import mpmath

from . import __version__
from .diagonal_numerics import (
    ConjectureParams,
    DomainError,
    Estimate,
    cardy_exponent,
    cardy_F,
    cardy_log_F,
    diag_cdf,
    diag_laplace,
    ode_residual,
    sandwich_check,
)
from .exact_series import GaussianRational
from .graded_algebra import (
    enumerate_partitions,
    from_coordinates,
    kernel,
    monomial,
    primitive_integer,
    rho0,
    rhoinf,
)
from .moment_engine import (
    DEFAULT_MAX_LEVEL,
    HARD_MAX_LEVEL,
    EngineConfig,
    MomentEngine,
    MomentError,
    MomentTable,
    table_to_csv,
)
from .virasoro_ops import (
    RouteMismatchError,
    build_level_operators,
    commutator_check,
    compute_P,
    exterior_bracket_check,
    stress_check,
    verify_diagonal_lemma,
)
from .welding_family import (
    DEFAULT_ORDER,
    FamilyError,
    FamilyPoint,
    family_a_closed,
    family_area,
    family_P_check,
    family_series,
    inversion_check,
)

EXIT_OK, EXIT_USAGE, EXIT_MATH = 0, 1, 2
DEFAULT_DIGITS = 16

# reference moments, keyed by "P|Q"
GOLDEN_MOMENTS = {
    "1|1": Fraction(1, 2),
    "2|2": Fraction(1, 3),
    "1+1|2": Fraction(1, 3),
    "2|1+1": Fraction(1, 3),
    "1+1|1+1": Fraction(17, 42),
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    """Everything that determines a run's output; equal configs give equal bytes."""

    command: str
    subcommand: str | None = None
    fmt: str = "text"
    output: str | None = None
    digits: int = DEFAULT_DIGITS
    workers: int | None = None
    params: dict[str, Any] = field(default_factory=dict)


@dataclass
class Outcome:
    payload: Any
    text: list[str]
    code: int = EXIT_OK
    csv_rows: list[list[str]] | None = None


# --------------------------------------------------------------------------
# formatting


def _est(e: Estimate, digits: int) -> dict:
    return e.to_dict(digits)


def _num(x, digits: int) -> str:
    return mpmath.nstr(mpmath.mpf(x), digits, strip_zeros=False)


def _render(out: Outcome, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(out.payload, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if fmt == "csv":
        if out.csv_rows is None:
            raise UsageError("csv output is not available for this command")
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(out.csv_rows)
        return buf.getvalue()
    return "\n".join(out.text) + "\n"


def _grid(spec: str) -> list[Fraction]:
    try:
        a, b, s = (Fraction(t) for t in spec.split(":"))
    except ValueError as exc:
        raise UsageError(f"grid must look like start:stop:step, got {spec!r}") from exc
    if s <= 0 or b < a:
        raise UsageError("grid needs step > 0 and stop >= start")
    out, x = [], a
    while x <= b:
        out.append(x)
        x += s
    return out


def _mp(text: str) -> mpmath.mpf:
    # decimal or rational input, parsed exactly then rounded once
    q = Fraction(text)
    return mpmath.mpf(q.numerator) / q.denominator


def _params(ns) -> ConjectureParams:
    with mpmath.workdps(50):
        return ConjectureParams(_mp(ns.beta), _mp(ns.c))


# --------------------------------------------------------------------------
# moments


def cmd_moments(ns) -> Outcome:
    level = ns.level
    if level < 0:
        raise UsageError("level must be nonnegative")
    cap = HARD_MAX_LEVEL if ns.allow_large else DEFAULT_MAX_LEVEL
    if level > cap:
        raise UsageError(f"level {level} exceeds {cap}" + ("" if ns.allow_large else "; pass --allow-large for 7 and 8"))
    cfg = EngineConfig(max_level=max(level, 1), allow_large=ns.allow_large, workers=ns.workers or EngineConfig().workers)
    eng = MomentEngine(cfg)
    eng.solve_through(level)
    table = eng.tables[level]
    mapping = _moment_map(table)
    text = [f"{k} = {v}" for k, v in mapping.items()]
    code = EXIT_OK
    payload: Any = mapping
    if ns.verify:
        checks = _verify_lines(eng, level)
        if not all(c["pass"] for c in checks):
            code = EXIT_MATH
        text = [_check_line(c) for c in checks]
        payload = {"moments": mapping, "checks": checks}
    rows = list(csv.reader(io.StringIO(table_to_csv([table]))))
    return Outcome(payload, text, code, rows)


def _check_line(c: dict) -> str:
    verdict = "PASS" if c["pass"] else "FAIL"
    if " = " in c["identity"]:
        # the identity already states the expected value
        return f"{c['identity']} {verdict}" + ("" if c["pass"] else f" (got {c['value']})")
    if not c["value"]:
        return f"{c['identity']} {verdict}"
    return f"{c['identity']} = {c['value']} {verdict}"


def _moment_map(table: MomentTable) -> dict[str, str]:
    items = sorted(table.entries.items(), key=lambda kv: (kv[0][0].sort_key(), kv[0][1].sort_key()))
    return {f"{_p(P)}|{_p(Q)}": str(v) for (P, Q), v in items}


def _p(P) -> str:
    return str(P) if P.parts else ""


def _verify_lines(eng: MomentEngine, level: int) -> list[dict]:
    out = []
    for n in range(1, level + 1):
        mapping = _moment_map(eng.tables[n])
        for key, want in GOLDEN_MOMENTS.items():
            if key in mapping:
                got = Fraction(mapping[key])
                out.append({"identity": key, "value": str(got), "pass": got == want})
    out.extend(eng.verify_identities(level) if level >= 1 else [])
    return out


# --------------------------------------------------------------------------
# operators


def cmd_operators(ns) -> Outcome:
    sub = ns.op
    if sub == "pn":
        if ns.n < 0:
            raise UsageError("n must be nonnegative")
        s = str(compute_P(ns.n))
        return Outcome({"n": ns.n, "P": s}, [s])
    if sub == "matrices":
        _level_ok(ns.n)
        ops = build_level_operators(ns.n)
        d = ops.as_dict()
        code = EXIT_OK if all(ops.checks.values()) else EXIT_MATH
        text = []
        for name in ("R1", "R1t", "N1", "R2", "R2t", "N2"):
            if name in d:
                text.append(f"{name}: rows {d[name]['rows']} cols {d[name]['cols']}")
                text.extend("  " + " ".join(row) for row in d[name]["entries"])
        text.extend(f"check {k}: {'PASS' if v else 'FAIL'}" for k, v in d["checks"].items())
        return Outcome(d, text, code)
    if sub == "kernel":
        _level_ok(ns.n)
        K = kernel(build_level_operators(ns.n, with_action=False).R1t)
        basis = [str(from_coordinates(primitive_integer(v), ns.n, "u")) for v in K]
        return Outcome({"n": ns.n, "basis": basis}, ["basis " + json.dumps(basis)])
    if sub == "commutators":
        return _commutators(ns.n)
    if sub == "stress":
        lo, hi = -ns.window, ns.window
        reports = [stress_check(t, (lo, hi)) for t in ("rho0", "rhoinf")]
        payload = [
            {"target": r.target, "window": list(r.window), "failures": r.failures,
             "details": {str(k): v for k, v in sorted(r.details.items())}, "pass": r.ok}
            for r in reports
        ]
        text = [f"{r.target} n in [{lo},{hi}]: {'PASS' if r.ok else 'FAIL ' + str(r.failures)}" for r in reports]
        return Outcome(payload, text, EXIT_OK if all(r.ok for r in reports) else EXIT_MATH)
    if sub == "diagonal-lemma":
        if ns.m is None:
            r = verify_diagonal_lemma(ns.n, order=ns.order)
        else:
            try:
                r = verify_diagonal_lemma(ns.n, ns.m)
            except ValueError as exc:
                raise UsageError(str(exc)) from exc
        verdict = "PASS (exact)" if r.ok else f"FAIL difference {r.difference}"
        return Outcome({"case": r.label, "pass": r.ok, "difference": str(r.difference)}, [verdict],
                       EXIT_OK if r.ok else EXIT_MATH)
    raise UsageError(f"unknown operators subcommand {sub}")


def _level_ok(n: int) -> None:
    if not 1 <= n <= HARD_MAX_LEVEL:
        raise UsageError(f"n must be in 1..{HARD_MAX_LEVEL}")


def _commutators(N: int) -> Outcome:
    if not 1 <= N <= 4:
        raise UsageError("commutator range must be in 1..4")
    interior = [rho0(1) * monomial("u", P) for k in range(0, 3) for P in enumerate_partitions(k)]
    exterior = [rhoinf(1) * monomial("l", P) for k in range(0, 3) for P in enumerate_partitions(k)]
    rows = []
    for n in range(-N, N + 1):
        for m in range(-N, N + 1):
            for kind in ("LL", "LB", "BB"):
                bad = sum(1 for x in interior if not commutator_check(n, m, x, kind).is_zero())
                rows.append({"n": n, "m": m, "bracket": kind, "side": "interior", "failures": bad})
            bad = sum(1 for x in exterior if not exterior_bracket_check(n, m, x).is_zero())
            rows.append({"n": n, "m": m, "bracket": "LL-opposite", "side": "exterior", "failures": bad})
    interior_ok = all(r["failures"] == 0 for r in rows if r["side"] == "interior")
    exterior_ok = all(r["failures"] == 0 for r in rows if r["side"] == "exterior")
    text = [
        f"interior [L_n,L_m]=(m-n)L_(n+m), [L_n,Lbar_m]=0, |n|,|m|<={N}: {'PASS' if interior_ok else 'FAIL'}",
        f"exterior [L_n,L_m]=(n-m)L_(n+m) (diagnostic): {'holds' if exterior_ok else 'fails'}",
    ]
    payload = {"range": N, "interior_pass": interior_ok, "exterior_opposite_bracket": exterior_ok, "rows": rows}
    return Outcome(payload, text, EXIT_OK if interior_ok else EXIT_MATH)


# --------------------------------------------------------------------------
# diagonal numerics


def cmd_diagonal(ns) -> Outcome:
    dg = ns.digits
    sub = ns.op
    if sub in ("cdf", "laplace", "ode"):
        p = _params(ns)
        if sub == "cdf":
            e = diag_cdf(_mp(ns.x), p)
        elif sub == "laplace":
            e = diag_laplace(_mp(ns.lam), p)
        else:
            e = ode_residual(_mp(ns.lam), p, _mp(ns.h))
        d = _est(e, dg)
        return Outcome(d, [d["value"], f"error_bound {d['error_bound']}"], csv_rows=[["value", "error_bound", "method"], [d["value"], d["error_bound"], d["method"]]])
    if sub == "cardy":
        rho = _mp(ns.rho)
        if ns.report == "exponent":
            e = cardy_exponent(rho)
        elif ns.small_rho:
            e = cardy_log_F(rho)
        else:
            e = cardy_F(rho)
        d = _est(e, dg)
        if ns.report == "exponent":
            d["value"] = _num(e.value, 8)
            d["reference"] = "5*pi^2/4"
        d["quantity"] = "exponent" if ns.report == "exponent" else ("log F" if ns.small_rho else "F")
        return Outcome(d, [d["value"], f"error_bound {d['error_bound']}"])
    if sub == "sandwich":
        grid = _grid(ns.grid)
        rep = sandwich_check(_mp(ns.beta), [_mp(str(x)) for x in grid])
        rows = [
            {"rho": mpmath.nstr(r.rho, 6), "lower": _num(r.lower, dg), "middle": _num(r.middle, dg),
             "upper": _num(r.upper, dg), "lower_ok": r.lower_ok, "upper_ok": r.upper_ok}
            for r in rep.rows
        ]
        runs = [[mpmath.nstr(a, 6), mpmath.nstr(b, 6)] for a, b in rep.feasible_runs]
        payload = {"beta": _num(rep.beta, dg), "rows": rows, "feasible_runs": runs, "feasible_everywhere": rep.ok}
        text = ["rho       lower_ok upper_ok"]
        text += [f"{r['rho']:<9} {str(r['lower_ok']):<8} {r['upper_ok']}" for r in rows]
        text.append(f"feasible runs: {runs}")
        csv_rows = [["rho", "lower", "middle", "upper", "lower_ok", "upper_ok"]]
        csv_rows += [[r["rho"], r["lower"], r["middle"], r["upper"], str(r["lower_ok"]), str(r["upper_ok"])] for r in rows]
        # infeasibility is a property of the candidate law, not an inconsistency
        return Outcome(payload, text, EXIT_OK, csv_rows)
    raise UsageError(f"unknown diagonal subcommand {sub}")


# --------------------------------------------------------------------------
# welding family


def cmd_family(ns) -> Outcome:
    try:
        w = GaussianRational.parse(ns.w)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"cannot parse w={ns.w!r}") from exc
    pt = FamilyPoint(ns.N, w)
    order = ns.order
    closed = family_a_closed(pt)
    area = family_area(pt, order)
    payload: dict[str, Any] = {
        "N": pt.N,
        "w": str(pt.w),
        "a_closed": closed.text(),
        "a_truncated": _num(area.value, ns.digits),
        "order": order,
        "tail_bound": mpmath.nstr(area.tail_bound, 3),
    }
    text = [f"N={pt.N} w={pt.w}", f"a_closed {closed.text()}", f"a_truncated {payload['a_truncated']} (order {order}, tail bound {payload['tail_bound']})"]
    code = EXIT_OK
    if ns.check_pn:
        fs = family_series(pt, max(ns.check_pn, pt.N) + 1)
        checks = [family_P_check(pt, n, fs) for n in range(1, ns.check_pn + 1)]
        payload["P"] = [c.as_dict() for c in checks]
        for c in checks:
            text.append(
                f"P_{c.n}(u) = {c.P_u}  P_{c.n}(l) = {c.P_l}  pattern {'PASS' if c.pattern_ok else 'FAIL'}"
                f"  -conj relation {'holds' if c.stated_relation_ok else 'fails'}"
                f"  signed relation {'holds' if c.signed_relation_ok else 'fails'}"
            )
        if not all(c.pattern_ok and c.signed_relation_ok for c in checks):
            code = EXIT_MATH
    if ns.inversion:
        inv = inversion_check(pt, min(order, 60))
        payload["inversion"] = {"pass": inv.ok, "parameter": str(inv.parameter), "order": inv.order,
                                "mismatches": inv.mismatches, "a_equal": inv.a_equal}
        text.append(f"inversion gives the family at w={inv.parameter}: {'PASS' if inv.ok else 'FAIL'}")
        if not inv.ok:
            code = EXIT_MATH
    return Outcome(payload, text, code)


# --------------------------------------------------------------------------
# reproduce


def cmd_reproduce(ns) -> Outcome:
    from .acceptance import render_markdown, run_all

    selected = set(ns.only) if ns.only else None
    results = run_all(selected)
    report = render_markdown(results)
    path = ns.report
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(report)
    text = [r.line() for r in results] + [f"report written to {path}"]
    payload = {"report": path, "results": [{"number": r.number, "title": r.title, "pass": r.ok} for r in results]}
    return Outcome(payload, text, EXIT_OK if all(r.ok for r in results) else EXIT_MATH)


# --------------------------------------------------------------------------
# argument parsing


def _common(p: argparse.ArgumentParser, default_fmt: str) -> None:
    p.add_argument("--format", dest="fmt", choices=("json", "csv", "text"), default=default_fmt)
    p.add_argument("--output", "-o", help="write to this file instead of stdout")
    p.add_argument("--digits", type=int, default=DEFAULT_DIGITS, help="significant digits for decimals")
    p.add_argument("--workers", type=int, default=None, help="worker processes (env WELDING_MOMENTS_WORKERS)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="welding-moments", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sp = ap.add_subparsers(dest="command", required=True)

    m = sp.add_parser("moments", help="solve the moment table at one level")
    m.add_argument("--level", type=int, required=True)
    m.add_argument("--verify", action="store_true", help="check reference values and identities")
    m.add_argument("--allow-large", action="store_true", help="allow levels 7 and 8")
    _common(m, None)  # json, or text with --verify
    m.set_defaults(func=cmd_moments)

    o = sp.add_parser("operators", help="residue polynomials, level operators and identity checks")
    osp = o.add_subparsers(dest="op", required=True)
    for name in ("pn", "matrices", "kernel"):
        q = osp.add_parser(name)
        q.add_argument("--n", type=int, required=True)
        _common(q, "text")
    q = osp.add_parser("commutators")
    q.add_argument("--n", type=int, default=3, help="range |n|,|m| <= N")
    _common(q, "text")
    q = osp.add_parser("stress")
    q.add_argument("--window", type=int, default=6)
    _common(q, "text")
    q = osp.add_parser("diagonal-lemma")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--m", type=int, default=None, help="second index for the off-diagonal identity")
    q.add_argument("--order", choices=("L_n L_-n", "L_-n L_n"), default="L_n L_-n")
    _common(q, "text")
    o.set_defaults(func=cmd_operators)

    d = sp.add_parser("diagonal", help="numerics of the candidate diagonal law")
    dsp = d.add_subparsers(dest="op", required=True)

    def law(q):
        q.add_argument("--beta", required=True)
        q.add_argument("--c", default="0")

    q = dsp.add_parser("cdf")
    law(q)
    q.add_argument("--x", required=True)
    _common(q, "text")
    q = dsp.add_parser("laplace")
    law(q)
    q.add_argument("--lambda", dest="lam", required=True)
    _common(q, "text")
    q = dsp.add_parser("ode")
    law(q)
    q.add_argument("--lambda", dest="lam", required=True)
    q.add_argument("--h", default="1e-3")
    _common(q, "text")
    q = dsp.add_parser("cardy")
    q.add_argument("--rho", required=True)
    q.add_argument("--small-rho", action="store_true", help="report log F, evaluated in log space")
    q.add_argument("--report", choices=("value", "exponent"), default="value")
    _common(q, "text")
    q = dsp.add_parser("sandwich")
    q.add_argument("--beta", required=True)
    q.add_argument("--grid", default="0.5:10:0.5")
    _common(q, "text")
    d.set_defaults(func=cmd_diagonal)

    f = sp.add_parser("family", help="closed-form welding family checks")
    f.add_argument("--N", type=int, required=True)
    f.add_argument("--w", required=True, help='Gaussian rational such as "1/2" or "1/3+1/4 i"')
    f.add_argument("--order", type=int, default=DEFAULT_ORDER)
    f.add_argument("--check-pn", type=int, default=0, metavar="K", help="evaluate P_1..P_K on the family")
    f.add_argument("--inversion", action="store_true")
    _common(f, "text")
    f.set_defaults(func=cmd_family)

    r = sp.add_parser("reproduce", help="run the acceptance checks and write a markdown report")
    r.add_argument("--report", default="acceptance_report.md")
    r.add_argument("--only", type=int, nargs="*", help="criterion numbers to run")
    _common(r, "text")
    r.set_defaults(func=cmd_reproduce)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        ns = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    if getattr(ns, "workers", None) is not None and ns.workers < 1:
        print("error: --workers must be positive", file=sys.stderr)
        return EXIT_USAGE
    if ns.fmt is None:
        ns.fmt = "text" if getattr(ns, "verify", False) else "json"
    cfg = RunConfig(ns.command, getattr(ns, "op", None), ns.fmt, ns.output, ns.digits, ns.workers,
                    {k: v for k, v in vars(ns).items() if k not in ("func", "command", "op")})
    try:
        out = ns.func(ns)
        text = _render(out, cfg.fmt)
    except (UsageError, DomainError, FamilyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (MomentError, RouteMismatchError, ArithmeticError) as exc:
        print(f"inconsistency: {exc}", file=sys.stderr)
        return EXIT_MATH
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return out.code


if __name__ == "__main__":
    sys.exit(main())
