"""``recbound``: upper bounds for recursive equations from the command line.

Exit codes: 0 when the bound is a certified postfixpoint, 2 when it only
passed sampled verification, 3 when it failed (or a check was rejected),
and 1 for unreadable input.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .core_order import CoeffVec, format_xreal, xreal
from .domains import parse_domain
from .engine import DEFAULT_THRESHOLDS, AnalysisResult, Status, WideningCfg, analyze
from .report import bound_lines, format_value, write_curves

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_SAMPLED = 2
EXIT_FAILED = 3

_SEVERITY = {EXIT_OK: 0, EXIT_SAMPLED: 1, EXIT_FAILED: 2, EXIT_ERROR: 3}

class UsageError(Exception):
    pass


def status_code(status: Status) -> int:
    if status in (Status.EXACT_POSTFIX, Status.WIDENED_POSTFIX):
        return EXIT_OK
    return EXIT_SAMPLED if status is Status.SAMPLED_ONLY else EXIT_FAILED


def worst(codes) -> int:
    return max(codes, key=_SEVERITY.__getitem__, default=EXIT_OK)


def _thresholds(text: Optional[str]) -> tuple:
    if not text:
        return DEFAULT_THRESHOLDS
    return tuple(xreal(t.strip()) for t in text.split(",") if t.strip())


def widening_cfg(args) -> WideningCfg:
    return WideningCfg(max_gens=args.max_gens, thresholds=_thresholds(args.thresholds), delay=args.delay)


def _trace_requested(args) -> bool:
    return bool(getattr(args, "trace", False)) or os.environ.get("RECBOUND_TRACE", "") not in ("", "0")


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------


def _analyze_one(path: str, args) -> tuple:
    """Run one file; returns ``(stdout text, exit code)``."""
    from .seq_lang import concrete_lfp_prefix, load_equation

    out = []
    try:
        eq = load_equation(path)
    except (OSError, ValueError) as exc:
        return f"{path}: error: {exc}\n", EXIT_ERROR
    domain = args.domain or eq.domain or "affine"
    try:
        dcfg = parse_domain(domain, eq.arity)
        wcfg = widening_cfg(args)
    except ValueError as exc:
        return f"{path}: error: {exc}\n", EXIT_ERROR
    trace = _trace_requested(args) or bool(args.csv)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res: AnalysisResult = analyze(
            eq.expr,
            dcfg,
            wcfg,
            max_iters=args.iters,
            early_exit=not args.no_early_exit,
            trace=trace,
            sample_N=args.sample_n,
        )
    out.append(f"equation: {eq.name or Path(path).stem}")
    out.append(f"domain: {dcfg.basis}")
    out.extend(bound_lines(res.bound))
    out.append(f"status: {res.status}")
    out.append(f"iterations: {res.iterations}")
    if res.early_exit:
        out.append("note: stopped at the first generator mapped below itself")
    for w in caught:
        out.append(f"warning: {w.message}")
    if res.sampled is not None and res.sampled.violations:
        point, lhs, rhs = res.sampled.violations[0]
        out.append(
            f"sampled check on 0..{res.sampled.N}: {len(res.sampled.violations)} violations, "
            f"first at {point}: {format_value(lhs)} > {format_value(rhs)}"
        )
    if _trace_requested(args) and res.trace:
        for k, A in enumerate(res.trace):
            out.append(f"  iterate {k}: {A}")
    code = status_code(res.status)
    if args.verify_prefix:
        from .engine import verify_prefix_sampled

        rep = verify_prefix_sampled(eq.expr, res.bound, args.verify_prefix)
        out.append(f"prefix check on 0..{args.verify_prefix}: {'holds' if rep.ok else 'fails'}")
    if args.csv:
        if eq.arity != 1:
            out.append("warning: CSV curves are only written for one-variable equations")
        else:
            oracle = concrete_lfp_prefix(eq.expr, args.csv_n).tolist()
            with open(args.csv, "w", encoding="utf-8", newline="") as fh:
                write_curves(fh, res.bound if res.trace else None, oracle, args.csv_n)
            out.append(f"curves written to {args.csv}")
    return "\n".join(out) + "\n", code


def cmd_analyze(args) -> int:
    files = args.files
    if args.csv and len(files) > 1:
        raise UsageError("--csv takes a single equation file")
    if args.jobs > 1 and len(files) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_analyze_one, files, [args] * len(files)))
    else:
        results = [_analyze_one(f, args) for f in files]
    for k, (text, code) in enumerate(results):
        if k:
            sys.stdout.write("\n")
        (sys.stdout if code != EXIT_ERROR else sys.stderr).write(text)
    return worst(code for _, code in results)


# ---------------------------------------------------------------------------
# piecewise
# ---------------------------------------------------------------------------


def cmd_analyze_pw(args) -> int:
    from .piecewise import analyze_pw, load_pw, oracle_violations

    eq = load_pw(args.file)
    res = analyze_pw(eq, widening_cfg(args), max_iters=args.iters)
    print(f"equation: {Path(args.file).stem}")
    if _trace_requested(args):
        for k, V in enumerate(res.trace):
            print(f"iterate {k}: " + " | ".join(V.format(eq)))
    for piece, line in zip(eq.pieces, res.value.format(eq)):
        print(f"{line}    on {piece.guard.format(eq.names)}")
    print(f"status: {res.status}")
    print(f"iterations: {res.iterations}")
    code = status_code(res.status)
    if args.check_n:
        from .piecewise import pw_concrete_lfp

        bad = oracle_violations(eq, res.value, args.check_n)
        box = f"[0..{args.check_n}]^{eq.arity}"
        if bad:
            p, want, got = bad[0]
            print(f"oracle on {box}: {len(bad)} violations, first at {p}: {format_value(got)} < {format_value(want)}")
            code = EXIT_FAILED
        else:
            table = pw_concrete_lfp(eq, args.check_n)
            exact = all(res.value.at(eq, p) == table.values[p] for p in table.points())
            print(f"oracle on {box}: dominated{', exact' if exact else ''}")
    return code


# ---------------------------------------------------------------------------
# reduce
# ---------------------------------------------------------------------------


def _load_operator(path: str):
    """A piecewise equation (``.pw``) or a Seq equation, with variable names."""
    if Path(path).suffix == ".pw":
        from .piecewise import load_pw

        eq = load_pw(path)
        return eq, eq.names
    from .seq_lang import load_equation

    eq = load_equation(path)
    return eq.expr, tuple(f"x{k}" for k in range(eq.arity))


def _affine_fit(values: Sequence) -> Optional[tuple]:
    if len(values) < 2 or any(not isinstance(v, (int, Fraction)) for v in values):
        return None
    b = Fraction(values[0])
    a = Fraction(values[1]) - b
    if all(Fraction(v) == a * n + b for n, v in enumerate(values)):
        return a, b
    return None


def _affine_text(a, b, var: str) -> str:
    if a == 0:
        return format_xreal(b)
    head = var if a == 1 else f"{format_xreal(a)}*{var}"
    if b == 0:
        return head
    return f"{head} {'+' if b > 0 else '-'} {format_xreal(abs(b))}"


def cmd_reduce(args) -> int:
    from .galois import parse_map, reduce_lfp
    from .piecewise import PWEquation, pw_concrete_lfp
    from .seq_lang import concrete_lfp_prefix

    phi, names = _load_operator(args.file)
    m = parse_map(args.map, names)
    red = reduce_lfp(m, phi, args.N)
    values = red.table.tolist()
    print(f"map: m({', '.join(names)}) = {m}")
    print(f"f#(n) for n = 0..{args.N}: " + " ".join(format_value(v) for v in values))
    print(f"postfix on 0..{args.N}: {'yes' if red.postfix else 'no'}")
    fit = _affine_fit(values)
    if fit:
        print(f"closed form: f#(n) = {_affine_text(*fit, 'n')}")
        a, b = fit
        inner = str(m) if (a, b) == (1, 0) else f"({m})"
        print(f"concretization: f({', '.join(names)}) <= {_affine_text(a, b, inner)}")
    code = EXIT_OK if red.postfix else EXIT_FAILED
    if args.check_n:
        M = args.check_n
        if m((M,) * m.arity) > args.N:
            raise UsageError(f"--check-N {M} needs table indices up to {m((M,) * m.arity)}; raise --N")
        conc = red.concretize(M)
        if isinstance(phi, PWEquation):
            oracle = pw_concrete_lfp(phi, M)
        else:
            oracle = concrete_lfp_prefix(phi, M, arity=m.arity)
        bad = [p for p in oracle.points() if conc.values[p] < oracle.values[p]]
        exact = not bad and all(conc.values[p] == oracle.values[p] for p in oracle.points())
        box = f"[0..{M}]^{m.arity}"
        if bad:
            print(f"oracle on {box}: {len(bad)} violations, first at {bad[0]}")
            code = EXIT_FAILED
        else:
            print(f"oracle on {box}: dominated{', exact' if exact else ''}")
    return code


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------


def cmd_synth(args) -> int:
    from . import synthesis

    dcfg = parse_domain(args.domain, 1)
    coeffs = [xreal(c) for c in args.coeffs.split(",")]
    if len(coeffs) != dcfg.basis.dim:
        raise UsageError(f"{dcfg.basis} needs {dcfg.basis.dim} coefficients, got {len(coeffs)}")
    a = CoeffVec.make(dcfg.basis, coeffs)
    system = synthesis.push_system(dcfg, a, Fraction(args.base))
    print(f"push {format_xreal(Fraction(args.base))} of {a} in {dcfg.basis}")
    print("system:")
    for line in system.describe():
        print(f"  {line}")
    gens = synthesis.minimal_generators(system, dcfg.basis)
    print(f"minimal generators: {gens}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# ode-check
# ---------------------------------------------------------------------------


def cmd_ode_check(args) -> int:
    from .ode import Itv, OdeParams, check_const_postfix, simulate

    p = OdeParams(
        Itv.parse(args.alpha), Itv.parse(args.beta), Itv.parse(args.gamma),
        Fraction(args.v0), Fraction(args.eps),
    )
    cert = check_const_postfix(p, Fraction(args.M))
    print(cert.describe())
    code = EXIT_OK if cert else EXIT_FAILED
    if cert and args.simulate:
        box = Itv(0, Fraction(args.M))
        escaped = [
            seed for seed in range(args.simulate)
            if not all(v in box for v in simulate(p, args.steps, seed))
        ]
        print(f"simulations: {args.simulate - len(escaped)}/{args.simulate} stayed in {box} for {args.steps} steps")
        if escaped:
            code = EXIT_FAILED
    return code


# ---------------------------------------------------------------------------
# oracle
# ---------------------------------------------------------------------------


def cmd_oracle(args) -> int:
    from .piecewise import PWEquation, pw_concrete_lfp
    from .seq_lang import concrete_lfp_prefix

    phi, names = _load_operator(args.file)
    if isinstance(phi, PWEquation):
        table = pw_concrete_lfp(phi, args.N)
    else:
        table = concrete_lfp_prefix(phi, args.N, arity=len(names) if len(names) > 1 else 1)
    if table.arity == 1:
        names = ("n",)
    print("\t".join(names) + "\tf")
    for p in table.points():
        print("\t".join(str(x) for x in p) + "\t" + format_value(table.values[p]))
    if not table.stable:
        print("warning: iteration budget exhausted before the table settled", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _widening_flags(p: argparse.ArgumentParser, iters: int) -> None:
    p.add_argument("--max-gens", type=int, default=4, help="generator cap per value (default 4)")
    p.add_argument("--thresholds", help="comma-separated widening ladder, e.g. 0,1,2,4,6,8 (inf is added)")
    p.add_argument("--delay", type=int, default=3, help="growth rounds before a coordinate is lifted")
    p.add_argument("--iters", type=int, default=iters, help="iteration budget")
    p.add_argument("--trace", action="store_true", help="print every iterate (also RECBOUND_TRACE=1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="recbound", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="bound a Seq equation in a basis domain")
    p.add_argument("files", nargs="+")
    p.add_argument("--domain", help="affine, poly:d, exp:m, exppoly:m,d (default: from the file)")
    _widening_flags(p, 50)
    p.add_argument("--no-early-exit", action="store_true", help="iterate to the stable value")
    p.add_argument("--sample-N", dest="sample_n", type=int, default=50, help="box for sampled checks")
    p.add_argument("--verify-prefix", type=int, default=0, metavar="N", help="also test the prefix side")
    p.add_argument("--csv", help="write oracle and bound curves to this file")
    p.add_argument("--csv-N", dest="csv_n", type=int, default=20, help="last row of the CSV")
    p.add_argument("--jobs", type=int, default=1, help="analyse several files in parallel")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("analyze-pw", help="bound a piecewise equation")
    p.add_argument("file")
    _widening_flags(p, 40)
    p.add_argument("--check-N", dest="check_n", type=int, default=0, help="compare with the oracle on [0..N]^d")
    p.set_defaults(func=cmd_analyze_pw)

    p = sub.add_parser("reduce", help="abstract a multivariate equation along a map such as x+y")
    p.add_argument("file")
    p.add_argument("--map", required=True)
    p.add_argument("--N", type=int, default=30, help="last index of the reduced table")
    p.add_argument("--check-N", dest="check_n", type=int, default=0, help="compare with the oracle on [0..N]^d")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("synth", help="show the Push system and its minimal solutions")
    p.add_argument("--domain", default="affine")
    p.add_argument("--coeffs", required=True, help="comma-separated coefficients of the input bound")
    p.add_argument("--base", default="0", help="value pushed at index 0")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("ode-check", help="check a constant interval bound for the Euler scheme")
    p.add_argument("--alpha", required=True, help="value or lo:hi")
    p.add_argument("--beta", required=True)
    p.add_argument("--gamma", required=True)
    p.add_argument("--v0", required=True)
    p.add_argument("--M", required=True)
    p.add_argument("--eps", default="1/100")
    p.add_argument("--simulate", type=int, default=0, metavar="K", help="also run K sampled trajectories")
    p.add_argument("--steps", type=int, default=500)
    p.set_defaults(func=cmd_ode_check)

    p = sub.add_parser("oracle", help="tabulate the least solution on a box")
    p.add_argument("file")
    p.add_argument("--N", type=int, default=10)
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (OSError, ValueError, UsageError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
