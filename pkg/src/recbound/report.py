"""Human-readable rendering of bounds, tables and CSV curves."""

from __future__ import annotations

import csv
import math
from fractions import Fraction
from typing import Optional, Sequence, TextIO

from .bases import IncompatibleBases, TensorBasis, convert_basis, default_var_names, expanded_basis
from .core_order import INF, CoeffVec, GenSet, format_xreal


def _times(c, label: str) -> str:
    if label == "1":
        return format_xreal(c)
    if c == 1:
        return label
    return f"{format_xreal(c)}*{label}"


def native_form(g: CoeffVec, names: Optional[Sequence[str]] = None) -> str:
    """The bound written in its own basis, e.g. ``C(n,2)+C(n,1)``."""
    basis = g.basis
    names = names or default_var_names(basis.arity)
    if g.is_top:
        return "inf"
    if basis.is_univariate and basis.axes[0].kind == "affine":
        u, v = g.coeffs
        return f"{format_xreal(u)}*{names[0]} + {format_xreal(v)}"
    terms = [_times(c, basis.label(i, names)) for i, c in enumerate(g.coeffs) if c != 0]
    return "+".join(terms) if terms else "0"


def _poly_text(coeffs: Sequence[int], labels: Sequence[str]) -> str:
    out = ""
    for c, label in zip(coeffs, labels):
        if c == 0:
            continue
        mag = abs(c)
        term = str(mag) if label == "1" else label if mag == 1 else f"{mag}*{label}"
        if not out:
            out = ("-" if c < 0 else "") + term
        else:
            out += ("-" if c < 0 else "+") + term
    return out or "0"


def expanded_form(g: CoeffVec, names: Optional[Sequence[str]] = None) -> Optional[str]:
    """Monomial (or power-times-monomial) expansion over a common denominator.

    Returns ``None`` when there is no finite expansion to show.
    """
    if not g.is_finite:
        return None
    basis = g.basis
    names = names or default_var_names(basis.arity)
    target = expanded_basis(basis)
    try:
        coeffs = convert_basis(basis, target, g.coeffs)
    except (IncompatibleBases, ValueError):
        return None
    den = 1
    for c in coeffs:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    labels = [target.label(i, names) for i in range(target.dim)]
    if target.is_univariate and target.axes[0].kind != "monomial":
        # power bases are stored smallest base first; show the dominant term first
        ints, labels = ints[::-1], labels[::-1]
    body = _poly_text(ints, labels)
    if den == 1:
        return body
    if sum(1 for c in ints if c) > 1:
        body = f"({body})"
    return f"{body}/{den}"


def bound_lines(A: GenSet, names: Optional[Sequence[str]] = None) -> list:
    """``f(n) <= ...`` plus one expansion line per generator when useful."""
    basis: TensorBasis = A.basis
    names = list(names or default_var_names(basis.arity))
    head = f"f({', '.join(names)}) <= "
    gens = list(A.gens)
    forms = [(native_form(g, names), expanded_form(g, names)) for g in gens]
    affine = basis.is_univariate and basis.axes[0].kind == "affine"

    def both(native, expanded):
        if expanded is None or expanded == native or affine:
            return native
        return f"{native} = {expanded}"

    if len(gens) == 1:
        return [head + both(*forms[0])]
    lines = [head + "min( " + ", ".join(n for n, _ in forms) + " )"]
    if affine:
        return lines
    for native, expanded in forms:
        lines.append("  " + both(native, expanded))
    return lines


def write_curves(fh: TextIO, A: Optional[GenSet], oracle: Sequence, N: int) -> None:
    """CSV with columns ``n, oracle, g1, g2, ...``; rows for ``n = 0..N``."""
    gens = list(A.gens) if A is not None else []
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["n", "oracle"] + [f"g{k + 1}" for k in range(len(gens))])
    if A is None:
        return
    for n in range(N + 1):
        w.writerow([n, format_xreal(oracle[n])] + [format_xreal(g((n,))) for g in gens])


def format_value(v) -> str:
    if v == INF:
        return "inf"
    if isinstance(v, (int, Fraction)):
        return format_xreal(v)
    return str(v)
