"""Fourier-Motzkin elimination for small systems of linear inequalities.

A row ``(coeffs, const)`` stands for ``sum coeffs[j] * x[j] + const >= 0``.
For feasibility, rows are scaled to integer coefficients and tightened
after every combination (divide by the gcd, round the constant down).  That step is valid for
integer points only, so an "infeasible" answer means "no integer point"
while a "feasible" answer only promises a rational point.
"""

from __future__ import annotations

import math
from fractions import Fraction
from itertools import product
from typing import Iterable, Optional, Sequence

INF = math.inf


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


def normalize_row(coeffs: Sequence, const, integral: bool = True) -> tuple:
    coeffs = [Fraction(c) for c in coeffs]
    const = Fraction(const)
    den = 1
    for c in coeffs:
        den = _lcm(den, c.denominator)
    if integral:
        sc = [int(c * den) for c in coeffs]
        g = 0
        for c in sc:
            g = math.gcd(g, abs(c))
        if g == 0:
            return tuple(Fraction(0) for _ in coeffs), const
        k = math.floor(const * den / g)
        return tuple(Fraction(c // g) for c in sc), Fraction(k)
    lead = next((abs(c) for c in coeffs if c != 0), None)
    if lead is None:
        return tuple(coeffs), const
    return tuple(c / lead for c in coeffs), const / lead


def _simplify(rows: Iterable, integral: bool):
    """Normalise, dedupe and keep the strongest constant per direction.

    Returns ``None`` as soon as a constant row is violated.
    """
    best: dict = {}
    for coeffs, const in rows:
        coeffs, const = normalize_row(coeffs, const, integral)
        if all(c == 0 for c in coeffs):
            if const < 0:
                return None
            continue
        if coeffs not in best or const < best[coeffs]:
            best[coeffs] = const
    # opposite directions: c.x + k1 >= 0 and -c.x + k2 >= 0 need k1 + k2 >= 0
    for coeffs, const in best.items():
        neg = tuple(-c for c in coeffs)
        if neg in best and const + best[neg] < 0:
            return None
    return [(c, k) for c, k in best.items()]


def eliminate(rows: list, j: int, integral: bool = True) -> Optional[list]:
    pos, neg, rest = [], [], []
    for row in rows:
        c = row[0][j]
        (pos if c > 0 else neg if c < 0 else rest).append(row)
    out = list(rest)
    for (pc, pk), (nc, nk) in product(pos, neg):
        a, b = pc[j], -nc[j]
        coeffs = tuple(b * x + a * y for x, y in zip(pc, nc))
        out.append((coeffs, b * pk + a * nk))
    return _simplify(out, integral)


def _order(rows: list, nvars: int, skip=()) -> Optional[int]:
    best, best_cost = None, None
    for j in range(nvars):
        if j in skip:
            continue
        p = sum(1 for c, _ in rows if c[j] > 0)
        n = sum(1 for c, _ in rows if c[j] < 0)
        if p == 0 and n == 0:
            continue
        cost = p * n - p - n
        if best_cost is None or cost < best_cost:
            best, best_cost = j, cost
    return best


def feasible(rows: Iterable, nvars: int) -> bool:
    """False only if the system has no integer solution."""
    current = _simplify(rows, True)
    while current:
        j = _order(current, nvars)
        if j is None:
            break
        current = eliminate(current, j, True)
    return current is not None


def bounds(rows: Iterable, nvars: int, objective: Sequence, offset=0):
    """Rational range ``(lo, hi)`` of ``objective . x + offset`` on the system.

    Returns ``None`` if the rational relaxation is empty; missing bounds are
    reported as -inf / inf.
    """
    t = nvars
    ext = [(tuple(c) + (Fraction(0),), k) for c, k in rows]
    obj = tuple(Fraction(c) for c in objective)
    # t - objective - offset = 0
    ext.append((tuple(-c for c in obj) + (Fraction(1),), -Fraction(offset)))
    ext.append((obj + (Fraction(-1),), Fraction(offset)))
    current = _simplify(ext, integral=False)
    while current:
        j = _order(current, nvars + 1, skip=(t,))
        if j is None:
            break
        current = eliminate(current, j, integral=False)
    if current is None:
        return None
    lo, hi = -INF, INF
    for coeffs, k in current:
        c = coeffs[t]
        if c > 0:
            lo = max(lo, -k / c)
        elif c < 0:
            hi = min(hi, k / -c)
    if lo > hi:
        return None
    return lo, hi


def integer_point(rows: Iterable, nvars: int, box: int) -> Optional[tuple]:
    """A point of ``[0..box]^nvars`` satisfying every row, if there is one."""
    rows = list(rows)
    for p in product(range(box + 1), repeat=nvars):
        if all(sum(c * x for c, x in zip(coeffs, p)) + k >= 0 for coeffs, k in rows):
            return p
    return None
