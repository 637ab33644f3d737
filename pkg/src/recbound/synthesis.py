"""Validity systems for Push transfer functions and their minimal generators.

The best abstraction of ``Push x`` applied to a bound ``a`` is the set of
parameter vectors ``p`` whose boundary function dominates the pushed
function.  For the bases used here that set is a polyhedron cut out by
a handful of inequalities with nonnegative coefficients:

* the base case ``sum_k e_k(0) p_k >= x``;
* one row per basis element saying that the shift of ``p`` dominates
  ``a`` coefficient-wise, e.g. ``p_k + p_{k+1} >= a_k`` for binomials.

Because all coefficients are nonnegative the feasible set is up-closed,
and a finite list of minimal points describes it.  We find them by
solving every square sub-system exactly, keeping solutions that satisfy
the whole system, and pushing each one down to a Pareto-minimal point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Sequence

from . import _linalg
from .bases import AxisBasis, TensorBasis
from .core_order import INF, CoeffVec, GenSet, XReal, format_xreal, xadd, xmul

MAX_UNKNOWNS = 12
DEFAULT_BUDGET = 50_000


class BudgetExceeded(RuntimeError):
    pass


class UnsupportedBasis(ValueError):
    pass


@dataclass(frozen=True)
class LinearSystem:
    """Rows ``sum_j coeffs[j] * p_j >= rhs`` over nonnegative unknowns."""

    unknowns: tuple
    rows: tuple  # of (coeffs: tuple[Fraction], rhs: Fraction)

    def __post_init__(self):
        for coeffs, _ in self.rows:
            if len(coeffs) != len(self.unknowns):
                raise ValueError("row length does not match the number of unknowns")
            if any(c < 0 for c in coeffs):
                raise ValueError("validity rows must have nonnegative coefficients")

    def describe(self) -> list:
        out = []
        for coeffs, rhs in self.rows:
            terms = []
            for c, name in zip(coeffs, self.unknowns):
                if c == 0:
                    continue
                terms.append(name if c == 1 else f"{format_xreal(c)}*{name}")
            lhs = " + ".join(terms) if terms else "0"
            out.append(f"{lhs} >= {format_xreal(rhs)}")
        return out

    def __str__(self) -> str:
        return "{" + ", ".join(self.describe()) + "}"


def unknown_names(ax: AxisBasis) -> tuple:
    if ax.kind == "affine":
        return ("u", "v")
    if ax.kind in ("binomial", "monomial"):
        return tuple(f"p{ax.d - i}" for i in range(ax.dim))
    if ax.kind in ("stirling", "powers"):
        return tuple(f"p{i + 1}" for i in range(ax.dim))
    return tuple(f"p{i // (ax.d + 1) + 1},{i % (ax.d + 1)}" for i in range(ax.dim))


def axis_push_rows(ax: AxisBasis, a: Sequence, x) -> list:
    """Rows of the validity system for one univariate slice.

    ``x`` is ``None`` for slices that carry no base-case constraint.
    """
    rows = []
    if x is not None:
        rows.append((tuple(Fraction(v) for v in ax.values(0)), Fraction(x)))
    for r, prow in enumerate(ax.pop_matrix):
        rows.append((tuple(Fraction(v) for v in prow), a[r]))
    return rows


def _basis_of(cfg) -> TensorBasis:
    return cfg if isinstance(cfg, TensorBasis) else cfg.basis


def push_system(cfg, a: CoeffVec, x) -> LinearSystem:
    """Validity system for ``Push x`` applied to the finite bound ``a``."""
    basis = _basis_of(cfg)
    if not basis.is_univariate:
        raise UnsupportedBasis("multivariate push systems are built per slice (see multivar)")
    ax = basis.axes[0]
    if ax.kind not in ("affine", "binomial", "monomial", "stirling", "stirling_binomial"):
        raise UnsupportedBasis(f"no push system for {ax}")
    coeffs = a.coeffs if isinstance(a, CoeffVec) else tuple(a)
    if any(c == INF for c in coeffs) or x == INF:
        raise ValueError("push systems are built for finite inputs only")
    return LinearSystem(unknown_names(ax), tuple(axis_push_rows(ax, coeffs, x)))


def _row_value(coeffs, p) -> XReal:
    total: XReal = Fraction(0)
    for c, v in zip(coeffs, p):
        total = xadd(total, xmul(c, v))
    return total


def satisfies(sys: LinearSystem, p) -> bool:
    values = p.coeffs if isinstance(p, CoeffVec) else tuple(p)
    if len(values) != len(sys.unknowns):
        raise ValueError(
            f"system has {len(sys.unknowns)} unknowns, vector has {len(values)} entries"
        )
    if any(v != INF and v < 0 for v in values):
        return False
    return all(_row_value(coeffs, values) >= rhs for coeffs, rhs in sys.rows)


def tighten(sys: LinearSystem, p: Sequence) -> tuple:
    """Clamp to the orthant, then lower coordinates one by one.

    Each coordinate is lowered to the least nonnegative value keeping
    every row satisfied.  Lowering a later coordinate can only raise the
    floor of an earlier one, so a single pass ends at a Pareto-minimal
    feasible point.  ``p`` must satisfy every row once clamped.
    """
    p = [max(Fraction(v), Fraction(0)) for v in p]
    for i in range(len(p)):
        floor = Fraction(0)
        for coeffs, rhs in sys.rows:
            c = coeffs[i]
            if c == 0:
                continue
            rest = sum(coeffs[j] * p[j] for j in range(len(p)) if j != i)
            floor = max(floor, (rhs - rest) / c)
        p[i] = floor
    return tuple(p)


def _raw_feasible(sys: LinearSystem, p) -> bool:
    return all(sum(c * v for c, v in zip(coeffs, p)) >= rhs for coeffs, rhs in sys.rows)


def minimal_generators(
    sys: LinearSystem, basis: TensorBasis = None, budget: int = DEFAULT_BUDGET, vertices: bool = False
):
    """Minimal points of the feasible set, as a GenSet when ``basis`` is given.

    Candidates are exact solutions of square sub-systems that satisfy
    every row, each repaired with :func:`tighten`.  By default the
    sub-systems use the system's own rows, padded with zero bounds only
    when there are fewer rows than unknowns; this yields the points where
    the constraints are tight and keeps generator sets small.  With
    ``vertices`` the zero bounds always take part, so every vertex of
    ``{rows, p >= 0}`` is tried.

    The result is sound and contains only Pareto-minimal points; when the
    minimal points form a continuum we return finitely many of them.
    """
    k = len(sys.unknowns)
    if k > MAX_UNKNOWNS:
        raise BudgetExceeded(f"{k} unknowns exceeds the enumeration limit {MAX_UNKNOWNS}")
    unit = [(tuple(Fraction(int(i == j)) for j in range(k)), Fraction(0)) for i in range(k)]
    rows = list(sys.rows)
    if not rows:
        points = {tuple(Fraction(0) for _ in range(k))}
        return _package(points, basis)
    if vertices:
        n_cases = comb(len(rows) + k, k)
        subsets = combinations(rows + unit, k)
    else:
        s = min(k, len(rows))
        n_cases = comb(len(rows), s) * comb(k, k - s)
        subsets = (
            chosen + tuple(unit[z] for z in zeros)
            for chosen in combinations(rows, s)
            for zeros in combinations(range(k), k - s)
        )
    if n_cases > budget:
        raise BudgetExceeded(f"{n_cases} sub-systems exceed the budget {budget}")
    points = set()
    for chosen in subsets:
        sol = _linalg.solve([r[0] for r in chosen], [r[1] for r in chosen])
        if sol is None:
            continue
        clamped = [max(v, Fraction(0)) for v in sol]
        if not _raw_feasible(sys, clamped):
            continue
        points.add(tighten(sys, clamped))
    points = {p for p in points if satisfies(sys, p)}
    return _package(points, basis)


def _package(points, basis):
    pts = sorted(points)
    minimal = [p for p in pts if not any(q != p and all(a <= b for a, b in zip(q, p)) for q in pts)]
    if basis is None:
        return minimal
    if not minimal:
        return GenSet.top(basis)
    return GenSet.of(basis, (CoeffVec.make(basis, p) for p in minimal))
