"""Extended nonnegative reals, coefficient vectors and generator sets.

An abstract value in a B-bound domain is a finite set of parameter vectors.
Each vector names one boundary function in a fixed basis, and the set stands
for the conjunction "f <= g for every generator g".  Because parameters are
nonnegative and every basis element is nonnegative and nondecreasing on the
naturals, the coordinate-wise order on parameters is a sound (not complete)
approximation of the pointwise order on the functions they denote.

Scalars are ``Fraction`` values or ``math.inf``.  Products follow the
convention 0 * inf = 0, which lets a generator mention an infinite
coefficient on an element that vanishes at some points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Sequence, Union

if TYPE_CHECKING:
    from .bases import TensorBasis

INF = math.inf

XReal = Union[Fraction, float]  # float only ever holds math.inf


class BasisMismatch(ValueError):
    """Raised when two values from different bases are combined."""


# ---------------------------------------------------------------------------
# scalars
# ---------------------------------------------------------------------------


def xreal(value) -> XReal:
    """Coerce ``value`` into an exact nonnegative extended real."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "+inf", "oo", "∞"):
            return INF
        value = Fraction(text)
    if isinstance(value, float):
        if math.isinf(value) and value > 0:
            return INF
        if math.isnan(value):
            raise ValueError("NaN is not an extended real")
    q = Fraction(value)
    if q < 0:
        raise ValueError(f"negative value {value!r} outside the nonnegative reals")
    return q


def is_inf(x: XReal) -> bool:
    return x == INF


def xadd(x: XReal, y: XReal) -> XReal:
    if x == INF or y == INF:
        return INF
    return x + y


def xmul(x: XReal, y: XReal) -> XReal:
    if x == 0 or y == 0:
        return Fraction(0)
    if x == INF or y == INF:
        return INF
    return x * y


def xsum(values: Iterable[XReal]) -> XReal:
    total: XReal = Fraction(0)
    for v in values:
        total = xadd(total, v)
    return total


def monus(x: XReal, y: XReal) -> XReal:
    """Truncated subtraction ``max(x - y, 0)``; inf - inf is taken as inf."""

    if x == INF:
        return INF
    if y == INF:
        return Fraction(0)
    return x - y if x > y else Fraction(0)


def format_xreal(x: XReal) -> str:
    if x == INF:
        return "inf"
    q = Fraction(x)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# coefficient vectors
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CoeffVec:
    """One boundary function: a nonnegative combination of basis elements.

    The top boundary (the function that is +inf everywhere) is represented
    canonically with every coefficient equal to inf; ``make`` performs that
    canonicalisation whenever the coefficient of the constant element is
    infinite, since such a vector already denotes +inf at every point.
    """

    basis: "TensorBasis"
    coeffs: tuple

    @classmethod
    def make(cls, basis: "TensorBasis", coeffs: Sequence) -> "CoeffVec":
        cs = tuple(xreal(c) for c in coeffs)
        if len(cs) != basis.dim:
            raise ValueError(
                f"basis {basis} has dimension {basis.dim}, got {len(cs)} coefficients"
            )
        if cs[basis.const_index] == INF:
            cs = (INF,) * basis.dim
        return cls(basis, cs)

    @classmethod
    def zero(cls, basis: "TensorBasis") -> "CoeffVec":
        return cls(basis, (Fraction(0),) * basis.dim)

    @classmethod
    def top(cls, basis: "TensorBasis") -> "CoeffVec":
        return cls(basis, (INF,) * basis.dim)

    @property
    def is_top(self) -> bool:
        return self.coeffs[self.basis.const_index] == INF

    @property
    def top_flag(self) -> bool:
        return self.is_top

    @property
    def is_finite(self) -> bool:
        return all(c != INF for c in self.coeffs)

    def __call__(self, point) -> XReal:
        return self.basis.evaluate(self.coeffs, point)

    def __getitem__(self, i: int) -> XReal:
        return self.coeffs[i]

    def __len__(self) -> int:
        return len(self.coeffs)

    def sort_key(self):
        return tuple((1, 0) if c == INF else (0, c) for c in self.coeffs)

    def __str__(self) -> str:
        if self.is_top:
            return "top"
        return "(" + ",".join(format_xreal(c) for c in self.coeffs) + ")"

    __repr__ = __str__


def _check_basis(a: CoeffVec, b: CoeffVec) -> None:
    if a.basis != b.basis:
        raise BasisMismatch(f"{a.basis} vs {b.basis}")


def dominates(g1: CoeffVec, g2: CoeffVec) -> bool:
    """True iff ``g1 <= g2`` coordinate-wise (so ``g1`` is the tighter bound)."""
    _check_basis(g1, g2)
    if g2.is_top:
        return True
    if g1.is_top:
        return False
    return all(x <= y for x, y in zip(g1.coeffs, g2.coeffs))


def coord_max(g1: CoeffVec, g2: CoeffVec) -> CoeffVec:
    _check_basis(g1, g2)
    return CoeffVec.make(g1.basis, [max(x, y) for x, y in zip(g1.coeffs, g2.coeffs)])


# ---------------------------------------------------------------------------
# generator sets
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GenSet:
    """A finite antichain of generators; the abstract value is their up-closure.

    ``gens`` is kept sorted lexicographically so that printing, hashing
    and iteration order are deterministic.  The explicit singleton holding
    the top vector is the least informative value.
    """

    basis: "TensorBasis"
    gens: tuple

    @classmethod
    def of(cls, basis: "TensorBasis", gens: Iterable[CoeffVec]) -> "GenSet":
        gens = list(gens)
        for g in gens:
            if g.basis != basis:
                raise BasisMismatch(f"{g.basis} vs {basis}")
        return normalize(cls(basis, tuple(gens)))

    @classmethod
    def top(cls, basis: "TensorBasis") -> "GenSet":
        return cls(basis, (CoeffVec.top(basis),))

    @classmethod
    def zero(cls, basis: "TensorBasis") -> "GenSet":
        return cls(basis, (CoeffVec.zero(basis),))

    @property
    def is_top(self) -> bool:
        return all(g.is_top for g in self.gens)

    def __iter__(self):
        return iter(self.gens)

    def __len__(self) -> int:
        return len(self.gens)

    def __call__(self, point) -> XReal:
        """Concretisation: the least bound among the generators at ``point``."""
        return min((g(point) for g in self.gens), default=INF)

    def __str__(self) -> str:
        return "{" + ", ".join(str(g) for g in self.gens) + "}"

    __repr__ = __str__


def normalize(A: GenSet) -> GenSet:
    """Drop duplicates and every generator dominated-above by another one."""
    uniq = sorted(set(A.gens), key=CoeffVec.sort_key)
    keep = [
        g
        for g in uniq
        if not any(h is not g and h != g and dominates(h, g) for h in uniq)
    ]
    if not keep:
        keep = [CoeffVec.top(A.basis)]
    return GenSet(A.basis, tuple(keep))


def join(A: GenSet, B: GenSet) -> GenSet:
    """Least upper bound: pointwise max of the two concretisations."""
    if A.basis != B.basis:
        raise BasisMismatch(f"{A.basis} vs {B.basis}")
    return normalize(GenSet(A.basis, tuple(coord_max(a, b) for a in A for b in B)))


def meet(A: GenSet, B: GenSet) -> GenSet:
    """Conjunction of both bound sets."""
    if A.basis != B.basis:
        raise BasisMismatch(f"{A.basis} vs {B.basis}")
    return normalize(GenSet(A.basis, A.gens + B.gens))


def leq_abs(A: GenSet, B: GenSet) -> bool:
    """Sound test that ``A`` is at least as precise as ``B``.

    Holds when every generator of ``B`` sits above some generator of ``A``;
    then the bounds of ``A`` imply those of ``B`` pointwise.
    """
    if A.basis != B.basis:
        raise BasisMismatch(f"{A.basis} vs {B.basis}")
    return all(any(dominates(a, b) for a in A) for b in B)
