"""Basis families for boundary functions over the naturals.

Every univariate family below consists of nonnegative, nondecreasing
functions of ``n``.  Element order inside a basis follows the usual written
order of coefficient vectors:

=====================  ==========================================
``affine``             ``n, 1``
``monomial(d)``        ``n^d, ..., n, 1``
``binomial(d)``        ``C(n,d), ..., C(n,1), C(n,0)``
``stirling(m)``        ``S(n+1,1), ..., S(n+1,m)``
``stirling_binomial``  ``S(n+1,b)*C(n,k)`` for b = 1..m, k = 0..d
``powers(m)``          ``1^n, ..., m^n``
``powers_monomial``    ``j^n * n^l`` for j = 1..m, l = 0..d
=====================  ==========================================

``S`` is the Stirling number of the second kind.  The shifted index
``S(n+1, b)`` makes ``b = 1`` the constant function and keeps the shift
operator linear with nonnegative coefficients.

Multivariate bases are tensor products of univariate ones, flattened in
row-major order (axis 0 varies slowest).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from itertools import product
from typing import Optional, Sequence

from . import _linalg
from .core_order import INF, CoeffVec, xadd, xmul

TABLE_CAP = 64
MAX_TENSOR_DIM = 4096


class IncompatibleBases(ValueError):
    pass


class NegativeCoefficients(ValueError):
    """A change of basis produced coefficients that are not valid parameters."""

    def __init__(self, coeffs):
        super().__init__(f"conversion produced negative coefficients {coeffs}")
        self.coeffs = coeffs


# ---------------------------------------------------------------------------
# combinatorial numbers
# ---------------------------------------------------------------------------


def _build_binomials(cap: int):
    rows = [[1]]
    for n in range(1, cap + 1):
        prev = rows[-1]
        rows.append([1] + [prev[k - 1] + prev[k] for k in range(1, n)] + [1])
    return rows


def _build_stirling(cap: int):
    table = [[0] * (cap + 1) for _ in range(cap + 1)]
    table[0][0] = 1
    for n in range(cap):
        for k in range(1, n + 2):
            table[n + 1][k] = k * table[n][k] + table[n][k - 1]
    return table


_BINOM = _build_binomials(TABLE_CAP)
_STIRLING = _build_stirling(TABLE_CAP)


def binomial(n: int, k: int) -> int:
    if n < 0 or k < 0:
        raise ValueError("binomial expects nonnegative arguments")
    if k > n:
        return 0
    if n <= TABLE_CAP:
        return _BINOM[n][k]
    return math.comb(n, k)


@lru_cache(maxsize=None)
def _stirling_big(n: int, k: int) -> int:
    # explicit inclusion-exclusion formula; exact in integers
    total = sum((-1) ** (k - j) * math.comb(k, j) * j**n for j in range(k + 1))
    return total // math.factorial(k)


def stirling2(n: int, k: int) -> int:
    """Stirling numbers of the second kind, ``S(n+1,k) = k S(n,k) + S(n,k-1)``."""
    if n < 0 or k < 0:
        raise ValueError("stirling2 expects nonnegative arguments")
    if k > n:
        return 0
    if n <= TABLE_CAP:
        return _STIRLING[n][k]
    return _stirling_big(n, k)


# ---------------------------------------------------------------------------
# univariate families
# ---------------------------------------------------------------------------

_KINDS = (
    "affine",
    "monomial",
    "binomial",
    "stirling",
    "stirling_binomial",
    "powers",
    "powers_monomial",
)


@dataclass(frozen=True)
class AxisBasis:
    kind: str
    m: int = 0
    d: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.d < 0:
            raise ValueError("degree must be nonnegative")
        if self.kind in ("stirling", "stirling_binomial", "powers", "powers_monomial"):
            if self.m < 1:
                raise ValueError("exponential bases need m >= 1")

    # -- shape -----------------------------------------------------------

    @property
    def dim(self) -> int:
        if self.kind == "affine":
            return 2
        if self.kind in ("monomial", "binomial"):
            return self.d + 1
        if self.kind in ("stirling", "powers"):
            return self.m
        return self.m * (self.d + 1)

    def _pair(self, idx: int):
        return idx // (self.d + 1) + 1, idx % (self.d + 1)

    def _index(self, b: int, k: int) -> int:
        return (b - 1) * (self.d + 1) + k

    @property
    def const_index(self) -> int:
        if self.kind == "affine":
            return 1
        if self.kind in ("monomial", "binomial"):
            return self.d
        return 0

    @property
    def var_index(self) -> Optional[int]:
        """Index of the element equal to ``n`` itself, if the family has one."""
        if self.kind == "affine":
            return 0
        if self.kind in ("monomial", "binomial"):
            return self.d - 1 if self.d >= 1 else None
        if self.kind in ("stirling_binomial", "powers_monomial"):
            return 1 if self.d >= 1 else None
        return None

    def label(self, idx: int, var: str = "n") -> str:
        k = self.kind
        if k == "affine":
            return (var, "1")[idx]
        if k == "monomial":
            e = self.d - idx
            return "1" if e == 0 else var if e == 1 else f"{var}^{e}"
        if k == "binomial":
            return "1" if idx == self.d else f"C({var},{self.d - idx})"
        if k == "stirling":
            return f"S({var}+1,{idx + 1})"
        if k == "powers":
            return "1" if idx == 0 else f"{idx + 1}^{var}"
        b, l = self._pair(idx)
        if k == "stirling_binomial":
            return f"S({var}+1,{b})" + ("" if l == 0 else f"*C({var},{l})")
        head = "" if b == 1 else f"{b}^{var}"
        tail = "" if l == 0 else var if l == 1 else f"{var}^{l}"
        return "*".join(p for p in (head, tail) if p) or "1"

    # -- values ------------------------------------------------------------

    def value(self, idx: int, n: int) -> int:
        k = self.kind
        if k == "affine":
            return n if idx == 0 else 1
        if k == "monomial":
            return n ** (self.d - idx)
        if k == "binomial":
            return binomial(n, self.d - idx)
        if k == "stirling":
            return stirling2(n + 1, idx + 1)
        if k == "powers":
            return (idx + 1) ** n
        b, l = self._pair(idx)
        if k == "stirling_binomial":
            return stirling2(n + 1, b) * binomial(n, l)
        return b**n * n**l

    def values(self, n: int) -> list:
        return [self.value(i, n) for i in range(self.dim)]

    def support(self, idx: int) -> int:
        """Least ``n`` where the element is positive (it stays positive after)."""
        k = self.kind
        if k == "affine":
            return 1 if idx == 0 else 0
        if k == "monomial":
            return 0 if idx == self.d else 1
        if k == "binomial":
            return self.d - idx
        if k == "stirling":
            return idx
        if k == "powers":
            return 0
        b, l = self._pair(idx)
        if k == "stirling_binomial":
            return max(b - 1, l)
        return 0 if l == 0 else 1

    def widest_within(self, s) -> int:
        """Element with the latest support start not exceeding ``s``.

        ``inf * e`` only depends on the support of ``e``, so this element is
        the most precise carrier of an infinite coefficient that must cover
        every point from ``s`` onwards.
        """
        best = self.const_index
        for i in range(self.dim):
            if self.support(i) <= s and self.support(i) > self.support(best):
                best = i
        return best

    # -- shift ---------------------------------------------------------------

    @property
    def pop_matrix(self) -> tuple:
        return _pop_matrix(self)

    # -- products ------------------------------------------------------------

    def extension(self) -> "tuple[AxisBasis, tuple]":
        """A larger family member closed under products of two elements,
        together with the embedding of this basis' indices into it."""
        k = self.kind
        if k == "affine":
            return AxisBasis("monomial", d=2), (1, 2)
        if k in ("monomial", "binomial"):
            big = AxisBasis(k, d=2 * self.d)
            return big, tuple(i + self.d for i in range(self.dim))
        if k in ("stirling", "powers"):
            return AxisBasis(k, m=self.m * self.m), tuple(range(self.dim))
        big = AxisBasis(k, m=self.m * self.m, d=2 * self.d)
        return big, tuple(big._index(*self._pair(i)) for i in range(self.dim))

    def mul_expansion(self, i: int, j: int) -> dict:
        return _mul_expansion(self, i, j)

    def __str__(self) -> str:
        if self.kind == "affine":
            return "affine"
        if self.kind in ("monomial", "binomial"):
            return f"{self.kind}({self.d})"
        if self.kind in ("stirling", "powers"):
            return f"{self.kind}({self.m})"
        return f"{self.kind}({self.m},{self.d})"


@lru_cache(maxsize=None)
def _pop_matrix(ax: AxisBasis) -> tuple:
    """Rows ``P`` with ``(pop a)_r = sum_c P[r][c] * a_c``."""
    dim = ax.dim
    P = [[0] * dim for _ in range(dim)]
    k = ax.kind
    if k == "affine":
        P = [[1, 0], [1, 1]]
    elif k == "monomial":
        # (n+1)^j = sum_t C(j,t) n^t
        for j in range(ax.d + 1):
            for t in range(j + 1):
                P[ax.d - t][ax.d - j] = binomial(j, t)
    elif k == "binomial":
        # Pascal: C(n+1,t) = C(n,t) + C(n,t-1)
        for t in range(ax.d + 1):
            P[ax.d - t][ax.d - t] = 1
            if t + 1 <= ax.d:
                P[ax.d - t][ax.d - t - 1] = 1
    elif k == "stirling":
        # S(n+2,b) = b S(n+1,b) + S(n+1,b-1)
        for b in range(1, ax.m + 1):
            P[b - 1][b - 1] = b
            if b + 1 <= ax.m:
                P[b - 1][b] = 1
    elif k == "powers":
        for j in range(ax.m):
            P[j][j] = j + 1
    elif k == "stirling_binomial":
        for b in range(1, ax.m + 1):
            for l in range(ax.d + 1):
                row = P[ax._index(b, l)]
                row[ax._index(b, l)] += b
                if l + 1 <= ax.d:
                    row[ax._index(b, l + 1)] += b
                if b + 1 <= ax.m:
                    row[ax._index(b + 1, l)] += 1
                    if l + 1 <= ax.d:
                        row[ax._index(b + 1, l + 1)] += 1
    else:  # powers_monomial: j^(n+1) (n+1)^l = j * j^n * sum_t C(l,t) n^t
        for j in range(1, ax.m + 1):
            for l in range(ax.d + 1):
                for t in range(l + 1):
                    P[ax._index(j, t)][ax._index(j, l)] += j * binomial(l, t)
    return tuple(tuple(r) for r in P)


def _interpolate(ax: AxisBasis, fn) -> list:
    """Coefficients of the function ``fn`` in ``ax``, fitted on n = 0..dim-1."""
    pts = range(ax.dim)
    coeffs = _linalg.solve([ax.values(n) for n in pts], [fn(n) for n in pts])
    if coeffs is None:
        raise IncompatibleBases(f"sample matrix of {ax} is singular")
    return coeffs


@lru_cache(maxsize=None)
def _mul_expansion(ax: AxisBasis, i: int, j: int) -> tuple:
    """Upper expansion of ``e_i * e_j`` inside ``ax`` as (index, coeff) pairs.

    Exact where the product lies in the span; components outside it are
    replaced by an infinite coefficient on ``widest_within`` of their
    support, and negative components are dropped (both give upper bounds
    since every element is nonnegative).
    """
    big, emb = ax.extension()
    coeffs = _interpolate(big, lambda n: ax.value(i, n) * ax.value(j, n))
    back = {b: s for s, b in enumerate(emb)}
    out: dict = {}
    for idx, c in enumerate(coeffs):
        if c <= 0:
            continue
        if idx in back:
            tgt, val = back[idx], c
        else:
            tgt, val = ax.widest_within(big.support(idx)), INF
        out[tgt] = xadd(out.get(tgt, Fraction(0)), val)
    return tuple(sorted(out.items()))


# ---------------------------------------------------------------------------
# tensor bases
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TensorBasis:
    """Product basis; a univariate basis is the one-axis case."""

    axes: tuple

    def __post_init__(self):
        if not self.axes:
            raise ValueError("a basis needs at least one axis")
        if self.dim > MAX_TENSOR_DIM:
            raise ValueError(
                f"tensor basis dimension {self.dim} exceeds the dense limit {MAX_TENSOR_DIM}"
            )

    @property
    def arity(self) -> int:
        return len(self.axes)

    @property
    def shape(self) -> tuple:
        return tuple(a.dim for a in self.axes)

    @property
    def dim(self) -> int:
        return reduce(lambda x, y: x * y, self.shape, 1)

    @property
    def is_univariate(self) -> bool:
        return len(self.axes) == 1

    def flat(self, multi: Sequence[int]) -> int:
        idx = 0
        for k, size in zip(multi, self.shape):
            idx = idx * size + k
        return idx

    def multi(self, idx: int) -> tuple:
        out = []
        for size in reversed(self.shape):
            out.append(idx % size)
            idx //= size
        return tuple(reversed(out))

    def indices(self):
        return product(*(range(s) for s in self.shape))

    @property
    def const_index(self) -> int:
        return self.flat([a.const_index for a in self.axes])

    def var_index(self, axis: int = 0) -> Optional[int]:
        ax = self.axes[axis]
        if ax.var_index is None:
            return None
        multi = [a.const_index for a in self.axes]
        multi[axis] = ax.var_index
        return self.flat(multi)

    def support(self, idx: int) -> tuple:
        return tuple(a.support(k) for a, k in zip(self.axes, self.multi(idx)))

    def element_value(self, idx: int, point: Sequence[int]) -> int:
        value = 1
        for a, k, x in zip(self.axes, self.multi(idx), point):
            value *= a.value(k, x)
        return value

    def evaluate(self, coeffs: Sequence, point) -> object:
        point = _as_point(point, self.arity)
        if coeffs[self.const_index] == INF:
            return INF
        per_axis = [a.values(x) for a, x in zip(self.axes, point)]
        total = Fraction(0)
        for idx, multi in enumerate(self.indices()):
            c = coeffs[idx]
            if c == 0:
                continue
            w = 1
            for vals, k in zip(per_axis, multi):
                w *= vals[k]
            total = xadd(total, xmul(c, w))
        return total

    def label(self, idx: int, names: Optional[Sequence[str]] = None) -> str:
        names = names or default_var_names(self.arity)
        multi = self.multi(idx)
        if self.is_univariate:
            return self.axes[0].label(multi[0], names[0])
        parts = [
            a.label(k, v)
            for a, k, v in zip(self.axes, multi, names)
            if k != a.const_index
        ]
        return "*".join(parts) if parts else "1"

    def __str__(self) -> str:
        return "*".join(str(a) for a in self.axes)


def default_var_names(arity: int) -> list:
    return ["n"] if arity == 1 else [f"x{i}" for i in range(arity)]


def _as_point(point, arity: int) -> tuple:
    if isinstance(point, int):
        point = (point,)
    point = tuple(point)
    if len(point) != arity:
        raise ValueError(f"expected a point with {arity} coordinates, got {point}")
    if any(x < 0 for x in point):
        raise ValueError(f"point {point} is outside the naturals")
    return point


def tensor(*axes: AxisBasis) -> TensorBasis:
    return TensorBasis(tuple(axes))


def affine_basis() -> TensorBasis:
    return tensor(AxisBasis("affine"))


def monomial_basis(d: int) -> TensorBasis:
    return tensor(AxisBasis("monomial", d=d))


def binomial_basis(d: int) -> TensorBasis:
    return tensor(AxisBasis("binomial", d=d))


def stirling_basis(m: int) -> TensorBasis:
    return tensor(AxisBasis("stirling", m=m))


def exppoly_basis(m: int, d: int) -> TensorBasis:
    return tensor(AxisBasis("stirling_binomial", m=m, d=d))


def powers_basis(m: int) -> TensorBasis:
    return tensor(AxisBasis("powers", m=m))


def eval_basis(b: TensorBasis, coeffs, point):
    """Value of the boundary function ``coeffs`` at ``point`` (0 * inf = 0)."""
    if isinstance(coeffs, CoeffVec):
        if coeffs.basis != b:
            raise IncompatibleBases(f"{coeffs.basis} vs {b}")
        coeffs = coeffs.coeffs
    if len(coeffs) != b.dim:
        raise ValueError(f"basis {b} has dimension {b.dim}, got {len(coeffs)} coefficients")
    return b.evaluate(coeffs, point)


# ---------------------------------------------------------------------------
# change of basis
# ---------------------------------------------------------------------------

_SAME_SPACE = {
    frozenset({"affine", "monomial", "binomial"}),
    frozenset({"stirling", "powers"}),
    frozenset({"stirling_binomial", "powers_monomial"}),
}


def _span_size(ax: AxisBasis) -> tuple:
    if ax.kind == "affine":
        return ("poly", 1)
    if ax.kind in ("monomial", "binomial"):
        return ("poly", ax.d)
    if ax.kind in ("stirling", "powers"):
        return ("exp", ax.m)
    return ("exppoly", ax.m, ax.d)


@lru_cache(maxsize=None)
def _conversion_matrix(src: AxisBasis, dst: AxisBasis) -> tuple:
    if _span_size(src) != _span_size(dst) or not any(
        {src.kind, dst.kind} <= group for group in _SAME_SPACE
    ):
        raise IncompatibleBases(f"{src} and {dst} do not span the same space")
    columns = [_interpolate(dst, lambda n, i=i: src.value(i, n)) for i in range(src.dim)]
    # column i holds the dst-coordinates of src element i
    return tuple(tuple(columns[i][r] for i in range(src.dim)) for r in range(dst.dim))


def convert_basis(src: TensorBasis, dst: TensorBasis, coeffs: Sequence) -> tuple:
    """Exact change of basis; the result may contain negative rationals.

    Use :func:`to_coeffvec` to turn the result into a parameter vector,
    which refuses negative coordinates.
    """
    if isinstance(coeffs, CoeffVec):
        coeffs = coeffs.coeffs
    if src.arity != dst.arity:
        raise IncompatibleBases(f"{src} and {dst} have different arity")
    if any(c == INF for c in coeffs):
        raise ValueError("cannot change basis of a vector with infinite coefficients")
    values = {multi: Fraction(c) for multi, c in zip(src.indices(), coeffs)}
    for axis, (sa, da) in enumerate(zip(src.axes, dst.axes)):
        M = _conversion_matrix(sa, da) if sa != da else None
        if M is None:
            continue
        out: dict = {}
        for multi, c in values.items():
            if c == 0:
                continue
            for r in range(da.dim):
                w = M[r][multi[axis]]
                if w:
                    key = multi[:axis] + (r,) + multi[axis + 1 :]
                    out[key] = out.get(key, Fraction(0)) + w * c
        values = out
    return tuple(values.get(multi, Fraction(0)) for multi in dst.indices())


def to_coeffvec(basis: TensorBasis, coeffs: Sequence) -> CoeffVec:
    if any(c != INF and c < 0 for c in coeffs):
        raise NegativeCoefficients(tuple(coeffs))
    return CoeffVec.make(basis, coeffs)


def expanded_basis(b: TensorBasis) -> TensorBasis:
    """The power/monomial basis used for human-readable expanded forms."""
    axes = []
    for a in b.axes:
        if a.kind in ("affine", "binomial", "monomial"):
            axes.append(AxisBasis("monomial", d=1 if a.kind == "affine" else a.d))
        elif a.kind in ("stirling", "powers"):
            axes.append(AxisBasis("powers", m=a.m))
        else:
            axes.append(AxisBasis("powers_monomial", m=a.m, d=a.d))
    return TensorBasis(tuple(axes))


def shift_coeffs(basis: TensorBasis, coeffs: Sequence, axis: int = 0) -> tuple:
    """Coefficients of ``x |-> f(x + e_axis)``; exact, including infinities.

    The shift matrices have nonnegative entries and each element's shift
    has the same support pattern as its expansion, so applying them with
    the ``0 * inf = 0`` convention reproduces the shifted function exactly.
    """
    if not 0 <= axis < basis.arity:
        raise ValueError(f"axis {axis} out of range for arity {basis.arity}")
    P = basis.axes[axis].pop_matrix
    out = [Fraction(0)] * basis.dim
    for idx, multi in enumerate(basis.indices()):
        c = coeffs[idx]
        if c == 0:
            continue
        for r in range(len(P)):
            w = P[r][multi[axis]]
            if w:
                tgt = basis.flat(multi[:axis] + (r,) + multi[axis + 1 :])
                out[tgt] = xadd(out[tgt], xmul(w, c))
    return tuple(out)
