"""Domain abstraction along a finite-fiber map, and monotone bound splitting.

For a map ``m: N^d -> N`` with positive integer coefficients, precomposition
``g |-> g . m`` has a left adjoint sending ``f`` to ``a |-> sup f(m^-1(a))``.
Abstracting an operator ``Phi`` as ``alpha . Phi . gamma`` then gives a
one-variable equation whose solutions, composed with ``m``, bound the
original one.  Everything here works on finite tables: the operator
abstraction is not symbolic.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .core_order import INF
from .piecewise import PWEquation, apply_pw
from .seq_lang import UNDEF, BinOp, Comp, PrefixTable, SeqExpr, eval_at, mentions_f, subterms, to_text


@dataclass(frozen=True)
class FiniteFiberMap:
    """``m(x) = sum coeffs[j] * x[j]`` with every coefficient a positive integer."""

    coeffs: tuple
    names: tuple = ()

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("a fiber map needs at least one coefficient")
        for c in self.coeffs:
            if int(c) != c or c < 1:
                raise ValueError(f"fiber map coefficients must be integers >= 1, got {c}")
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))

    @property
    def arity(self) -> int:
        return len(self.coeffs)

    def __call__(self, point) -> int:
        return sum(c * x for c, x in zip(self.coeffs, point))

    def fiber(self, a: int):
        """All ``x`` in ``N^d`` with ``m(x) = a`` (a finite set)."""

        def go(j, rest):
            if j == self.arity - 1:
                c = self.coeffs[j]
                if rest % c == 0:
                    yield (rest // c,)
                return
            for x in range(rest // self.coeffs[j] + 1):
                for tail in go(j + 1, rest - self.coeffs[j] * x):
                    yield (x,) + tail

        if a < 0:
            return
        yield from go(0, a)

    def __str__(self) -> str:
        names = self.names or tuple(f"x{j}" for j in range(self.arity))
        return "+".join(n if c == 1 else f"{c}*{n}" for c, n in zip(self.coeffs, names))


def parse_map(text: str, names: Sequence[str]) -> FiniteFiberMap:
    """Read ``x+y`` or ``2*x + y`` over the given variable names."""
    coeffs = [0] * len(names)
    for term in re.split(r"\s*\+\s*", text.strip()):
        m = re.fullmatch(r"(?:(\d+)\s*\*\s*)?([A-Za-z_][A-Za-z_0-9]*)", term)
        if not m or m.group(2) not in names:
            raise ValueError(f"cannot read map term {term!r} over variables {', '.join(names)}")
        coeffs[list(names).index(m.group(2))] += int(m.group(1) or 1)
    return FiniteFiberMap(tuple(coeffs), tuple(names))


def _in_box(p, N: int) -> bool:
    return all(0 <= x <= N for x in p)


def domain_abstract_table(m: FiniteFiberMap, f: PrefixTable) -> PrefixTable:
    """``a |-> max f(x)`` over ``m(x) = a``, for ``a`` up to ``m(N, ..., N)``.

    Indices whose fiber leaves the box of ``f`` are ``UNDEF``; an empty
    fiber gives 0.
    """
    if f.arity != m.arity:
        raise ValueError(f"table arity {f.arity} does not match map arity {m.arity}")
    top = m((f.N,) * f.arity)
    out = []
    for a in range(top + 1):
        best = Fraction(0)
        for x in m.fiber(a):
            if not _in_box(x, f.N):
                best = UNDEF
                break
            v = f.values[x]
            if v is UNDEF:
                best = UNDEF
                break
            best = max(best, v)
        out.append(best)
    return PrefixTable.from_list(out)


def concretize(m: FiniteFiberMap, fs: PrefixTable, N: int) -> PrefixTable:
    """``x |-> fs(m(x))`` on ``[0..N]^d``; indices beyond ``fs`` read as inf."""

    def at(p):
        a = m(p)
        return fs.values[a] if a <= fs.N else INF

    return PrefixTable.tabulate(m.arity, N, lambda p: at(p if isinstance(p, tuple) else (p,)))


Operator = Union[PWEquation, SeqExpr]


def _apply(phi: Operator, g, point):
    if isinstance(phi, PWEquation):
        return apply_pw(phi, g, point)
    return eval_at(phi, g, point)


def domain_abstract_operator_step(m: FiniteFiberMap, phi: Operator, fs: PrefixTable) -> PrefixTable:
    """One step of the best abstraction ``alpha . Phi . gamma`` on the table.

    The output covers the same indices as ``fs``.  Reads of ``gamma fs``
    past the table are inf, which keeps the result an upper bound.
    """

    def g(p):
        a = m(p)
        if a > fs.N:
            return INF
        return fs.values[a]

    out = []
    for a in range(fs.N + 1):
        best = Fraction(0)
        for x in m.fiber(a):
            v = _apply(phi, g, x)
            if v is UNDEF:
                best = UNDEF
                break
            best = max(best, v)
        out.append(best)
    return PrefixTable.from_list(out)


@dataclass
class Reduction:
    map: FiniteFiberMap
    table: PrefixTable
    iterations: int
    postfix: bool

    def concretize(self, N: int) -> PrefixTable:
        return concretize(self.map, self.table, N)


def reduce_lfp(m: FiniteFiberMap, phi: Operator, N: int = 30, max_iters: int = 1000) -> Reduction:
    """Kleene iteration of the abstracted operator on indices ``0..N``."""
    fs = PrefixTable.filled(1, N)
    for it in range(1, max_iters + 1):
        nxt = domain_abstract_operator_step(m, phi, fs)
        if nxt == fs:
            return Reduction(m, fs, it, is_postfix(m, phi, fs))
        fs = nxt
    fs.stable = False
    return Reduction(m, fs, max_iters, is_postfix(m, phi, fs))


def is_postfix(m: FiniteFiberMap, phi: Operator, fs: PrefixTable) -> bool:
    step = domain_abstract_operator_step(m, phi, fs)
    return all(
        s is not UNDEF and v is not UNDEF and s <= v for s, v in zip(step.tolist(), fs.tolist())
    )


def merge_abstract_step(fs: PrefixTable) -> PrefixTable:
    """Closed form of the abstracted merge operator under ``m = x + y``."""
    out = []
    for n in range(fs.N + 1):
        if n == 0:
            out.append(Fraction(0))
        elif n == 1:
            out.append(Fraction(1))
        else:
            out.append(max(Fraction(n), 1 + fs.values[n - 1]))
    return PrefixTable.from_list(out)


# ---------------------------------------------------------------------------
# monotone splitting
# ---------------------------------------------------------------------------


class NotSeparable(ValueError):
    def __init__(self, subterm):
        super().__init__(f"not monotone in f: {to_text(subterm)}")
        self.subterm = subterm


@dataclass(frozen=True)
class MonotoneSplit:
    """Evidence that ``expr`` is monotone in ``f``.

    For such an operator the interval equation decouples: the lower and
    upper components each satisfy ``expr`` on their own, so an upper bound
    analysis of ``expr`` bounds the upper component.
    """

    expr: SeqExpr

    @property
    def lb_mode(self) -> SeqExpr:
        return self.expr

    @property
    def ub_mode(self) -> SeqExpr:
        return self.expr


def split_monotone_bounds(e: SeqExpr) -> tuple:
    for s in subterms(e):
        if isinstance(s, Comp):
            raise NotSeparable(s)
        if isinstance(s, BinOp) and s.op == "-" and mentions_f(s.right):
            raise NotSeparable(s)
    split = MonotoneSplit(e)
    return split.lb_mode, split.ub_mode

