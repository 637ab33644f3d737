"""The Seq operator language: syntax, concrete semantics and a Kleene oracle.

An equation ``f = Phi(f)`` is written as a single expression in which ``f``
marks the unknown.  The constructs are::

    cst(c)   n   x<i>   f   e+e   e-e   e*e
    pop(e)   pop<i>(e)            # n |-> e(n + 1) along axis i
    push c (e)   push<i> c (e)    # n |-> c if n_i = 0 else e(n - 1)
    comp(e, e)                    # n |-> outer(floor(inner(n)))

Subtraction is truncated at zero so every value stays in the extended
nonnegative reals.  An equation file looks like::

    # nested call
    arity 1;
    eq: push 0 (comp(f, f) + cst(1));
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Optional, Union

import numpy as np

from .core_order import INF, format_xreal, monus, xadd, xmul, xreal


class ParseError(ValueError):
    def __init__(self, message: str, pos: int = -1):
        where = f" at position {pos}" if pos >= 0 else ""
        super().__init__(f"{message}{where}")
        self.pos = pos


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Cst:
    c: object  # Fraction or INF


@dataclass(frozen=True)
class Var:
    i: int = 0


@dataclass(frozen=True)
class F:
    pass


@dataclass(frozen=True)
class BinOp:
    op: str  # one of "+", "-", "*"
    left: "SeqExpr"
    right: "SeqExpr"


@dataclass(frozen=True)
class Pop:
    axis: int
    body: "SeqExpr"


@dataclass(frozen=True)
class Push:
    axis: int
    c: object
    body: "SeqExpr"


@dataclass(frozen=True)
class Comp:
    outer: "SeqExpr"
    inner: "SeqExpr"


SeqExpr = Union[Cst, Var, F, BinOp, Pop, Push, Comp]


def children(e: SeqExpr) -> tuple:
    if isinstance(e, BinOp):
        return (e.left, e.right)
    if isinstance(e, (Pop, Push)):
        return (e.body,)
    if isinstance(e, Comp):
        return (e.outer, e.inner)
    return ()


def subterms(e: SeqExpr):
    yield e
    for c in children(e):
        yield from subterms(c)


def mentions_f(e: SeqExpr) -> bool:
    return any(isinstance(s, F) for s in subterms(e))


def max_axis(e: SeqExpr) -> int:
    """Largest axis or variable index used, or -1 if none."""
    best = -1
    for s in subterms(e):
        if isinstance(s, (Pop, Push)):
            best = max(best, s.axis)
        elif isinstance(s, Var):
            best = max(best, s.i)
    return best


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?(?:/\d+)?)|(?P<id>[A-Za-z_]+\d*)|(?P<sym>[-+*(),]))"
)


def _tokenize(text: str):
    pos = 0
    toks = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        toks.append((kind, m.group(kind), m.start(kind)))
        pos = m.end()
    toks.append(("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, arity: int):
        self.toks = _tokenize(text)
        self.k = 0
        self.arity = arity

    def peek(self):
        return self.toks[self.k]

    def take(self, value=None, kind=None):
        tok = self.toks[self.k]
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            want = value if value is not None else kind
            got = tok[1] or "end of input"
            raise ParseError(f"expected {want!r}, found {got!r}", tok[2])
        self.k += 1
        return tok

    def parse(self) -> SeqExpr:
        e = self.expr()
        if self.peek()[0] != "eof":
            tok = self.peek()
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])
        return e

    def expr(self) -> SeqExpr:
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> SeqExpr:
        e = self.factor()
        while self.peek()[1] == "*":
            self.take()
            e = BinOp("*", e, self.factor())
        return e

    def number(self):
        tok = self.peek()
        if tok[0] == "num":
            self.take()
            return xreal(tok[1])
        if tok[0] == "id" and tok[1] == "inf":
            self.take()
            return INF
        raise ParseError(f"expected a number, found {tok[1] or 'end of input'!r}", tok[2])

    def axis_of(self, word: str, stem: str, pos: int) -> int:
        suffix = word[len(stem):]
        axis = int(suffix) if suffix else 0
        if axis >= self.arity:
            raise ParseError(f"axis {axis} out of range for arity {self.arity}", pos)
        return axis

    def factor(self) -> SeqExpr:
        kind, word, pos = self.peek()
        if word == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        if kind == "num":
            return Cst(self.number())
        if kind != "id":
            raise ParseError(f"unexpected {word or 'end of input'!r}", pos)
        self.take()
        if word == "cst":
            self.take("(")
            c = self.number()
            self.take(")")
            return Cst(c)
        if word == "inf":
            return Cst(INF)
        if word == "n":
            return Var(0)
        if word == "f":
            return F()
        if re.fullmatch(r"x\d+", word):
            return Var(self.axis_of(word, "x", pos))
        if re.fullmatch(r"pop\d*", word):
            axis = self.axis_of(word, "pop", pos)
            self.take("(")
            body = self.expr()
            self.take(")")
            return Pop(axis, body)
        if re.fullmatch(r"push\d*", word):
            axis = self.axis_of(word, "push", pos)
            c = self.number()
            if c == INF:
                raise ParseError("push base value must be finite", pos)
            self.take("(")
            body = self.expr()
            self.take(")")
            return Push(axis, c, body)
        if word == "comp":
            if self.arity != 1:
                raise ParseError("comp is only available for univariate equations", pos)
            self.take("(")
            outer = self.expr()
            self.take(",")
            inner = self.expr()
            self.take(")")
            return Comp(outer, inner)
        raise ParseError(f"unknown identifier {word!r}", pos)


def parse_seq(text: str, arity: int = 1) -> SeqExpr:
    if arity < 1:
        raise ValueError("arity must be at least 1")
    return _Parser(text, arity).parse()


_PREC = {"+": 1, "-": 1, "*": 2}


def to_text(e: SeqExpr) -> str:
    """Canonical concrete syntax; ``parse_seq(to_text(e)) == e``."""

    def go(e, ctx: int, right: bool) -> str:
        if isinstance(e, Cst):
            return f"cst({format_xreal(e.c)})"
        if isinstance(e, Var):
            return "n" if e.i == 0 else f"x{e.i}"
        if isinstance(e, F):
            return "f"
        if isinstance(e, Pop):
            return f"pop{e.axis or ''}({go(e.body, 0, False)})"
        if isinstance(e, Push):
            return f"push{e.axis or ''} {format_xreal(e.c)} ({go(e.body, 0, False)})"
        if isinstance(e, Comp):
            return f"comp({go(e.outer, 0, False)}, {go(e.inner, 0, False)})"
        p = _PREC[e.op]
        s = f"{go(e.left, p, False)} {e.op} {go(e.right, p, True)}"
        # left associativity: a right operand at the same level needs parens
        if p < ctx or (right and p == ctx):
            s = f"({s})"
        return s

    return go(e, 0, False)


@dataclass(frozen=True)
class Equation:
    arity: int
    expr: SeqExpr
    name: str = ""
    domain: Optional[str] = None  # suggested abstract domain, e.g. "poly:2"


def parse_equation(text: str, name: str = "") -> Equation:
    """Parse the ``arity <d>; eq: <expr>;`` file format."""
    body = "\n".join(line.split("#", 1)[0] for line in text.splitlines())
    arity = 1
    expr_text = None
    domain = None
    for stmt in body.split(";"):
        stmt = stmt.strip()
        if not stmt:
            continue
        if stmt.startswith("arity"):
            try:
                arity = int(stmt[len("arity"):].strip())
            except ValueError:
                raise ParseError(f"bad arity declaration {stmt!r}") from None
        elif stmt.startswith("eq:"):
            expr_text = stmt[3:]
        elif stmt.startswith("name:"):
            name = stmt[5:].strip()
        elif stmt.startswith("domain:"):
            domain = stmt[7:].strip()
        else:
            raise ParseError(f"unrecognised statement {stmt!r}")
    if expr_text is None:
        raise ParseError("missing 'eq:' statement")
    return Equation(arity, parse_seq(expr_text, arity), name, domain)


def load_equation(path) -> Equation:
    from pathlib import Path

    p = Path(path)
    return parse_equation(p.read_text(encoding="utf-8"), name=p.stem)


# ---------------------------------------------------------------------------
# concrete semantics
# ---------------------------------------------------------------------------


class _Undefined:
    _inst = None

    def __new__(cls):
        if cls._inst is None:
            cls._inst = super().__new__(cls)
        return cls._inst

    def __repr__(self):
        return "Undefined"


UNDEF = _Undefined()


class OutOfBox(enum.Enum):
    BOTTOM = "bottom"
    UNDEFINED = "undefined"


@dataclass
class PrefixTable:
    """Values of a function on the box ``[0..N]^d``."""

    arity: int
    N: int
    values: np.ndarray
    stable: bool = True

    @classmethod
    def filled(cls, arity: int, N: int, value=Fraction(0)) -> "PrefixTable":
        vals = np.empty((N + 1,) * arity, dtype=object)
        vals.fill(value)
        return cls(arity, N, vals)

    @classmethod
    def tabulate(cls, arity: int, N: int, fn: Callable) -> "PrefixTable":
        t = cls.filled(arity, N)
        for p in t.points():
            t.values[p] = fn(p if arity > 1 else p[0])
        return t

    @classmethod
    def from_list(cls, values) -> "PrefixTable":
        vals = np.empty(len(values), dtype=object)
        for i, v in enumerate(values):
            vals[i] = v
        return cls(1, len(values) - 1, vals)

    def points(self):
        return product(range(self.N + 1), repeat=self.arity)

    def in_box(self, p) -> bool:
        return all(0 <= x <= self.N for x in p)

    def __getitem__(self, p):
        if isinstance(p, int):
            p = (p,)
        return self.values[tuple(p)]

    def tolist(self) -> list:
        return self.values.tolist()

    def copy(self) -> "PrefixTable":
        return PrefixTable(self.arity, self.N, self.values.copy(), self.stable)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PrefixTable):
            return NotImplemented
        return (
            self.arity == other.arity
            and self.N == other.N
            and all(self.values[p] == other.values[p] for p in self.points())
        )


def _shift(p: tuple, axis: int, delta: int) -> tuple:
    return p[:axis] + (p[axis] + delta,) + p[axis + 1 :]


def eval_at(e: SeqExpr, f: Callable, point, undefined_on_inf: bool = False):
    """Value of ``e`` (with ``f`` read through the callable) at ``point``.

    ``f`` receives a tuple and returns an extended real or ``UNDEF``.
    Points outside the naturals read as 0, the bottom value.
    """
    if isinstance(point, int):
        point = (point,)

    def go(e, p):
        if isinstance(e, Cst):
            return e.c
        if isinstance(e, Var):
            return Fraction(p[e.i])
        if isinstance(e, F):
            return f(p) if all(x >= 0 for x in p) else Fraction(0)
        if isinstance(e, BinOp):
            l = go(e.left, p)
            r = go(e.right, p)
            if l is UNDEF or r is UNDEF:
                return UNDEF
            if e.op == "+":
                return xadd(l, r)
            if e.op == "*":
                return xmul(l, r)
            return monus(l, r)
        if isinstance(e, Pop):
            return go(e.body, _shift(p, e.axis, 1))
        if isinstance(e, Push):
            return e.c if p[e.axis] == 0 else go(e.body, _shift(p, e.axis, -1))
        if isinstance(e, Comp):
            v = go(e.inner, p)
            if v is UNDEF:
                return UNDEF
            if v == INF:
                return UNDEF if undefined_on_inf else INF
            return go(e.outer, (math.floor(v),))
        raise TypeError(f"not a Seq expression: {e!r}")

    return go(e, tuple(point))


def _reader(table: PrefixTable, policy: OutOfBox):
    outside = Fraction(0) if policy is OutOfBox.BOTTOM else UNDEF

    def read(p):
        return table.values[p] if table.in_box(p) else outside

    return read


def apply_operator(e: SeqExpr, f: PrefixTable, policy: OutOfBox = OutOfBox.BOTTOM) -> PrefixTable:
    """One application of the operator to a tabulated function."""
    out = PrefixTable.filled(f.arity, f.N)
    read = _reader(f, policy)
    undefined_on_inf = policy is OutOfBox.UNDEFINED
    for p in f.points():
        out.values[p] = eval_at(e, read, p, undefined_on_inf)
    return out


def concrete_lfp_prefix(
    e: SeqExpr, N: int, max_iters: int = 1000, arity: int = 1
) -> PrefixTable:
    """Kleene iteration from the zero table on ``[0..N]^arity``.

    Sweeps update cells in place (chaotic iteration), which converges to
    the same limit as plain iteration but needs a single sweep whenever
    recursion only reads lexicographically smaller points.  Out-of-box
    reads are 0, so the result is a pointwise lower approximation of the
    least solution.  ``stable`` is False if ``max_iters`` sweeps did not
    reach a fixpoint on the box.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    table = PrefixTable.filled(arity, N)
    read = _reader(table, OutOfBox.BOTTOM)
    pts = list(table.points())
    for _ in range(max_iters):
        changed = False
        for p in pts:
            v = eval_at(e, read, p)
            if v != table.values[p]:
                table.values[p] = v
                changed = True
        if not changed:
            table.stable = True
            return table
    table.stable = False
    return table


def check_totality(e: SeqExpr, N: int, arity: int = 1) -> bool:
    """Boolean Kleene iteration: is every cell of the box eventually defined?

    Reads outside the box count as undefined, so a ``True`` answer means
    the recursion is well-founded within the box.
    """
    values = concrete_lfp_prefix(e, N, arity=arity)
    defined = np.zeros((N + 1,) * arity, dtype=bool)

    def in_box(p):
        return all(0 <= x <= N for x in p)

    def d(e, p) -> bool:
        if isinstance(e, (Cst, Var)):
            return True
        if isinstance(e, F):
            return in_box(p) and bool(defined[p])
        if isinstance(e, BinOp):
            return d(e.left, p) and d(e.right, p)
        if isinstance(e, Pop):
            return d(e.body, _shift(p, e.axis, 1))
        if isinstance(e, Push):
            return p[e.axis] == 0 or d(e.body, _shift(p, e.axis, -1))
        if isinstance(e, Comp):
            if not d(e.inner, p):
                return False
            v = eval_at(e.inner, _reader(values, OutOfBox.BOTTOM), p)
            if v == INF:
                return False
            return d(e.outer, (math.floor(v),))
        raise TypeError(f"not a Seq expression: {e!r}")

    pts = list(values.points())
    changed = True
    while changed:
        changed = False
        for p in pts:
            if not defined[p] and d(e, p):
                defined[p] = True
                changed = True
    return bool(defined.all())
