"""Piecewise affine bounds over guard-defined partitions.

A piecewise equation assigns a body to each region of ``N^d`` cut out by a
conjunction of affine constraints, for instance::

    vars i n b;
    case i = 0:                   0;
    case i > 0 && i >= n:         0;
    case 0 < i < n && b >= 1:     1 + f(i+1, n, b);
    case 0 < i < n && b = 0:      1 + f(i-1, n, b);

The abstract value maps each piece to a set of affine forms (negative
coefficients allowed) that bound the function on that piece only.  One
abstract step splits every piece by where its recursive calls land
("interfaces"), evaluates the body on each sub-region with the target's
bounds pulled back through the call arguments, and merges the sub-results
into bounds valid on the whole piece.  All region-relative comparisons are
decided with Fourier-Motzkin elimination.

The merge step is a heuristic: it proposes candidates (sub-result bounds,
coefficient-wise maxima, and interpolants that agree with a boundary
sub-result) and keeps the ones it can prove, preferring interpolants.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence

from . import fm
from .engine import Status, WideningCfg, WideningHistory, stability_widen
from .seq_lang import ParseError, PrefixTable

INF = math.inf
GRID = 12
MAX_VARS = 4


# ---------------------------------------------------------------------------
# affine forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AffineForm:
    """``sum coeffs[j] * x_j + const``; ``const = inf`` is the top bound."""

    coeffs: tuple
    const: object

    @classmethod
    def constant(cls, nvars: int, c) -> "AffineForm":
        c = INF if c == INF else Fraction(c)
        return cls((Fraction(0),) * nvars, c)

    @classmethod
    def var(cls, nvars: int, j: int) -> "AffineForm":
        return cls(tuple(Fraction(int(k == j)) for k in range(nvars)), Fraction(0))

    @classmethod
    def top(cls, nvars: int) -> "AffineForm":
        return cls((Fraction(0),) * nvars, INF)

    @classmethod
    def of(cls, coeffs: Sequence, const) -> "AffineForm":
        if const == INF or any(c == INF for c in coeffs):
            return cls.top(len(coeffs))
        return cls(tuple(Fraction(c) for c in coeffs), Fraction(const))

    @property
    def nvars(self) -> int:
        return len(self.coeffs)

    @property
    def is_top(self) -> bool:
        return self.const == INF

    @property
    def is_constant(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def coords(self) -> tuple:
        if self.is_top:
            return (INF,) * (self.nvars + 1)
        return self.coeffs + (self.const,)

    @classmethod
    def from_coords(cls, v: Sequence) -> "AffineForm":
        return cls.of(v[:-1], v[-1])

    def __add__(self, other: "AffineForm") -> "AffineForm":
        if self.is_top or other.is_top:
            return AffineForm.top(self.nvars)
        return AffineForm(
            tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.const + other.const
        )

    def __sub__(self, other: "AffineForm") -> "AffineForm":
        if other.is_top:
            raise ValueError("cannot subtract an unbounded form")
        if self.is_top:
            return self
        return AffineForm(
            tuple(a - b for a, b in zip(self.coeffs, other.coeffs)), self.const - other.const
        )

    def scale(self, q) -> "AffineForm":
        q = Fraction(q)
        if self.is_top:
            if q < 0:
                raise ValueError("cannot negate an unbounded form")
            return AffineForm.constant(self.nvars, 0) if q == 0 else self
        return AffineForm(tuple(q * c for c in self.coeffs), q * self.const)

    def compose(self, args: Sequence["AffineForm"]) -> "AffineForm":
        """The form ``x |-> self(args(x))``."""
        if self.is_top:
            return AffineForm.top(args[0].nvars)
        out = AffineForm.constant(args[0].nvars, self.const)
        for c, a in zip(self.coeffs, args):
            if c:
                out = out + a.scale(c)
        return out

    def __call__(self, point) -> object:
        if self.is_top:
            return INF
        return sum((c * x for c, x in zip(self.coeffs, point)), self.const)

    def coeff_max(self, other: "AffineForm") -> "AffineForm":
        return AffineForm.from_coords([max(a, b) for a, b in zip(self.coords(), other.coords())])

    def integral_row(self) -> tuple:
        """Scaled to integer coefficients by a positive factor."""
        den = 1
        for c in self.coeffs + (self.const,):
            den = den * c.denominator // math.gcd(den, c.denominator)
        return tuple(c * den for c in self.coeffs), self.const * den

    def format(self, names: Sequence[str]) -> str:
        if self.is_top:
            return "inf"
        parts = []
        for c, name in zip(self.coeffs, names):
            if c == 0:
                continue
            mag = abs(c)
            term = name if mag == 1 else f"{_fmt(mag)}*{name}"
            parts.append(("-" if c < 0 else "+", term))
        parts.sort(key=lambda p: p[0] == "-")
        if self.const != 0 or not parts:
            parts.append(("-" if self.const < 0 else "+", _fmt(abs(self.const))))
        head_sign, head = parts[0]
        text = ("-" if head_sign == "-" else "") + head
        for sign, term in parts[1:]:
            text += f" {sign} {term}"
        return text

    def sort_key(self):
        return tuple((1, 0) if c == INF else (0, c) for c in self.coords())


def _fmt(q) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


# ---------------------------------------------------------------------------
# guards
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    """``coeffs . x + const >= 0`` (or ``= 0`` when ``eq``), integer data."""

    coeffs: tuple
    const: int
    eq: bool = False

    @classmethod
    def from_form(cls, form: AffineForm, eq: bool = False) -> "Atom":
        coeffs, const = form.integral_row()
        return cls(tuple(int(c) for c in coeffs), int(const), eq)

    def form(self) -> AffineForm:
        return AffineForm(tuple(Fraction(c) for c in self.coeffs), Fraction(self.const))

    def holds(self, point) -> bool:
        v = sum(c * x for c, x in zip(self.coeffs, point)) + self.const
        return v == 0 if self.eq else v >= 0

    def rows(self) -> list:
        row = (tuple(Fraction(c) for c in self.coeffs), Fraction(self.const))
        if not self.eq:
            return [row]
        return [row, (tuple(-c for c in row[0]), -row[1])]

    def pullback(self, args: Sequence[AffineForm]) -> "Atom":
        return Atom.from_form(self.form().compose(args), self.eq)

    def format(self, names) -> str:
        return f"{self.form().format(names)} {'=' if self.eq else '>='} 0"


@dataclass(frozen=True)
class Guard:
    """Conjunction of atoms over ``nvars`` natural-number variables."""

    nvars: int
    atoms: tuple = ()

    def __post_init__(self):
        if self.nvars > MAX_VARS:
            raise ValueError(f"guards support at most {MAX_VARS} variables")

    def conj(self, *others) -> "Guard":
        atoms = list(self.atoms)
        for o in others:
            for a in (o.atoms if isinstance(o, Guard) else o):
                if a not in atoms:
                    atoms.append(a)
        return Guard(self.nvars, tuple(atoms))

    def contains(self, point) -> bool:
        return all(x >= 0 for x in point) and all(a.holds(point) for a in self.atoms)

    def rows(self) -> list:
        out = []
        for j in range(self.nvars):
            out.append((tuple(Fraction(int(k == j)) for k in range(self.nvars)), Fraction(0)))
        for a in self.atoms:
            out.extend(a.rows())
        return out

    def feasible(self) -> bool:
        return fm.feasible(self.rows(), self.nvars)

    def pullback(self, args: Sequence[AffineForm]) -> "Guard":
        return Guard(self.nvars, tuple(a.pullback(args) for a in self.atoms))

    def format(self, names) -> str:
        return " && ".join(a.format(names) for a in self.atoms) or "true"


@dataclass(frozen=True)
class DominanceResult:
    holds: bool
    witness: Optional[tuple] = None
    conclusive: bool = True


def _below_rows(u: AffineForm, vs: Sequence[AffineForm]) -> list:
    """Rows saying ``u < v`` for every ``v`` (integer-valued slack, so ``<= -1``)."""
    rows = []
    for v in vs:
        coeffs, const = (v - u).integral_row()
        rows.append((coeffs, const - 1))
    return rows


def dominance_check(
    g: Guard, u: AffineForm, vs, box: int = GRID, witness: bool = True
) -> DominanceResult:
    """Does ``u >= min(vs)`` hold at every integer point of ``g``?

    When elimination cannot rule out a counterexample, a grid search over
    ``[0..box]^d`` looks for an integer one (skipped if ``witness`` is off).
    """
    if isinstance(vs, AffineForm):
        vs = [vs]
    if u.is_top:
        return DominanceResult(True)
    finite = [v for v in vs if not v.is_top]
    if not finite:
        # u would have to be infinite wherever g is inhabited
        return DominanceResult(not g.feasible())
    rows = g.rows() + _below_rows(u, finite)
    if not fm.feasible(rows, g.nvars):
        return DominanceResult(True)
    if not witness:
        return DominanceResult(False, conclusive=False)
    point = fm.integer_point(rows, g.nvars, box)
    return DominanceResult(False, point, conclusive=point is not None)


def dominance_on(g: Guard, u: AffineForm, v: AffineForm) -> bool:
    """``u - v >= 0`` on all integer points of ``g``; inconclusive counts as no."""
    return dominance_check(g, u, [v], witness=False).holds


# ---------------------------------------------------------------------------
# equations
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BConst:
    q: object


@dataclass(frozen=True)
class BVar:
    j: int


@dataclass(frozen=True)
class BCall:
    args: tuple
    idx: int


@dataclass(frozen=True)
class BAdd:
    left: object
    right: object


@dataclass(frozen=True)
class BSub:
    left: object
    right: object


@dataclass(frozen=True)
class BScale:
    q: Fraction
    body: object


@dataclass(frozen=True)
class BMax:
    left: object
    right: object


def _has_call(b) -> bool:
    if isinstance(b, BCall):
        return True
    if isinstance(b, (BAdd, BSub, BMax)):
        return _has_call(b.left) or _has_call(b.right)
    if isinstance(b, BScale):
        return _has_call(b.body)
    return False


def calls_of(b) -> list:
    if isinstance(b, BCall):
        return [b]
    if isinstance(b, (BAdd, BSub, BMax)):
        return calls_of(b.left) + calls_of(b.right)
    if isinstance(b, BScale):
        return calls_of(b.body)
    return []


@dataclass(frozen=True)
class Piece:
    guard: Guard
    body: object
    text: str = ""

    @property
    def calls(self) -> list:
        return calls_of(self.body)


@dataclass(frozen=True)
class PWEquation:
    names: tuple
    pieces: tuple

    @property
    def arity(self) -> int:
        return len(self.names)

    def piece_of(self, point) -> Optional[int]:
        for k, p in enumerate(self.pieces):
            if p.guard.contains(point):
                return k
        return None


class PartitionError(ValueError):
    def __init__(self, message: str, witnesses):
        super().__init__(f"{message}: {list(witnesses)[:5]}")
        self.witnesses = list(witnesses)


_TOK = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<id>[A-Za-z_][A-Za-z_0-9]*)|(?P<sym>[-+*(),]))"
)


class _BodyParser:
    def __init__(self, text: str, names: Sequence[str]):
        self.text = text
        self.names = list(names)
        self.toks = []
        pos = 0
        while text[pos:].strip():
            m = _TOK.match(text, pos)
            if not m:
                raise ParseError(f"unexpected character {text[pos]!r}", pos)
            self.toks.append((m.lastgroup, m.group(m.lastgroup), m.start(m.lastgroup)))
            pos = m.end()
        self.toks.append(("eof", "", len(text)))
        self.k = 0
        self.ncalls = 0

    def peek(self):
        return self.toks[self.k]

    def take(self, value=None):
        tok = self.toks[self.k]
        if value is not None and tok[1] != value:
            raise ParseError(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok[2])
        self.k += 1
        return tok

    def done(self):
        if self.peek()[0] != "eof":
            tok = self.peek()
            raise ParseError(f"unexpected {tok[1]!r}", tok[2])

    def expr(self):
        e = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.take()[1]
            r = self.term()
            if op == "+":
                e = BAdd(e, r)
            else:
                if _has_call(r):
                    raise ParseError("recursive calls may not be subtracted", self.peek()[2])
                e = BSub(e, r)
        return e

    def term(self):
        e = self.factor()
        while self.peek()[1] == "*":
            pos = self.take()[2]
            r = self.factor()
            if isinstance(e, BConst):
                e, r = r, e
            if not isinstance(r, BConst):
                raise ParseError("products must have a constant factor", pos)
            if r.q < 0 and _has_call(e):
                raise ParseError("recursive calls may not be scaled negatively", pos)
            e = BScale(Fraction(r.q), e)
        return e

    def factor(self):
        kind, word, pos = self.peek()
        if word == "(":
            self.take()
            e = self.expr()
            self.take(")")
            return e
        if word == "-":
            self.take()
            e = self.factor()
            if _has_call(e):
                raise ParseError("recursive calls may not be negated", pos)
            return BConst(-e.q) if isinstance(e, BConst) else BScale(Fraction(-1), e)
        if kind == "num":
            self.take()
            return BConst(Fraction(word))
        if kind != "id":
            raise ParseError(f"unexpected {word or 'end of input'!r}", pos)
        self.take()
        if word == "cst":
            self.take("(")
            tok = self.take()
            if tok[0] != "num":
                raise ParseError("cst expects a number", tok[2])
            self.take(")")
            return BConst(Fraction(tok[1]))
        if word == "max":
            self.take("(")
            left = self.expr()
            self.take(",")
            right = self.expr()
            self.take(")")
            return BMax(left, right)
        if word == "f":
            self.take("(")
            args = [self.affine_arg()]
            while self.peek()[1] == ",":
                self.take()
                args.append(self.affine_arg())
            self.take(")")
            if len(args) != len(self.names):
                raise ParseError(f"call with {len(args)} arguments, expected {len(self.names)}", pos)
            call = BCall(tuple(args), self.ncalls)
            self.ncalls += 1
            return call
        if word in self.names:
            return BVar(self.names.index(word))
        raise ParseError(f"unknown identifier {word!r}", pos)

    def affine_arg(self) -> AffineForm:
        start = self.k
        e = self.expr()
        if _has_call(e) or _has_max(e):
            raise ParseError("call arguments must be affine", self.toks[start][2])
        form = _affine_of(e, len(self.names))
        if any(c.denominator != 1 for c in form.coeffs + (form.const,)):
            raise ParseError("call arguments must have integer coefficients", self.toks[start][2])
        return form


def _has_max(b) -> bool:
    if isinstance(b, BMax):
        return True
    if isinstance(b, (BAdd, BSub)):
        return _has_max(b.left) or _has_max(b.right)
    if isinstance(b, BScale):
        return _has_max(b.body)
    return False


def _affine_of(b, nvars: int) -> AffineForm:
    if isinstance(b, BConst):
        return AffineForm.constant(nvars, b.q)
    if isinstance(b, BVar):
        return AffineForm.var(nvars, b.j)
    if isinstance(b, BAdd):
        return _affine_of(b.left, nvars) + _affine_of(b.right, nvars)
    if isinstance(b, BSub):
        return _affine_of(b.left, nvars) - _affine_of(b.right, nvars)
    if isinstance(b, BScale):
        return _affine_of(b.body, nvars).scale(b.q)
    raise TypeError(f"not affine: {b!r}")


def parse_affine(text: str, names: Sequence[str]) -> AffineForm:
    p = _BodyParser(text, names)
    e = p.expr()
    p.done()
    if _has_call(e) or _has_max(e):
        raise ParseError(f"expected an affine expression, got {text!r}")
    return _affine_of(e, len(names))


_REL = re.compile(r"(<=|>=|==|<|>|=)")


def parse_guard(text: str, names: Sequence[str]) -> Guard:
    nvars = len(names)
    atoms = []
    for part in text.split("&&"):
        bits = _REL.split(part)
        if len(bits) < 3:
            raise ParseError(f"guard atom without a comparison: {part.strip()!r}")
        sides = [parse_affine(s, names) for s in bits[::2]]
        ops = bits[1::2]
        for lhs, op, rhs in zip(sides, ops, sides[1:]):
            diff = lhs - rhs
            if op in ("=", "=="):
                atoms.append(Atom.from_form(diff, eq=True))
                continue
            if op in ("<", "<="):
                diff = diff.scale(-1)
            atom = Atom.from_form(diff)
            if op in ("<", ">"):
                atom = Atom(atom.coeffs, atom.const - 1)
            atoms.append(atom)
    return Guard(nvars, tuple(atoms))


def parse_pw(text: str, grid: int = GRID, check: bool = True) -> PWEquation:
    """Parse a piecewise equation and check it partitions the grid."""
    lines = [line.split("#", 1)[0] for line in text.splitlines()]
    stmts = [s.strip() for line in lines for s in line.split(";") if s.strip()]
    names = None
    raw = []
    for s in stmts:
        if s.startswith("vars"):
            names = tuple(v for v in re.split(r"[\s,]+", s[4:].strip()) if v)
        elif s.startswith("arity"):
            names = tuple(f"x{k}" for k in range(int(s[5:].strip())))
        elif s.startswith("case"):
            guard, sep, body = s[4:].partition(":")
            if not sep:
                raise ParseError(f"case without ':' in {s!r}")
            raw.append((guard, body.strip()))
        else:
            raise ParseError(f"unrecognised statement {s!r}")
    if not raw:
        raise ParseError("no cases")
    if names is None:
        names = _infer_names(raw)
    pieces = []
    for guard, body in raw:
        p = _BodyParser(body, names)
        b = p.expr()
        p.done()
        pieces.append(Piece(parse_guard(guard, names), b, body))
    eq = PWEquation(tuple(names), tuple(pieces))
    if check:
        check_partition(eq, grid)
    return eq


def _infer_names(raw) -> tuple:
    seen = []
    for guard, body in raw:
        for tok in re.findall(r"[A-Za-z_][A-Za-z_0-9]*", guard + " " + body):
            if tok not in ("f", "max", "cst") and tok not in seen:
                seen.append(tok)
    return tuple(seen) or ("n",)


def load_pw(path, grid: int = GRID) -> PWEquation:
    from pathlib import Path

    return parse_pw(Path(path).read_text(encoding="utf-8"), grid)


def check_partition(eq: PWEquation, grid: int = GRID) -> None:
    gaps, overlaps = [], []
    for point in product(range(grid + 1), repeat=eq.arity):
        hits = [k for k, p in enumerate(eq.pieces) if p.guard.contains(point)]
        if not hits:
            gaps.append(point)
        elif len(hits) > 1:
            overlaps.append((point, tuple(hits)))
    if overlaps:
        raise PartitionError("cases overlap", overlaps)
    if gaps:
        raise PartitionError("cases leave points uncovered", gaps)


# ---------------------------------------------------------------------------
# concrete semantics
# ---------------------------------------------------------------------------


def eval_body(b, point, f) -> object:
    if isinstance(b, BConst):
        return b.q
    if isinstance(b, BVar):
        return Fraction(point[b.j])
    if isinstance(b, BCall):
        arg = tuple(int(a(point)) for a in b.args)
        return f(arg) if all(x >= 0 for x in arg) else Fraction(0)
    if isinstance(b, BAdd):
        return eval_body(b.left, point, f) + eval_body(b.right, point, f)
    if isinstance(b, BSub):
        return eval_body(b.left, point, f) - eval_body(b.right, point, f)
    if isinstance(b, BScale):
        v = eval_body(b.body, point, f)
        return Fraction(0) if b.q == 0 else b.q * v
    if isinstance(b, BMax):
        return max(eval_body(b.left, point, f), eval_body(b.right, point, f))
    raise TypeError(f"not a body: {b!r}")


def apply_pw(eq: PWEquation, f, point) -> object:
    """``Phi(f)(point)``; values are truncated at zero."""
    k = eq.piece_of(point)
    if k is None:
        return INF
    v = eval_body(eq.pieces[k].body, point, f)
    return v if v > 0 else Fraction(0)


def pw_concrete_lfp(eq: PWEquation, N: int, max_iters: int = 1000) -> PrefixTable:
    """Chaotic Kleene iteration on ``[0..N]^d``; out-of-box reads are 0."""
    table = PrefixTable.filled(eq.arity, N)

    def read(p):
        return table.values[p] if table.in_box(p) else Fraction(0)

    pts = list(table.points())
    for _ in range(max_iters):
        changed = False
        for p in pts:
            v = apply_pw(eq, read, p)
            if v != table.values[p]:
                table.values[p] = v
                changed = True
        if not changed:
            return table
    table.stable = False
    return table


# ---------------------------------------------------------------------------
# abstract domain
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PWValue:
    pieces: tuple  # one tuple of AffineForm per piece

    @classmethod
    def bottom(cls, eq: PWEquation) -> "PWValue":
        zero = AffineForm.constant(eq.arity, 0)
        return cls(tuple((zero,) for _ in eq.pieces))

    def __getitem__(self, k: int) -> tuple:
        return self.pieces[k]

    def at(self, eq: PWEquation, point) -> object:
        k = eq.piece_of(point)
        if k is None:
            return INF
        return min(g(point) for g in self.pieces[k])

    def format(self, eq: PWEquation) -> list:
        out = []
        for k, gens in enumerate(self.pieces):
            body = ", ".join(g.format(eq.names) for g in gens)
            out.append(f"D{k + 1}: {{{body}}}")
        return out


def prune_on(g: Guard, forms: Sequence[AffineForm]) -> list:
    """Drop forms that are never better than another one on ``g``."""
    forms = sorted(set(forms), key=AffineForm.sort_key)
    finite = [u for u in forms if not u.is_top]
    if not finite:
        return [AffineForm.top(g.nvars)]
    keep = []
    for k, u in enumerate(finite):
        # u >= v on g makes u redundant; among equals the earlier form stays
        redundant = any(
            j != k and dominance_on(g, u, v) and (j < k or not dominance_on(g, v, u))
            for j, v in enumerate(finite)
        )
        if not redundant:
            keep.append(u)
    return keep


def interfaces(eq: PWEquation, piece: int, call: BCall) -> list:
    """Sub-guards of ``piece`` by where ``call`` lands (``None``: outside N^d)."""
    P = eq.pieces[piece].guard
    args = call.args
    d = eq.arity
    nonneg = [Atom.from_form(a) for a in args]
    out = []
    for t, target in enumerate(eq.pieces):
        sub = P.conj(target.guard.pullback(args), nonneg)
        if sub.feasible():
            out.append((sub, t))
    for j, a in enumerate(args):
        neg = Atom.from_form(a.scale(-1) - AffineForm.constant(d, 1))
        sub = P.conj(nonneg[:j], [neg])
        if sub.feasible():
            out.append((sub, None))
    return out


def eval_abstract(b, env: Sequence[AffineForm], region: Guard) -> AffineForm:
    d = region.nvars
    if isinstance(b, BConst):
        return AffineForm.constant(d, b.q)
    if isinstance(b, BVar):
        return AffineForm.var(d, b.j)
    if isinstance(b, BCall):
        return env[b.idx]
    if isinstance(b, BAdd):
        return eval_abstract(b.left, env, region) + eval_abstract(b.right, env, region)
    if isinstance(b, BSub):
        return eval_abstract(b.left, env, region) - eval_abstract(b.right, env, region)
    if isinstance(b, BScale):
        return eval_abstract(b.body, env, region).scale(b.q)
    if isinstance(b, BMax):
        u = eval_abstract(b.left, env, region)
        v = eval_abstract(b.right, env, region)
        if u.is_top or v.is_top:
            return AffineForm.top(d)
        if dominance_on(region, u, v):
            return u
        if dominance_on(region, v, u):
            return v
        # coefficient-wise max dominates both forms on the whole orthant
        return u.coeff_max(v)
    raise TypeError(f"not a body: {b!r}")


def _interpolants(a_sub, b_sub) -> list:
    """Forms equal to ``b`` on the boundary region and at least ``a`` inside.

    For generators ``a`` (interior) and ``b`` (boundary) differing by a
    constant ``delta > 0``, look for an atom-derived form ``l`` that is
    constant on the boundary region; shift it to vanish there and scale it
    so that ``b + delta * l`` reaches ``a`` on the interior region.
    """
    (GA, BA), (GB, BB) = a_sub, b_sub
    out = []
    atoms = list(GA.atoms) + [x for x in GB.atoms if x not in GA.atoms]
    for a in BA:
        for b in BB:
            if a.is_top or b.is_top:
                continue
            diff = a - b
            if not diff.is_constant or diff.const <= 0:
                continue
            delta = diff.const
            for atom in atoms:
                for sign in (1, -1):
                    phi = atom.form().scale(sign)
                    rb = fm.bounds(GB.rows(), GB.nvars, phi.coeffs, phi.const)
                    if rb is None or rb[0] != rb[1] or rb[0] in (INF, -INF):
                        continue
                    ell = phi - AffineForm.constant(GB.nvars, rb[0])
                    ra = fm.bounds(GA.rows(), GA.nvars, ell.coeffs, ell.const)
                    if ra is None or ra[0] == -INF or ra[0] <= 0:
                        continue
                    out.append(b + ell.scale(delta / Fraction(ra[0])))
    return out


def _lower_const(u: AffineForm, subresults, target: Guard) -> AffineForm:
    """Shift a verified bound down by the slack it has on every sub-region."""
    slack = fm.bounds(target.rows(), target.nvars, u.coeffs, u.const)
    if slack is None:
        return u
    shift = slack[0]
    for g, bs in subresults:
        best = -INF
        for b in bs:
            r = fm.bounds(g.rows(), g.nvars, (u - b).coeffs, (u - b).const)
            if r is not None:
                best = max(best, r[0])
        shift = min(shift, best)
    if shift in (INF, -INF) or shift <= 0:
        return u
    return u - AffineForm.constant(u.nvars, shift)


def merge_piece(subresults: Sequence, target: Guard) -> list:
    """Bounds valid on the whole ``target`` from bounds on its sub-regions."""
    d = target.nvars
    subresults = [(g, list(bs)) for g, bs in subresults]
    if not subresults:
        return [AffineForm.constant(d, 0)]
    if any(all(b.is_top for b in bs) for _, bs in subresults):
        return [AffineForm.top(d)]
    zero = AffineForm.constant(d, 0)
    cands = []
    for _, bs in subresults:
        cands.extend(b for b in bs if not b.is_top)
    interp = []
    for (i, (_, ba)), (j, (_, bb)) in product(enumerate(subresults), repeat=2):
        if i < j:
            cands.extend(a.coeff_max(b) for a in ba for b in bb if not (a.is_top or b.is_top))
        if i != j:
            interp.extend(_interpolants(subresults[i], subresults[j]))

    def valid(u: AffineForm) -> bool:
        if not dominance_on(target, u, zero):
            return False
        return all(dominance_check(g, u, bs, witness=False).holds for g, bs in subresults)

    def verified(forms) -> list:
        forms = sorted(set(forms), key=AffineForm.sort_key)
        return [_lower_const(u, subresults, target) for u in forms if valid(u)]

    # An interpolant that verifies extends the boundary behaviour into the
    # interior; keeping only those lets the iteration jump to the recurring
    # shape instead of growing constant bounds one step at a time.
    found = verified(interp)
    if found:
        return prune_on(target, found)
    found = verified(cands)
    if not found:
        fallback = zero
        for _, bs in subresults:
            for b in bs:
                fallback = fallback.coeff_max(b)
        found = [fallback]
    return prune_on(target, found)


def pw_abstract_step(eq: PWEquation, V: PWValue, detail: Optional[list] = None) -> PWValue:
    d = eq.arity
    zero = AffineForm.constant(d, 0)
    out = []
    for k, piece in enumerate(eq.pieces):
        calls = piece.calls
        P = piece.guard
        subresults = []
        if not calls:
            subresults.append((P, [eval_abstract(piece.body, [], P)]))
        else:
            per_call = [interfaces(eq, k, c) for c in calls]
            for combo in product(*per_call):
                sub = P.conj(*(g for g, _ in combo))
                if len(combo) > 1 and not sub.feasible():
                    continue
                choices = []
                for call, (_, t) in zip(calls, combo):
                    if t is None:
                        choices.append([zero])
                    else:
                        choices.append([g.compose(call.args) for g in V[t]])
                forms = [eval_abstract(piece.body, env, sub) for env in product(*choices)]
                subresults.append((sub, prune_on(sub, forms)))
        if detail is not None:
            detail.append(subresults)
        out.append(tuple(merge_piece(subresults, P)))
    return PWValue(tuple(out))


def _join_on(g: Guard, prev: Sequence[AffineForm], nxt: Sequence[AffineForm]) -> list:
    out = []
    for u in prev:
        for v in nxt:
            if u.is_top or v.is_top:
                out.append(AffineForm.top(g.nvars))
            elif dominance_on(g, v, u):
                out.append(v)
            elif dominance_on(g, u, v):
                out.append(u)
            else:
                out.append(u.coeff_max(v))
    return prune_on(g, out)


def pw_widen(eq: PWEquation, prev: PWValue, nxt: PWValue, cfg: WideningCfg, histories) -> PWValue:
    out = []
    for k, piece in enumerate(eq.pieces):
        g = piece.guard
        gens = stability_widen(
            prev[k],
            _join_on(g, prev[k], nxt[k]),
            cfg,
            histories[k],
            coords=AffineForm.coords,
            rebuild=AffineForm.from_coords,
            prune=lambda forms, g=g: prune_on(g, forms),
        )
        out.append(tuple(gens))
    return PWValue(tuple(out))


def pw_postfix(eq: PWEquation, V: PWValue, S: PWValue) -> bool:
    """``gamma S <= gamma V`` piece by piece (so ``V`` is a postfixpoint)."""
    for k, piece in enumerate(eq.pieces):
        for v in V[k]:
            if not any(dominance_on(piece.guard, v, s) for s in S[k]):
                return False
    return True


@dataclass
class PWResult:
    value: PWValue
    status: Status
    iterations: int
    trace: list = field(default_factory=list)

    @property
    def verified(self) -> bool:
        return self.status in (Status.EXACT_POSTFIX, Status.WIDENED_POSTFIX)


def pw_verify_sampled(eq: PWEquation, V: PWValue, N: int = GRID) -> list:
    bad = []

    def f(p):
        return V.at(eq, p)

    for point in product(range(N + 1), repeat=eq.arity):
        lhs = apply_pw(eq, f, point)
        rhs = V.at(eq, point)
        if lhs > rhs:
            bad.append((point, lhs, rhs))
    return bad


def analyze_pw(
    eq: PWEquation, wcfg: WideningCfg = WideningCfg(), max_iters: int = 40, sample_N: int = GRID
) -> PWResult:
    V = PWValue.bottom(eq)
    histories = [WideningHistory() for _ in eq.pieces]
    trace = [V]
    it = 0
    while it < max_iters:
        it += 1
        S = pw_abstract_step(eq, V)
        if pw_postfix(eq, V, S):
            lifted = any(h.lifted for h in histories)
            status = Status.WIDENED_POSTFIX if lifted else Status.EXACT_POSTFIX
            return PWResult(V, status, it, trace)
        V = pw_widen(eq, V, S, wcfg, histories)
        trace.append(V)
    status = Status.SAMPLED_ONLY if not pw_verify_sampled(eq, V, sample_N) else Status.DIVERGED
    return PWResult(V, status, it, trace)


def oracle_violations(eq: PWEquation, V: PWValue, N: int = GRID) -> list:
    """Grid points where the bound falls below the concrete least solution."""
    table = pw_concrete_lfp(eq, N)
    return [
        (p, table.values[p], V.at(eq, p))
        for p in table.points()
        if V.at(eq, p) < table.values[p]
    ]
