"""Abstract transfer functions, one generator at a time.

Each function takes generators (``CoeffVec``) and returns a ``GenSet``
whose up-closure over-approximates the image of the construct.  Addition
and the shifts are exact in every basis; multiplication is exact where the
product stays inside the span and otherwise places an infinite coefficient
on the element whose support matches the overflowing term.  Push is the
only construct that can need more than one generator.

Infinite coefficients deserve a word.  ``inf * e`` is +inf wherever the
element ``e`` is positive and 0 elsewhere, so it only depends on the
support of ``e``; every element used here has a support of the form
``{n >= s}``.  That is what lets Push and multiplication keep finite
information about small arguments instead of jumping straight to top.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from itertools import product

from .bases import AxisBasis, TensorBasis, shift_coeffs, tensor
from .core_order import INF, CoeffVec, GenSet, monus, xadd, xmul, xreal
from .seq_lang import BinOp, Comp, Cst, F, Pop, Push, SeqExpr, Var
from . import synthesis


class AbstractionWarning(UserWarning):
    """A construct had no precise transfer function and was sent to top."""


@dataclass(frozen=True)
class DomainCfg:
    basis: TensorBasis
    arity: int = 1

    def __post_init__(self):
        if self.basis.arity != self.arity:
            raise ValueError(f"basis {self.basis} does not have arity {self.arity}")

    def __str__(self) -> str:
        return str(self.basis)


def _axis_from_spec(spec: str) -> AxisBasis:
    name, _, args = spec.strip().partition(":")
    nums = [int(v) for v in args.split(",")] if args else []
    try:
        if name == "affine" and not nums:
            return AxisBasis("affine")
        if name in ("poly", "binomial") and len(nums) == 1:
            return AxisBasis("binomial", d=nums[0])
        if name == "monomial" and len(nums) == 1:
            return AxisBasis("monomial", d=nums[0])
        if name in ("exp", "stirling") and len(nums) == 1:
            return AxisBasis("stirling", m=nums[0])
        if name == "exppoly" and len(nums) == 2:
            return AxisBasis("stirling_binomial", m=nums[0], d=nums[1])
    except ValueError as err:
        raise ValueError(f"bad domain {spec!r}: {err}") from None
    raise ValueError(
        f"unknown domain {spec!r} (expected affine, poly:d, exp:m or exppoly:m,d)"
    )


def parse_domain(spec: str, arity: int = 1) -> DomainCfg:
    """``affine``, ``poly:d``, ``exp:m``, ``exppoly:m,d``; several axes with ``*``.

    A single family is replicated over every axis of a multivariate
    equation, e.g. ``poly:1`` at arity 2 is the bilinear basis.
    """
    parts = [p for p in spec.split("*") if p.strip()]
    axes = [_axis_from_spec(p) for p in parts]
    if len(axes) == 1:
        axes = axes * arity
    return DomainCfg(tensor(*axes), arity)


def _top(basis) -> GenSet:
    return GenSet.top(basis)


def _single(basis, coeffs) -> GenSet:
    return GenSet(basis, (CoeffVec.make(basis, coeffs),))


def _basis(cfg_or_basis) -> TensorBasis:
    return cfg_or_basis.basis if isinstance(cfg_or_basis, DomainCfg) else cfg_or_basis


def _vec(basis: TensorBasis, g) -> CoeffVec:
    if isinstance(g, CoeffVec):
        if g.basis != basis:
            raise ValueError(f"generator in {g.basis}, expected {basis}")
        return g
    return CoeffVec.make(basis, g)


# ---------------------------------------------------------------------------
# leaves
# ---------------------------------------------------------------------------


def tf_const(cfg, c) -> GenSet:
    basis = _basis(cfg)
    coeffs = [Fraction(0)] * basis.dim
    coeffs[basis.const_index] = xreal(c)
    return _single(basis, coeffs)


def tf_var(cfg, axis: int = 0) -> GenSet:
    basis = _basis(cfg)
    idx = basis.var_index(axis)
    if idx is None:
        warnings.warn(f"{basis} cannot represent the variable x{axis}", AbstractionWarning)
        return _top(basis)
    coeffs = [Fraction(0)] * basis.dim
    coeffs[idx] = Fraction(1)
    return _single(basis, coeffs)


def tf_f(g: CoeffVec) -> GenSet:
    return GenSet(g.basis, (g,))


# ---------------------------------------------------------------------------
# arithmetic
# ---------------------------------------------------------------------------


def tf_add(g1: CoeffVec, g2: CoeffVec) -> GenSet:
    if g1.basis != g2.basis:
        raise ValueError(f"{g1.basis} vs {g2.basis}")
    return _single(g1.basis, [xadd(x, y) for x, y in zip(g1.coeffs, g2.coeffs)])


def tf_sub(g1: CoeffVec, g2: CoeffVec) -> GenSet:
    """Upper bound of truncated subtraction: the minuend itself."""
    if g1.basis != g2.basis:
        raise ValueError(f"{g1.basis} vs {g2.basis}")
    return GenSet(g1.basis, (g1,))


def tf_mul(g1: CoeffVec, g2: CoeffVec) -> GenSet:
    """Product of two boundary functions.

    In the affine basis this is ``(a1 a2 inf + a1 b2 + a2 b1, b1 b2)``:
    the ``n^2`` term does not fit and becomes an infinite slope, which
    still gives the exact value 0 at n = 0.
    """
    basis = g1.basis
    if basis != g2.basis:
        raise ValueError(f"{basis} vs {g2.basis}")
    out = [Fraction(0)] * basis.dim
    left = [(m, c) for m, c in zip(basis.indices(), g1.coeffs) if c != 0]
    right = [(m, c) for m, c in zip(basis.indices(), g2.coeffs) if c != 0]
    for (mk, ck), (ml, cl) in product(left, right):
        coef = xmul(ck, cl)
        expansions = [ax.mul_expansion(*sorted((i, j))) for ax, i, j in zip(basis.axes, mk, ml)]
        for terms in product(*expansions):
            w = coef
            for _, c in terms:
                w = xmul(w, c)
            tgt = basis.flat([t for t, _ in terms])
            out[tgt] = xadd(out[tgt], w)
    return _single(basis, out)


# ---------------------------------------------------------------------------
# shifts
# ---------------------------------------------------------------------------


def tf_pop(g: CoeffVec, axis: int = 0) -> GenSet:
    return _single(g.basis, shift_coeffs(g.basis, g.coeffs, axis))


def _check_kind(g: CoeffVec, *kinds) -> None:
    if not g.basis.is_univariate or g.basis.axes[0].kind not in kinds:
        raise ValueError(f"expected a {'/'.join(kinds)} generator, got {g.basis}")


def tf_pop_affine(g) -> GenSet:
    """``a(n+1) + b = a n + (a + b)``."""
    from .bases import affine_basis

    g = _vec(affine_basis(), g)
    a, b = g.coeffs
    return _single(g.basis, (a, xadd(a, b)))


def tf_pop_binomial(g: CoeffVec) -> GenSet:
    _check_kind(g, "binomial")
    return tf_pop(g)


def tf_pop_stirling(g: CoeffVec) -> GenSet:
    _check_kind(g, "stirling")
    return tf_pop(g)


def tf_pop_exppoly(g: CoeffVec) -> GenSet:
    _check_kind(g, "stirling_binomial")
    return tf_pop(g)


def _finite_part(g: CoeffVec):
    coeffs = tuple(Fraction(0) if c == INF else c for c in g.coeffs)
    inf_support = [g.basis.axes[0].support(i) for i, c in enumerate(g.coeffs) if c == INF]
    return coeffs, (min(inf_support) if inf_support else None)


def push_affine_closed(c, a, b) -> list:
    if c >= b - a:
        return [(a, c)]
    return [(a, monus(b, a)), (monus(b, c), c)]


def push_binomial2_closed(x, a2, a1, a0) -> list:
    """Three-case push for quadratic binomial bounds, before repair."""
    t = a0 - a1 + a2
    if x > t:
        return [(a2, a1 - a2, x), (x + a1 - a0, a0 - x, x)]
    if x == t:
        return [(a2, a1 - a2, t)]
    return [(a2, a1 - a2, t), (a2, a0 - x, x)]


def _push_finite(basis: TensorBasis, x, coeffs) -> GenSet:
    ax = basis.axes[0]
    x = Fraction(x)
    if ax.kind == "affine":
        pts = push_affine_closed(x, *coeffs)
        return GenSet.of(basis, (CoeffVec.make(basis, p) for p in pts))
    if ax.kind == "binomial" and ax.d == 2:
        sys = synthesis.push_system(basis, coeffs, x)
        pts = [synthesis.tighten(sys, p) for p in push_binomial2_closed(x, *coeffs)]
        return GenSet.of(basis, (CoeffVec.make(basis, p) for p in pts if synthesis.satisfies(sys, p)))
    sys = synthesis.push_system(basis, coeffs, x)
    return synthesis.minimal_generators(sys, basis)


def tf_push(g: CoeffVec, c, axis: int = 0) -> GenSet:
    """``n |-> c`` at ``n_axis = 0`` and the bound shifted back elsewhere."""
    basis = g.basis
    if not basis.is_univariate:
        from .multivar import tf_push_axis

        return tf_push_axis(axis, c, g)
    if g.is_top:
        coeffs, s = tuple(Fraction(0) for _ in g.coeffs), 0
    else:
        coeffs, s = _finite_part(g)
    finite = _push_finite(basis, c, coeffs)
    if s is None:
        return finite
    # g is infinite from n = s on, so the pushed function is from s + 1 on
    star = basis.axes[0].widest_within(s + 1)
    gens = []
    for p in finite:
        cs = list(p.coeffs)
        cs[star] = INF
        gens.append(CoeffVec.make(basis, cs))
    return GenSet.of(basis, gens)


def tf_push_affine(c, g) -> GenSet:
    from .bases import affine_basis

    return tf_push(_vec(affine_basis(), g), c)


def tf_push_binomial(x, g: CoeffVec) -> GenSet:
    _check_kind(g, "binomial")
    return tf_push(g, x)


def tf_push_exppoly(x, g: CoeffVec) -> GenSet:
    _check_kind(g, "stirling_binomial")
    return tf_push(g, x)


def tf_comp(g_outer: CoeffVec, g_inner: CoeffVec) -> GenSet:
    """Composition ``outer(floor(inner(n)))``; precise for affine bounds only."""
    basis = g_outer.basis
    if basis != g_inner.basis:
        raise ValueError(f"{basis} vs {g_inner.basis}")
    if not basis.is_univariate or basis.axes[0].kind != "affine":
        warnings.warn(f"composition is not supported in {basis}", AbstractionWarning)
        return _top(basis)
    a1, b1 = g_outer.coeffs
    a2, b2 = g_inner.coeffs
    out = [xmul(a1, a2), xadd(xmul(a1, b2), b1)]
    # an infinite inner value makes the composite infinite, even for a
    # constant outer function
    out = [INF if ci == INF else co for co, ci in zip(out, g_inner.coeffs)]
    return _single(basis, out)


# ---------------------------------------------------------------------------
# expressions
# ---------------------------------------------------------------------------


def interpret(e: SeqExpr, g: CoeffVec, cfg: DomainCfg) -> GenSet:
    """Bottom-up abstract evaluation of ``e`` with ``f`` bound to ``g``."""
    basis = cfg.basis

    def combine(op, left: GenSet, right: GenSet) -> GenSet:
        out = []
        for x in left:
            for y in right:
                out.extend(op(x, y).gens)
        return GenSet.of(basis, out)

    def go(e) -> GenSet:
        if isinstance(e, Cst):
            return tf_const(basis, e.c)
        if isinstance(e, Var):
            return tf_var(basis, e.i)
        if isinstance(e, F):
            return tf_f(g)
        if isinstance(e, BinOp):
            op = {"+": tf_add, "*": tf_mul, "-": tf_sub}[e.op]
            if e.op == "-":
                return go(e.left)
            return combine(op, go(e.left), go(e.right))
        if isinstance(e, Pop):
            return GenSet.of(basis, (p for h in go(e.body) for p in tf_pop(h, e.axis).gens))
        if isinstance(e, Push):
            return GenSet.of(
                basis, (p for h in go(e.body) for p in tf_push(h, e.c, e.axis).gens)
            )
        if isinstance(e, Comp):
            return combine(tf_comp, go(e.outer), go(e.inner))
        raise TypeError(f"not a Seq expression: {e!r}")

    return go(e)
