"""Multivariate bounds as tensor products of univariate bases.

A coefficient tensor over ``B_0 x ... x B_{d-1}`` denotes
``sum a[k] * prod_i e_{k_i}(x_i)``.  Shifting along axis ``i`` acts on the
``i``-th index only, so Pop is the univariate identity applied to every
slice.  Push along ``i`` is solved slice by slice as well: for a fixed
multi-index over the other axes, the slice is a univariate vector whose
shift must dominate the corresponding slice of the input, and only the
slice sitting on the constant element of the other axes carries the base
value.
"""

from __future__ import annotations

import warnings
from fractions import Fraction
from itertools import product

from .bases import TensorBasis, shift_coeffs
from .core_order import CoeffVec, GenSet
from . import synthesis

SAMPLE_BOX = 10
MAX_COMBINATIONS = 256


def tensor_eval(coeffs, point, basis: TensorBasis = None):
    if isinstance(coeffs, CoeffVec):
        basis = coeffs.basis
        coeffs = coeffs.coeffs
    if basis is None:
        raise ValueError("tensor_eval needs a basis for raw coefficients")
    if len(coeffs) != basis.dim:
        raise ValueError(f"expected {basis.dim} coefficients, got {len(coeffs)}")
    return basis.evaluate(coeffs, point)


def tf_pop_axis(i: int, g: CoeffVec) -> GenSet:
    if not 0 <= i < g.basis.arity:
        raise ValueError(f"axis {i} out of range for arity {g.basis.arity}")
    return GenSet(g.basis, (CoeffVec.make(g.basis, shift_coeffs(g.basis, g.coeffs, i)),))


def _pushed_value(g: CoeffVec, i: int, c, point):
    if point[i] == 0:
        return Fraction(c)
    return g(point[:i] + (point[i] - 1,) + point[i + 1 :])


def push_dominates_on_box(p: CoeffVec, g: CoeffVec, i: int, c, box: int = SAMPLE_BOX) -> bool:
    for point in product(range(box + 1), repeat=g.basis.arity):
        if p(point) < _pushed_value(g, i, c, point):
            return False
    return True


def tf_push_axis(i: int, c, g: CoeffVec) -> GenSet:
    basis = g.basis
    if not 0 <= i < basis.arity:
        raise ValueError(f"axis {i} out of range for arity {basis.arity}")
    if basis.is_univariate:
        from .domains import tf_push

        return tf_push(g, c, i)
    if not g.is_finite:
        return GenSet.top(basis)
    ax = basis.axes[i]
    names = synthesis.unknown_names(ax)
    others = [k for k in range(basis.arity) if k != i]
    base_multi = tuple(basis.axes[k].const_index for k in others)

    slices = []
    for rest in product(*(range(basis.axes[k].dim) for k in others)):
        def full(r, rest=rest):
            m = list(rest)
            m.insert(i, r)
            return basis.flat(m)

        flat = [full(r) for r in range(ax.dim)]
        a = [g.coeffs[t] for t in flat]
        x = Fraction(c) if rest == base_multi else None
        if x is None and all(v == 0 for v in a):
            slices.append((flat, [tuple(Fraction(0) for _ in flat)]))
            continue
        sys = synthesis.LinearSystem(names, tuple(synthesis.axis_push_rows(ax, a, x)))
        slices.append((flat, synthesis.minimal_generators(sys, vertices=True)))

    n_comb = 1
    for _, sols in slices:
        n_comb *= max(len(sols), 1)
    if n_comb > MAX_COMBINATIONS or any(not sols for _, sols in slices):
        warnings.warn("multivariate push produced too many combinations; using top")
        return GenSet.top(basis)

    gens = []
    for choice in product(*(sols for _, sols in slices)):
        coeffs = [Fraction(0)] * basis.dim
        for (flat, _), sol in zip(slices, choice):
            for t, v in zip(flat, sol):
                coeffs[t] = v
        p = CoeffVec.make(basis, coeffs)
        if push_dominates_on_box(p, g, i, c):
            gens.append(p)
    if not gens:
        return GenSet.top(basis)
    return GenSet.of(basis, gens)
