from fractions import Fraction
from math import comb

import pytest
from hypothesis import given, strategies as st

from recbound.bases import (
    AxisBasis, IncompatibleBases, affine_basis, binomial, binomial_basis, convert_basis, eval_basis,
    exppoly_basis, monomial_basis, powers_basis, shift_coeffs, stirling2, stirling_basis, tensor,
)
from recbound.core_order import INF

Q = Fraction


def stirling_brute(n, k):
    """Count set partitions of n labelled items into k nonempty blocks."""
    def go(i, blocks):
        if i == n:
            return 1 if blocks == k else 0
        total = blocks * go(i + 1, blocks)
        if blocks < k:
            total += go(i + 1, blocks + 1)
        return total

    return go(0, 0)


def test_binomial_values():
    assert binomial(4, 2) == 6
    assert binomial(2, 5) == 0
    assert all(binomial(n, 0) == 1 for n in range(11))
    assert all(binomial(n, k) == comb(n, k) for n in range(15) for k in range(15))


def test_stirling_values():
    assert stirling2(4, 2) == 7
    assert stirling2(3, 0) == 0
    assert stirling2(0, 3) == 0
    assert all(stirling2(n, n) == 1 for n in range(10))
    assert all(stirling2(n, k) == stirling_brute(n, k) for n in range(9) for k in range(9))


def test_eval_examples():
    assert eval_basis(binomial_basis(2), (1, 1, 0), 4) == 10
    assert eval_basis(stirling_basis(2), (1, 1), 3) == 8
    for b in (affine_basis(), binomial_basis(3), stirling_basis(2), exppoly_basis(2, 1)):
        assert eval_basis(b, [0] * b.dim, 7) == 0


def test_eval_uses_zero_times_inf():
    aff = affine_basis()
    assert eval_basis(aff, (INF, 0), 0) == 0
    assert eval_basis(aff, (INF, 0), 1) == INF


def test_convert_examples():
    assert convert_basis(binomial_basis(2), monomial_basis(2), (1, 1, 0)) == (Q(1, 2), Q(1, 2), 0)
    assert convert_basis(stirling_basis(2), powers_basis(2), (0, 1)) == (-1, 1)
    b = binomial_basis(2)
    assert convert_basis(b, b, (3, 1, 2)) == (3, 1, 2)


def test_convert_needs_same_span():
    with pytest.raises(IncompatibleBases):
        convert_basis(stirling_basis(2), monomial_basis(2), (0, 1))


def test_tensor_layout():
    b = tensor(AxisBasis("binomial", d=2), AxisBasis("binomial", d=1))
    assert b.dim == 6
    assert b.label(0, ["x", "y"]) == "C(x,2)*C(y,1)"
    assert b.label(b.const_index, ["x", "y"]) == "1"
    coeffs = [0] * b.dim
    coeffs[0] = 1
    assert b.evaluate(coeffs, (4, 3)) == 18


small = st.fractions(min_value=0, max_value=10, max_denominator=3)


@pytest.mark.parametrize(
    "basis",
    [affine_basis(), binomial_basis(3), monomial_basis(2), stirling_basis(3), exppoly_basis(2, 2)],
    ids=str,
)
@given(data=st.data())
def test_shift_is_exact(basis, data):
    cs = data.draw(st.lists(small, min_size=basis.dim, max_size=basis.dim))
    shifted = shift_coeffs(basis, cs)
    for n in range(15):
        assert eval_basis(basis, shifted, n) == eval_basis(basis, cs, n + 1)


@given(st.lists(small, min_size=4, max_size=4))
def test_binomial_monomial_roundtrip(cs):
    src, dst = binomial_basis(3), monomial_basis(3)
    mono = convert_basis(src, dst, cs)
    assert convert_basis(dst, src, mono) == tuple(cs)
    for n in range(10):
        assert eval_basis(dst, mono, n) == eval_basis(src, cs, n)


@given(st.lists(small, min_size=3, max_size=3))
def test_stirling_to_powers_agrees_pointwise(cs):
    src, dst = stirling_basis(3), powers_basis(3)
    out = convert_basis(src, dst, cs)
    for n in range(10):
        assert eval_basis(dst, out, n) == eval_basis(src, cs, n)
