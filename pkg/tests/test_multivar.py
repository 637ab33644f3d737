from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from recbound.bases import AxisBasis, tensor
from recbound.core_order import CoeffVec
from recbound.domains import parse_domain, tf_push
from recbound.engine import analyze
from recbound.multivar import tensor_eval, tf_pop_axis, tf_push_axis
from recbound.seq_lang import concrete_lfp_prefix, parse_seq

B1 = AxisBasis("binomial", d=1)
BILIN = tensor(B1, B1)  # C(x,1)C(y,1), C(x,1), C(y,1), 1


def vec(*cs, basis=BILIN):
    return CoeffVec.make(basis, cs)


def test_tensor_eval():
    assert tensor_eval((1, 0, 0, 0), (3, 4), BILIN) == 12
    assert tensor_eval(vec(0, 0, 0, 5), (7, 2)) == 5
    b = tensor(AxisBasis("binomial", d=2), B1)
    cs = [0] * b.dim
    cs[0] = 1
    assert tensor_eval(cs, (4, 3), b) == 18
    with pytest.raises(ValueError):
        tensor_eval((1, 2), (0, 0))


def test_pop_of_product():
    (g,) = tf_pop_axis(0, vec(1, 0, 0, 0)).gens
    assert g.coeffs == (1, 0, 1, 0)  # (x+1)y = xy + y
    assert tf_pop_axis(0, vec(0, 0, 0, 5)).gens[0].coeffs == (0, 0, 0, 5)


def test_pop_pascal_split_three_vars():
    b = tensor(B1, B1, B1)
    cs = [0] * b.dim
    cs[0] = 1
    (g,) = tf_pop_axis(0, CoeffVec.make(b, cs)).gens
    assert sorted(b.label(i) for i, c in enumerate(g.coeffs) if c) == ["C(x0,1)*C(x1,1)*C(x2,1)", "C(x1,1)*C(x2,1)"]


def test_axis_out_of_range():
    with pytest.raises(ValueError):
        tf_pop_axis(2, vec(0, 0, 0, 0))
    with pytest.raises(ValueError):
        tf_push_axis(-1, 0, vec(0, 0, 0, 0))


def test_push_examples():
    assert tf_push_axis(0, 0, CoeffVec.zero(BILIN)).gens[0].coeffs == (0, 0, 0, 0)
    uni = tensor(AxisBasis("binomial", d=2))
    g = CoeffVec.make(uni, (1, 2, 1))
    assert tf_push_axis(0, 0, g) == tf_push(g, 0)


def test_grid_equation_is_exact():
    e = parse_seq("push0 0 (f + x1)", arity=2)
    res = analyze(e, parse_domain("poly:1", arity=2))
    assert res.verified
    assert {g.coeffs for g in res.bound} == {(1, 0, 0, 0)}
    oracle = concrete_lfp_prefix(e, 8, arity=2)
    assert all(res.bound(p) == oracle[p] for p in oracle.points())


small = st.integers(0, 4)


@settings(max_examples=80, deadline=None)
@given(st.lists(small, min_size=4, max_size=4), small, st.integers(0, 1))
def test_push_axis_is_sound(cs, c, axis):
    g = vec(*cs)
    out = tf_push_axis(axis, c, g)
    for p, h in product(product(range(8), repeat=2), out):
        if p[axis] == 0:
            assert h(p) >= c
        else:
            q = list(p)
            q[axis] -= 1
            assert h(p) >= g(tuple(q))


@settings(max_examples=80)
@given(st.lists(small, min_size=6, max_size=6), st.integers(0, 1))
def test_pop_axis_is_exact(cs, axis):
    b = tensor(AxisBasis("binomial", d=2), B1)
    g = CoeffVec.make(b, cs)
    (h,) = tf_pop_axis(axis, g).gens
    for p in product(range(6), repeat=2):
        q = list(p)
        q[axis] += 1
        assert h(p) == g(tuple(q))
