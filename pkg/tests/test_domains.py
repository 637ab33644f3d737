import warnings
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from recbound.bases import affine_basis, binomial_basis, eval_basis, exppoly_basis, stirling_basis
from recbound.core_order import INF, CoeffVec
from recbound.domains import (
    AbstractionWarning, DomainCfg, interpret, parse_domain, push_affine_closed, tf_add, tf_comp, tf_const, tf_mul,
    tf_pop, tf_pop_affine, tf_pop_binomial, tf_pop_exppoly, tf_pop_stirling, tf_push, tf_push_affine,
    tf_push_binomial, tf_var,
)
from recbound.seq_lang import BinOp, Comp, Cst, F, Pop, Push, Var, eval_at
from recbound.synthesis import push_system, satisfies

Q = Fraction
AFF = affine_basis()
BIN2 = binomial_basis(2)


def vec(basis, *cs):
    return CoeffVec.make(basis, cs)


def coeffs(A):
    return {g.coeffs for g in A}


def test_leaves():
    assert coeffs(tf_const(AFF, 3)) == {(0, 3)}
    assert coeffs(tf_var(AFF)) == {(1, 0)}
    assert coeffs(tf_var(BIN2)) == {(0, 1, 0)}


def test_var_without_linear_element_is_top():
    with pytest.warns(AbstractionWarning):
        assert tf_var(stirling_basis(2)).is_top


def test_affine_arithmetic():
    assert coeffs(tf_mul(vec(AFF, 1, 0), vec(AFF, 0, 3))) == {(3, 0)}
    assert coeffs(tf_mul(vec(AFF, 1, 1), vec(AFF, 1, 0))) == {(INF, 0)}
    g = vec(AFF, 2, 5)
    assert coeffs(tf_add(g, CoeffVec.zero(AFF))) == {(2, 5)}


def test_affine_pop():
    assert coeffs(tf_pop_affine((2, 1))) == {(2, 3)}
    assert coeffs(tf_pop_affine((0, 7))) == {(0, 7)}
    assert tf_pop_affine((INF, 1)).is_top


def test_affine_push_cases():
    assert coeffs(tf_push_affine(5, (1, 3))) == {(1, 5)}
    assert coeffs(tf_push_affine(0, (1, 3))) == {(1, 2), (3, 0)}
    assert coeffs(tf_push_affine(2, (1, 3))) == {(1, 2)}
    assert push_affine_closed(Q(2), Q(1), Q(3)) == [(1, 2)]


def test_binomial_pop_and_push():
    assert coeffs(tf_pop_binomial(vec(BIN2, 1, 1, 0))) == {(1, 2, 1)}
    assert coeffs(tf_pop_binomial(CoeffVec.zero(BIN2))) == {(0, 0, 0)}
    assert coeffs(tf_pop_binomial(vec(BIN2, 0, 0, 4))) == {(0, 0, 4)}
    assert coeffs(tf_push_binomial(0, vec(BIN2, 1, 2, 1))) == {(1, 1, 0)}
    assert coeffs(tf_push_binomial(0, CoeffVec.zero(BIN2))) == {(0, 0, 0)}


def test_binomial_push_large_base():
    a = vec(BIN2, 1, 2, 1)
    out = tf_push_binomial(5, a)
    sys = push_system(BIN2, a, 5)
    assert (1, 1, 5) in coeffs(out)
    assert all(satisfies(sys, g) for g in out)


def test_stirling_and_exppoly_pop():
    assert coeffs(tf_pop_stirling(vec(stirling_basis(2), 1, 1))) == {(2, 2)}
    assert coeffs(tf_pop_stirling(vec(stirling_basis(2), 3, 0))) == {(3, 0)}
    assert coeffs(tf_pop_exppoly(vec(exppoly_basis(1, 1), 2, 3))) == {(5, 3)}


def test_pop_checks_the_basis():
    with pytest.raises(ValueError):
        tf_pop_stirling(vec(BIN2, 1, 0, 0))


def test_composition():
    assert coeffs(tf_comp(vec(AFF, 1, 0), vec(AFF, 1, 0))) == {(1, 0)}
    assert coeffs(tf_comp(vec(AFF, 2, 1), vec(AFF, 1, 3))) == {(2, 7)}
    assert coeffs(tf_comp(vec(AFF, 0, 4), vec(AFF, 5, 2))) == {(0, 4)}
    # an infinite inner slope must not disappear behind the constant outer
    assert coeffs(tf_comp(vec(AFF, 0, 4), vec(AFF, INF, 3))) == {(INF, 4)}


def test_composition_outside_affine():
    with pytest.warns(AbstractionWarning):
        assert tf_comp(vec(BIN2, 1, 0, 0), vec(BIN2, 1, 0, 0)).is_top


def test_parse_domain():
    assert str(parse_domain("affine")) == "affine"
    assert parse_domain("poly:2").basis == BIN2
    assert parse_domain("exppoly:2,1").basis == exppoly_basis(2, 1)
    assert parse_domain("poly:1", arity=2).basis.arity == 2
    for bad in ("poly", "quartic:3", "exp:x"):
        with pytest.raises(ValueError):
            parse_domain(bad)


# -- soundness of the whole interpreter --------------------------------------

consts = st.fractions(min_value=0, max_value=6, max_denominator=2)


def exprs(with_comp):
    leaves = st.one_of(st.just(F()), consts.map(Cst), st.just(Var(0)))

    def grow(sub):
        nodes = [
            st.tuples(st.sampled_from("+-*"), sub, sub).map(lambda t: BinOp(*t)),
            sub.map(lambda b: Pop(0, b)),
            st.tuples(consts, sub).map(lambda t: Push(0, *t)),
        ]
        if with_comp:
            nodes.append(st.tuples(sub, sub).map(lambda t: Comp(*t)))
        return st.one_of(*nodes)

    return st.recursive(leaves, grow, max_leaves=6)


def _check_sound(e, g, basis):
    def f(p):
        return eval_basis(basis, g.coeffs, p[0])

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", AbstractionWarning)
        out = interpret(e, g, DomainCfg(basis, 1))
    for n in range(12):
        concrete = eval_at(e, f, n)
        for h in out:
            assert h((n,)) >= concrete, (e, g, h, n)


@settings(max_examples=150, suppress_health_check=[HealthCheck.too_slow])
@given(exprs(True), consts, consts)
def test_affine_interpretation_is_sound(e, a, b):
    _check_sound(e, vec(AFF, a, b), AFF)


@settings(max_examples=100, suppress_health_check=[HealthCheck.too_slow])
@given(exprs(False), st.lists(consts, min_size=3, max_size=3))
def test_binomial_interpretation_is_sound(e, cs):
    _check_sound(e, CoeffVec.make(BIN2, cs), BIN2)


@settings(max_examples=100, suppress_health_check=[HealthCheck.too_slow])
@given(exprs(False), st.lists(consts, min_size=4, max_size=4))
def test_exppoly_interpretation_is_sound(e, cs):
    b = exppoly_basis(2, 1)
    _check_sound(e, CoeffVec.make(b, cs), b)


@given(consts, st.lists(consts, min_size=3, max_size=3))
def test_push_output_dominates_shifted_input(c, cs):
    g = CoeffVec.make(BIN2, cs)
    for h in tf_push(g, c):
        assert h((0,)) >= c
        for n in range(1, 15):
            assert h((n,)) >= g((n - 1,))


@given(st.lists(consts, min_size=3, max_size=3))
def test_pop_generic_matches_named(cs):
    g = CoeffVec.make(BIN2, cs)
    assert tf_pop(g) == tf_pop_binomial(g)
