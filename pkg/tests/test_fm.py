from fractions import Fraction
from itertools import product

from hypothesis import given, settings, strategies as st

from recbound import fm

Q = Fraction
BOX = 4


def box_rows(nvars):
    rows = []
    for j in range(nvars):
        e = [0] * nvars
        e[j] = 1
        rows.append((tuple(e), 0))
        rows.append((tuple(-c for c in e), BOX))
    return rows


def holds(rows, p):
    return all(sum(c * x for c, x in zip(coeffs, p)) + k >= 0 for coeffs, k in rows)


def test_triangle_bounds():
    rows = [((1, 0), 0), ((-1, 0), 3), ((0, 1), 0), ((1, -1), 0)]
    assert fm.feasible(rows, 2)
    assert fm.bounds(rows, 2, (1, 1)) == (0, 6)
    assert fm.bounds(rows, 2, (0, -1), offset=2) == (-1, 2)


def test_integer_tightening():
    # 2x = 1 has a rational but no integer solution
    assert not fm.feasible([((2,), -1), ((-2,), 1)], 1)


def test_empty_rational_system():
    assert fm.bounds([((1,), -3), ((-1,), 1)], 1, (1,)) is None
    assert not fm.feasible([((1,), -3), ((-1,), 1)], 1)


def test_unbounded_direction():
    lo, hi = fm.bounds([((1,), 0)], 1, (1,))
    assert lo == 0 and hi == fm.INF


def test_normalize_row_clears_denominators():
    assert fm.normalize_row((Q(1, 2), Q(1, 3)), Q(1, 6)) == ((3, 2), 1)


def test_integer_point():
    assert fm.integer_point([((1, 1), -3)], 2, 3) == (0, 3)
    assert fm.integer_point([((1, 1), -9)], 2, 3) is None


coef = st.integers(-3, 3)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 3).flatmap(
    lambda d: st.tuples(st.just(d), st.lists(st.tuples(st.lists(coef, min_size=d, max_size=d), st.integers(-6, 6)), max_size=4))
))
def test_feasible_agrees_with_enumeration(case):
    d, raw = case
    rows = box_rows(d) + [(tuple(c), k) for c, k in raw]
    witness = any(holds(rows, p) for p in product(range(BOX + 1), repeat=d))
    if witness:
        assert fm.feasible(rows, d)
    found = fm.integer_point(rows, d, BOX)
    assert (found is not None) == witness
    if found is not None:
        assert holds(rows, found)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.lists(coef, min_size=2, max_size=2), st.integers(-6, 6)), max_size=3), st.tuples(coef, coef))
def test_bounds_enclose_integer_points(raw, obj):
    rows = box_rows(2) + [(tuple(c), k) for c, k in raw]
    pts = [p for p in product(range(BOX + 1), repeat=2) if holds(rows, p)]
    rng = fm.bounds(rows, 2, obj)
    if not pts:
        return
    assert rng is not None
    lo, hi = rng
    vals = [obj[0] * x + obj[1] * y for x, y in pts]
    assert lo <= min(vals) and max(vals) <= hi
