"""End-to-end checks, one group per acceptance criterion.

Each test carries ``@pytest.mark.criterion(k)``; the conftest hook prints a
``CRITERION k: PASS/FAIL`` line per criterion at the end of the run.
"""

import random
import time
from fractions import Fraction
from itertools import product
from pathlib import Path

import pytest

from recbound import cli
from recbound.bases import AxisBasis, affine_basis, binomial_basis, eval_basis, tensor
from recbound.core_order import INF, CoeffVec
from recbound.domains import parse_domain, tf_pop, tf_push_affine
from recbound.engine import Status, WideningCfg, analyze, verify_postfix_sampled
from recbound.galois import parse_map, reduce_lfp
from recbound.ode import Itv, OdeParams, check_const_postfix, simulate
from recbound.piecewise import analyze_pw, load_pw, oracle_violations, pw_concrete_lfp
from recbound.seq_lang import concrete_lfp_prefix, load_equation
from recbound.synthesis import minimal_generators, push_system, satisfies

Q = Fraction
CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def _run(eq, domain=None, **kw):
    dcfg = parse_domain(domain or eq.domain, eq.arity)
    return analyze(eq.expr, dcfg, **kw)


def _coeffs(A):
    return {g.coeffs for g in A}


# -- 1 ----------------------------------------------------------------------


@pytest.mark.criterion(1)
def test_nested_call_affine_bound(corpus):
    eq = load_equation(corpus / "nested.eq")
    t0 = time.perf_counter()
    res = _run(eq, "affine")
    elapsed = time.perf_counter() - t0
    assert _coeffs(res.bound) == {(1, 0)}
    assert res.status is Status.EXACT_POSTFIX
    assert res.iterations <= 10
    assert elapsed < 1.0


@pytest.mark.criterion(1)
def test_nested_call_cli(corpus, capsys):
    code = cli.main(["analyze", str(corpus / "nested.eq"), "--domain", "affine"])
    out = capsys.readouterr().out
    assert code == 0
    assert "f(n) <= 1*n + 0" in out
    assert "status: ExactPostfix" in out


# -- 2 ----------------------------------------------------------------------


@pytest.mark.criterion(2)
def test_quadratic_binomial_exact(corpus):
    eq = load_equation(corpus / "quadratic.eq")
    t0 = time.perf_counter()
    res = _run(eq, "poly:2")
    elapsed = time.perf_counter() - t0
    assert _coeffs(res.bound) == {(1, 1, 0)}
    assert res.verified
    assert elapsed < 1.0

    report = verify_postfix_sampled(eq.expr, res.bound, 100)
    assert report.violations == []
    oracle = concrete_lfp_prefix(eq.expr, 100)
    assert all(res.bound((n,)) == oracle[n] for n in range(101))
    assert all(oracle[n] == Q(n * (n + 1), 2) for n in range(101))


# -- 3 ----------------------------------------------------------------------


def _rand_q(rng, hi=20):
    return Q(rng.randint(0, hi * 4), rng.choice((1, 2, 4)))


@pytest.mark.criterion(3)
def test_affine_push_matches_synthesis():
    rng = random.Random(3)
    basis = affine_basis()
    failures = []
    for _ in range(1000):
        a, b, c = _rand_q(rng), _rand_q(rng), _rand_q(rng)
        closed = tf_push_affine(c, (a, b))
        sys = push_system(basis, (a, b), c)
        synth = minimal_generators(sys, basis)
        if _coeffs(closed) != _coeffs(synth):
            failures.append((a, b, c, closed, synth))
        if not all(satisfies(sys, g) for g in closed):
            failures.append((a, b, c, "unsatisfied"))
    assert failures == []


# -- 4 ----------------------------------------------------------------------


@pytest.mark.criterion(4)
@pytest.mark.parametrize(
    "axis",
    [AxisBasis("binomial", d=3), AxisBasis("stirling", m=3), AxisBasis("stirling_binomial", m=2, d=1)],
    ids=["binomial", "stirling", "stirling_binomial"],
)
def test_pop_is_exact_shift(axis):
    rng = random.Random(axis.kind)
    basis = tensor(axis)
    for _ in range(500):
        coeffs = [Q(rng.randint(0, 30), rng.randint(1, 6)) for _ in range(basis.dim)]
        g = CoeffVec.make(basis, coeffs)
        (p,) = tf_pop(g).gens
        for n in range(26):
            assert eval_basis(basis, p.coeffs, n) == eval_basis(basis, coeffs, n + 1)


# -- 5 ----------------------------------------------------------------------


@pytest.mark.criterion(5)
def test_verified_bounds_are_convex(corpus):
    eq = load_equation(corpus / "quadratic.eq")
    N = 30
    oracle = concrete_lfp_prefix(eq.expr, N)
    basis = binomial_basis(2)
    rng = random.Random(5)

    def bounds_oracle(cs):
        return all(eval_basis(basis, cs, n) >= oracle[n] for n in range(N + 1))

    def draw():
        while True:
            cs = [Q(rng.randint(0, 12), rng.randint(1, 4)) for _ in range(3)]
            if bounds_oracle(cs):
                return cs

    weights = [Q(k, 4) for k in range(5)]
    for _ in range(200):
        g, h = draw(), draw()
        for t in weights:
            mix = [t * x + (1 - t) * y for x, y in zip(g, h)]
            assert bounds_oracle(mix), (g, h, t)


# -- 6 ----------------------------------------------------------------------


@pytest.mark.criterion(6)
def test_reduce_merge_along_sum(corpus):
    eq = load_pw(corpus / "merge.pw")
    m = parse_map("x+y", eq.names)
    red = reduce_lfp(m, eq, N=30)
    assert red.table.tolist() == list(range(31))
    assert red.postfix
    gamma = red.concretize(15)
    oracle = pw_concrete_lfp(eq, 15)
    for x, y in product(range(16), repeat=2):
        assert gamma[(x, y)] == x + y
        assert oracle[(x, y)] == x + y


@pytest.mark.criterion(6)
def test_reduce_cli(corpus, capsys):
    code = cli.main(["reduce", str(corpus / "merge.pw"), "--map", "x+y", "--check-N", "15"])
    out = capsys.readouterr().out
    assert code == 0
    assert "concretization: f(x, y) <= x+y" in out
    assert "dominated, exact" in out


# -- 7 ----------------------------------------------------------------------


@pytest.mark.criterion(7)
def test_multiphase_loop(corpus):
    eq = load_pw(corpus / "loop.pw")
    t0 = time.perf_counter()
    res = analyze_pw(eq, WideningCfg())
    elapsed = time.perf_counter() - t0
    assert elapsed < 5.0
    assert [g.format(eq.names) for (g,) in res.trace[1].pieces] == ["0", "0", "1", "1"]
    final = [[g.format(eq.names) for g in gens] for gens in res.value.pieces]
    assert final[2] == ["n - i"]
    assert final[3] == ["i"]
    assert res.status is Status.EXACT_POSTFIX

    N = 12
    oracle = pw_concrete_lfp(eq, N)
    assert oracle_violations(eq, res.value, N) == []
    for p in oracle.points():
        assert res.value.at(eq, p) == oracle[p]


# -- 8 ----------------------------------------------------------------------


@pytest.fixture
def ode_params():
    return OdeParams(Itv(0, 2), Itv.point(2), Itv.point(1), Q(1, 5), Q(1, 100))


@pytest.mark.criterion(8)
def test_ode_certificate(ode_params):
    assert check_const_postfix(ode_params, Q(1, 2)).holds
    assert not check_const_postfix(ode_params, Q(1, 4)).holds
    low = check_const_postfix(ode_params, Q(1, 10))
    assert not low.holds and "outside" in low.reason


@pytest.mark.criterion(8)
def test_ode_simulations_stay_in_bound(ode_params):
    box = Itv(0, Q(1, 2))
    for seed in range(20):
        traj = simulate(ode_params, steps=500, seed=seed)
        assert len(traj) == 501
        assert all(v in box for v in traj), seed


@pytest.mark.criterion(8)
def test_ode_cli_exit_codes(capsys):
    base = ["ode-check", "--alpha", "0:2", "--beta", "2", "--gamma", "1", "--v0", "1/5"]
    assert cli.main(base + ["--M", "1/2"]) == 0
    assert cli.main(base + ["--M", "1/4"]) == 3
    assert cli.main(base + ["--M", "1/10"]) == 3
    capsys.readouterr()


# -- 9 ----------------------------------------------------------------------

LADDER = "0,1,2,4,6,8,16,32"


@pytest.mark.criterion(9)
def test_arith_geo_reaches_asymptote(corpus):
    eq = load_equation(corpus / "arith_geo.eq")
    ladder = tuple(Q(t) for t in LADDER.split(","))
    res = _run(eq, "affine", wcfg=WideningCfg(thresholds=ladder), early_exit=False)
    assert res.verified
    assert (0, 6) in _coeffs(res.bound)
    oracle = concrete_lfp_prefix(eq.expr, 10)
    assert oracle[3] == Q(23, 4)
    assert all(res.bound((n,)) >= oracle[n] for n in range(11))


@pytest.mark.criterion(9)
def test_arith_geo_cli(corpus, capsys):
    argv = ["analyze", str(corpus / "arith_geo.eq"), "--domain", "affine", "--no-early-exit", "--thresholds", LADDER]
    assert cli.main(argv) == 0
    assert "0*n + 6" in capsys.readouterr().out


# -- 10 ---------------------------------------------------------------------


def _sweep_box(arity):
    return 40 if arity == 1 else 12


@pytest.mark.criterion(10)
def test_corpus_is_large_enough(corpus):
    names = {p.stem for p in corpus.glob("*.eq")} | {p.stem for p in corpus.glob("*.pw")}
    assert len(names) >= 12
    assert {"nested", "quadratic", "arith_geo", "merge", "loop"} <= names


@pytest.mark.criterion(10)
@pytest.mark.parametrize("name", sorted(p.stem for p in CORPUS.glob("*.eq")))
def test_corpus_soundness_seq(corpus, name):
    eq = load_equation(corpus / f"{name}.eq")
    res = _run(eq)
    assert res.status is not Status.DIVERGED
    N = _sweep_box(eq.arity)
    oracle = concrete_lfp_prefix(eq.expr, N, arity=eq.arity)
    bad = [p for p in oracle.points() if res.bound(p) < oracle.values[p]]
    assert bad == []


@pytest.mark.criterion(10)
@pytest.mark.parametrize("name", ["loop", "merge"])
def test_corpus_soundness_pw(corpus, name):
    eq = load_pw(corpus / f"{name}.pw")
    res = analyze_pw(eq)
    assert oracle_violations(eq, res.value, 12) == []


@pytest.mark.criterion(10)
def test_arith_geo_ladder_result_is_sound(corpus):
    eq = load_equation(corpus / "arith_geo.eq")
    ladder = tuple(Q(t) for t in LADDER.split(","))
    res = _run(eq, "affine", wcfg=WideningCfg(thresholds=ladder), early_exit=False)
    oracle = concrete_lfp_prefix(eq.expr, 40)
    assert all(res.bound((n,)) >= oracle[n] for n in range(41))
    assert INF not in {c for g in res.bound for c in g.coeffs}
