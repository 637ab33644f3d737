"""Abstract Kleene iteration with widening and postfixpoint certificates.

The iteration starts from the zero bound and applies the abstract operator
generator by generator.  Termination comes from a stability widening:
each new generator is paired with its nearest predecessor, coordinates
that keep growing are pushed up a threshold ladder, and the number of
generators is capped by joining close pairs.

A bound ``A`` is accepted when ``step(A)`` is at least as precise as
``A`` in the abstract order.  Every transfer function over-approximates
its construct, so this certifies ``Phi(gamma A) <= gamma A`` and hence
that ``gamma A`` bounds the least solution.  When that check fails only
a sampled comparison is available, and the result says so.
"""

from __future__ import annotations

import enum
import logging
import os
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Optional

from .core_order import INF, CoeffVec, GenSet, dominates, join, leq_abs, normalize
from .domains import DomainCfg, interpret
from .seq_lang import UNDEF, SeqExpr, eval_at

log = logging.getLogger(__name__)

DEFAULT_THRESHOLDS = (
    Fraction(0), Fraction(1), Fraction(2), Fraction(4), Fraction(8),
    Fraction(16), Fraction(32), INF,
)


class Status(enum.Enum):
    EXACT_POSTFIX = "ExactPostfix"
    WIDENED_POSTFIX = "WidenedPostfix"
    SAMPLED_ONLY = "SampledOnly"
    DIVERGED = "Diverged"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class WideningCfg:
    max_gens: int = 4
    thresholds: tuple = DEFAULT_THRESHOLDS
    delay: int = 3

    def __post_init__(self):
        t = tuple(self.thresholds)
        if not t or t[-1] != INF:
            t = t + (INF,)
        if any(a >= b for a, b in zip(t, t[1:])):
            raise ValueError("thresholds must be strictly ascending")
        object.__setattr__(self, "thresholds", t)
        if self.delay < 0:
            raise ValueError("delay must be nonnegative")
        if self.max_gens < 1:
            raise ValueError("max_gens must be at least 1")

    def lift(self, value):
        return next(t for t in self.thresholds if t >= value)


@dataclass
class WideningHistory:
    """Consecutive-increase counters, keyed by the generator they belong to."""

    counters: dict = field(default_factory=dict)
    lifted: bool = False


def _dist(x: tuple, y: tuple):
    best = Fraction(0)
    for a, b in zip(x, y):
        if a == b:
            continue
        if a == INF or b == INF:
            return INF
        best = max(best, abs(a - b))
    return best


def _key(v: tuple):
    return tuple((1, 0) if c == INF else (0, c) for c in v)


def stability_widen(prev, cand, cfg: WideningCfg, history: WideningHistory, coords, rebuild, prune):
    """Threshold lifting and generator capping on abstract vectors.

    ``coords`` maps an item to its coordinate tuple, ``rebuild`` turns a
    tuple back into an item and ``prune`` removes redundant items from a
    list.  Every output item is coordinate-wise above the candidate it
    came from, so the upper-bound property of ``cand`` is preserved.
    """
    prev_coords = [coords(p) for p in prev]
    counters = {}
    lifted = []
    for g in cand:
        gv = coords(g)
        pv = min(prev_coords, key=lambda h: (_dist(gv, h), _key(h)))
        old = history.counters.get(pv, (0,) * len(gv))
        out = list(gv)
        counts = []
        for j, (x, y) in enumerate(zip(gv, pv)):
            k = old[j] + 1 if x > y else 0
            if x > y and k >= cfg.delay:
                v = cfg.lift(x)
                if v != x:
                    history.lifted = True
                out[j] = v
            counts.append(k)
        h = rebuild(tuple(out))
        counters[coords(h)] = tuple(counts)
        lifted.append(h)
    gens = prune(lifted)
    while len(gens) > cfg.max_gens:
        vs = [coords(g) for g in gens]
        i, j = min(
            ((i, j) for i in range(len(gens)) for j in range(i + 1, len(gens))),
            key=lambda ij: (_dist(vs[ij[0]], vs[ij[1]]), ij),
        )
        merged = rebuild(tuple(max(a, b) for a, b in zip(vs[i], vs[j])))
        zero = (0,) * len(vs[i])
        counters[coords(merged)] = tuple(
            max(a, b) for a, b in zip(counters.get(vs[i], zero), counters.get(vs[j], zero))
        )
        gens = prune([g for k, g in enumerate(gens) if k not in (i, j)] + [merged])
        history.lifted = True
    history.counters = {
        coords(g): counters.get(coords(g), (0,) * len(coords(g))) for g in gens
    }
    return gens


def widen(prev: GenSet, next_: GenSet, cfg: WideningCfg = WideningCfg(), history=None) -> GenSet:
    """Upper bound of ``prev`` and ``next_`` that forces the iteration to settle.

    Candidates are the join of both values; each is paired with the
    nearest generator of ``prev`` (L-infinity distance on parameters), and
    a coordinate that has grown for ``delay`` consecutive rounds jumps to
    the next threshold.  Excess generators are merged by coordinate max.
    """
    if history is None:
        history = WideningHistory()
    basis = prev.basis
    gens = stability_widen(
        prev.gens,
        join(prev, next_).gens,
        cfg,
        history,
        coords=lambda g: g.coeffs,
        rebuild=lambda v: CoeffVec.make(basis, v),
        prune=lambda gs: list(normalize(GenSet(basis, tuple(gs))).gens),
    )
    return GenSet(basis, tuple(gens))


def abstract_step(e: SeqExpr, A: GenSet, cfg: DomainCfg) -> GenSet:
    out = []
    for g in A:
        out.extend(interpret(e, g, cfg).gens)
    return GenSet.of(cfg.basis, out)


@dataclass
class Report:
    violations: list
    N: int

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _sampled(e: SeqExpr, A: GenSet, N: int, upper: bool) -> Report:
    arity = A.basis.arity

    def f(p):
        return A(p)

    bad = []
    for point in product(range(N + 1), repeat=arity):
        lhs = eval_at(e, f, point)
        rhs = A(point)
        if lhs is UNDEF:
            continue
        if (lhs > rhs) if upper else (rhs > lhs):
            bad.append((point if arity > 1 else point[0], lhs, rhs))
    return Report(bad, N)


def verify_postfix_sampled(e: SeqExpr, A: GenSet, N: int = 50) -> Report:
    """All points of the box where ``Phi(gamma A) > gamma A``."""
    return _sampled(e, A, N, upper=True)


def verify_prefix_sampled(e: SeqExpr, A: GenSet, N: int = 50) -> Report:
    """All points of the box where ``gamma A > Phi(gamma A)``."""
    return _sampled(e, A, N, upper=False)


def certify_postfix(e: SeqExpr, A: GenSet, cfg: DomainCfg) -> bool:
    """Abstract certificate ``step(A) <= A``; sound in every basis."""
    return leq_abs(abstract_step(e, A, cfg), A)


def verify_postfix_exact_affine(e: SeqExpr, A: GenSet) -> bool:
    basis = A.basis
    if not basis.is_univariate or basis.axes[0].kind != "affine":
        raise ValueError("exact verification is only available in the affine basis")
    return certify_postfix(e, A, DomainCfg(basis, 1))


@dataclass
class AnalysisResult:
    bound: GenSet
    status: Status
    iterations: int
    trace: Optional[list] = None
    early_exit: bool = False
    widened: bool = False
    sampled: Optional[Report] = None

    @property
    def verified(self) -> bool:
        return self.status in (Status.EXACT_POSTFIX, Status.WIDENED_POSTFIX)


def _trace_enabled(trace) -> bool:
    if trace is not None:
        return trace
    return os.environ.get("RECBOUND_TRACE", "") not in ("", "0")


def analyze(
    e: SeqExpr,
    dcfg: DomainCfg,
    wcfg: WideningCfg = WideningCfg(),
    max_iters: int = 50,
    early_exit: bool = True,
    trace: Optional[bool] = None,
    sample_N: int = 50,
) -> AnalysisResult:
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    basis = dcfg.basis
    A = GenSet.zero(basis)
    history = WideningHistory()
    tr = [A] if _trace_enabled(trace) else None
    bound = None
    exited = False
    it = 0
    while it < max_iters:
        it += 1
        images = {g: interpret(e, g, dcfg) for g in A}
        if early_exit:
            fixed = [g for g in A if any(dominates(s, g) for s in images[g])]
            if fixed:
                bound = GenSet(basis, (fixed[0],))
                exited = True
                break
        nxt = GenSet.of(basis, (s for img in images.values() for s in img))
        if leq_abs(nxt, A):
            bound = A
            break
        A = widen(A, nxt, wcfg, history)
        log.debug("iteration %d: %s", it, A)
        if tr is not None:
            tr.append(A)
    if bound is None:
        bound = A
    if tr is not None and (not tr or tr[-1] != bound):
        tr.append(bound)

    if certify_postfix(e, bound, dcfg):
        status = Status.WIDENED_POSTFIX if history.lifted else Status.EXACT_POSTFIX
        return AnalysisResult(bound, status, it, tr, exited, history.lifted)
    report = verify_postfix_sampled(e, bound, sample_N)
    status = Status.SAMPLED_ONLY if report.ok else Status.DIVERGED
    return AnalysisResult(bound, status, it, tr, exited, history.lifted, report)
