"""Interval bounds for the Euler scheme of ``v' = -alpha v^2 - beta v + gamma``.

With step ``eps`` the scheme is the operator

    v(t) = v(t - eps) * ((1 - eps*beta) - eps*alpha * v(t - eps)) + eps*gamma

on functions of time, with ``alpha``, ``beta`` and ``gamma`` ranging over
intervals.  A constant interval ``[0, M]`` that contains ``v0`` and is mapped
into itself is a postfixpoint, hence an enclosure of every trajectory of the
discretised system for all time.  The certificate is about the scheme at the
given step size, not about the differential equation itself.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional


@dataclass(frozen=True)
class Itv:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"improper interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> "Itv":
        return cls(x, x)

    @classmethod
    def parse(cls, text: str) -> "Itv":
        """``"1/5"`` is a point, ``"0:2"`` an interval."""
        lo, sep, hi = text.partition(":")
        return cls(Fraction(lo), Fraction(hi if sep else lo))

    def __contains__(self, x) -> bool:
        if isinstance(x, Itv):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    def __add__(self, other: "Itv") -> "Itv":
        return itv_add(self, other)

    def __mul__(self, other: "Itv") -> "Itv":
        return itv_mul(self, other)

    def __str__(self) -> str:
        return f"[{_fmt(self.lo)}, {_fmt(self.hi)}]"


def _fmt(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def itv_add(a: Itv, b: Itv) -> Itv:
    return Itv(a.lo + b.lo, a.hi + b.hi)


def itv_mul(a: Itv, b: Itv) -> Itv:
    ps = (a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi)
    return Itv(min(ps), max(ps))


def itv_scale(k, a: Itv) -> Itv:
    k = Fraction(k)
    return Itv(min(k * a.lo, k * a.hi), max(k * a.lo, k * a.hi))


@dataclass(frozen=True)
class OdeParams:
    alpha: Itv
    beta: Itv
    gamma: Itv
    v0: Fraction
    eps: Fraction

    def __post_init__(self):
        object.__setattr__(self, "v0", Fraction(self.v0))
        object.__setattr__(self, "eps", Fraction(self.eps))
        for name in ("alpha", "beta", "gamma"):
            if getattr(self, name).lo < 0:
                raise ValueError(f"{name} must be nonnegative")
        if self.eps <= 0:
            raise ValueError("eps must be positive")

    def with_eps(self, eps) -> "OdeParams":
        return OdeParams(self.alpha, self.beta, self.gamma, self.v0, eps)


class StepSizeError(ValueError):
    pass


def euler_step_bound(p: OdeParams, cand: Itv) -> Itv:
    """Image of ``cand`` under one interval Euler step."""
    if 1 - p.eps * p.beta.hi < 0:
        raise StepSizeError(f"eps = {p.eps} is too large for beta up to {p.beta.hi}")
    one = Itv.point(1)
    damp = itv_add(one, itv_scale(-p.eps, p.beta))
    factor = itv_add(damp, itv_mul(itv_scale(-p.eps, p.alpha), cand))
    return itv_add(itv_mul(cand, factor), itv_scale(p.eps, p.gamma))


@dataclass(frozen=True)
class Certificate:
    """Outcome of the constant-bound check.

    ``holds`` covers the given step; ``rechecked`` lists the smaller steps
    at which the same interval was re-verified.  Re-checking is a
    heuristic, not a proof for all smaller steps.
    """

    holds: bool
    M: Fraction
    image: Optional[Itv]
    rechecked: tuple = ()
    reason: str = ""

    def __bool__(self) -> bool:
        return self.holds

    def describe(self) -> str:
        if not self.holds:
            return f"rejected: {self.reason}"
        steps = ", ".join(_fmt(e) for e in self.rechecked)
        return (
            f"accepted: [0, {_fmt(self.M)}] is invariant under the Euler step (image {self.image}); "
            f"this bounds the discretised system for all time; re-checked at eps = {steps}"
        )


def _invariant(p: OdeParams, box: Itv) -> tuple:
    img = euler_step_bound(p, box)
    return img in box, img


def check_const_postfix(p: OdeParams, M) -> Certificate:
    M = Fraction(M)
    if M <= 0:
        raise ValueError("M must be positive")
    box = Itv(0, M)
    if p.v0 not in box:
        return Certificate(False, M, None, reason=f"v0 = {_fmt(p.v0)} lies outside [0, {_fmt(M)}]")
    ok, img = _invariant(p, box)
    if not ok:
        return Certificate(False, M, img, reason=f"step image {img} leaves [0, {_fmt(M)}]")
    rechecked = []
    for k in (2, 4):
        eps = p.eps / k
        if not _invariant(p.with_eps(eps), box)[0]:
            return Certificate(
                False, M, img, tuple(rechecked), reason=f"not invariant at eps = {_fmt(eps)}"
            )
        rechecked.append(eps)
    return Certificate(True, M, img, tuple(rechecked))


SIM_DENOMINATOR = 2**64


def _down(x: Fraction) -> Fraction:
    return Fraction(math.floor(x * SIM_DENOMINATOR), SIM_DENOMINATOR)


def _up(x: Fraction) -> Fraction:
    return Fraction(math.ceil(x * SIM_DENOMINATOR), SIM_DENOMINATOR)


def _sample(itv: Itv, rng: random.Random) -> Fraction:
    if itv.lo == itv.hi:
        return itv.lo
    k = rng.randint(0, 64)
    return itv.lo + (itv.hi - itv.lo) * Fraction(k, 64)


def simulate(p: OdeParams, steps: int = 500, seed: int = 0) -> list:
    """Enclosures of one Euler trajectory with parameters redrawn each step.

    The state is kept as an interval whose endpoints are rounded outward to
    multiples of ``2**-64`` so the rationals stay small.
    """
    rng = random.Random(seed)
    v = Itv.point(p.v0)
    out = [v]
    for _ in range(steps):
        a, b, g = (_sample(x, rng) for x in (p.alpha, p.beta, p.gamma))
        pt = OdeParams(Itv.point(a), Itv.point(b), Itv.point(g), p.v0, p.eps)
        img = euler_step_bound(pt, v)
        v = Itv(_down(img.lo), _up(img.hi))
        out.append(v)
    return out
