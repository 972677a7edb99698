"""The sequences g_l, h_l, d_l and the probability function Q_l.

For ``l >= 6`` and ``tau = l // 3`` the functions are defined on
``j = 0 .. tau``::

    g_l(j) = prod_{i=0}^{2j-1} (l+j-i)^2 / ((l+j-i)^2 - 4 j^2)
    h_l(j) = (l + j) / (l - j)
    d_l(j) = g_l(j) - h_l(j)

with ``g_l(0) = h_l(0) = 1``.  Every public function takes a
:class:`~seqcert.kernel.NumericMode`; exact mode returns ``Fraction`` and log
mode returns :class:`~seqcert.kernel.TrackedReal`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

import mpmath

from .kernel import (
    EXACT,
    DomainError,
    NumericMode,
    TrackedReal,
    binomial_exact,
    falling_factorial,
    log_binomial,
)

Number = Union[Fraction, TrackedReal]

# above this 4l, Q defaults to log-space weights
Q_EXACT_LIMIT = 20000


def tau(l: int) -> int:
    return l // 3


def threshold_formula(l: int) -> int:
    """``floor(sqrt(l) / 2)`` with integer arithmetic only."""
    return math.isqrt(l) // 2


@dataclass(frozen=True)
class EvalPoint:
    l: int
    j: int

    def __post_init__(self) -> None:
        if self.l < 6:
            raise DomainError(f"l must be >= 6, got {self.l}")
        if not 0 <= self.j <= self.l // 3:
            raise DomainError(f"j must lie in 0..{self.l // 3} for l={self.l}, got {self.j}")

    @property
    def tau(self) -> int:
        return self.l // 3


@dataclass(frozen=True)
class FuncValue:
    g: Number
    h: Number
    d: Number
    mode: NumericMode


def _point(point: EvalPoint | tuple[int, int]) -> EvalPoint:
    return point if isinstance(point, EvalPoint) else EvalPoint(*point)


# ---------------------------------------------------------------------------
# g


def _g_exact(l: int, j: int) -> Fraction:
    num = math.prod((l + j - i) ** 2 for i in range(2 * j))
    den = math.prod((l + j - i) ** 2 - 4 * j * j for i in range(2 * j))
    return Fraction(num, den)


def log_g(l: int, j: int, bits: int = 53) -> TrackedReal:
    """``log g_l(j)`` as a sum of ``log1p`` of small exact rationals."""
    EvalPoint(l, j)
    four_j2 = 4 * j * j
    terms = [
        TrackedReal.log1p_exact(Fraction(four_j2, (l + j - i) ** 2 - four_j2), bits)
        for i in range(2 * j)
    ]
    return TrackedReal.fsum(terms, bits)


def g(point: EvalPoint | tuple[int, int], mode: NumericMode = EXACT) -> Number:
    p = _point(point)
    if mode.is_exact:
        return _g_exact(p.l, p.j)
    return log_g(p.l, p.j, mode.bits).exp()


# ---------------------------------------------------------------------------
# h, d


def log_h(l: int, j: int, bits: int = 53) -> TrackedReal:
    EvalPoint(l, j)
    return TrackedReal.log1p_exact(Fraction(2 * j, l - j), bits)


def h(point: EvalPoint | tuple[int, int], mode: NumericMode = EXACT) -> Number:
    p = _point(point)
    value = Fraction(p.l + p.j, p.l - p.j)
    if mode.is_exact:
        return value
    return TrackedReal.exact(value, mode.bits)


def log_gh_ratio(l: int, j: int, bits: int = 53) -> TrackedReal:
    """``log(g_l(j) / h_l(j))``; its sign is the sign of ``d_l(j)``."""
    return log_g(l, j, bits) - log_h(l, j, bits)


def d(point: EvalPoint | tuple[int, int], mode: NumericMode = EXACT) -> Number:
    p = _point(point)
    if mode.is_exact:
        return _g_exact(p.l, p.j) - Fraction(p.l + p.j, p.l - p.j)
    # d = h * expm1(log g - log h) avoids subtracting two nearly equal values
    return h(p, mode) * log_gh_ratio(p.l, p.j, mode.bits).expm1()


def evaluate(point: EvalPoint | tuple[int, int], mode: NumericMode = EXACT) -> FuncValue:
    p = _point(point)
    gv, hv = g(p, mode), h(p, mode)
    return FuncValue(gv, hv, gv - hv if mode.is_exact else d(p, mode), mode)


# ---------------------------------------------------------------------------
# ratio and sequences


def g_ratio(l: int, j: int) -> Fraction:
    """``g_l(j+1) / g_l(j)`` in closed form, for ``0 <= j <= tau - 1``."""
    if l < 6 or not 0 <= j <= l // 3 - 1:
        raise DomainError(f"g_ratio needs 0 <= j <= tau-1, got l={l}, j={j}")
    num = (l + j + 1) ** 3 * (l - j) ** 3
    den = falling_factorial(l + 3 * j + 3, 3) * falling_factorial(l - 3 * j, 3)
    return Fraction(num, den)


def g_sequence(l: int, mode: NumericMode = EXACT) -> list[Number]:
    """``[g_l(0), ..., g_l(tau)]`` built by telescoping :func:`g_ratio`."""
    if l < 6:
        raise DomainError("l must be >= 6")
    ratios = [g_ratio(l, j) for j in range(l // 3)]
    if mode.is_exact:
        out = [Fraction(1)]
        for r in ratios:
            out.append(out[-1] * r)
        return out
    bits = mode.bits
    logs = [TrackedReal(mpmath.mpf(0), mpmath.mpf(0), bits)]
    for r in ratios:
        logs.append(logs[-1] + TrackedReal.log_exact(r, bits))
    return [x.exp() for x in logs]


def h_sequence(l: int, mode: NumericMode = EXACT) -> list[Number]:
    return [h((l, j), mode) for j in range(l // 3 + 1)]


def f_ab(a, b, x):
    """``1 / ((a + b/x)^2 - 1)`` on ``0 < x < b / (1 - a)``, for ``0 <= a < 1``, ``b > 0``."""
    if not 0 <= a < 1 or b <= 0:
        raise DomainError("f_ab needs 0 <= a < 1 and b > 0")
    if all(isinstance(v, (int, Fraction)) for v in (a, b, x)):
        a, b, x = Fraction(a), Fraction(b), Fraction(x)
    if not 0 < x < b / (1 - a):
        raise DomainError(f"x={x} outside (0, {b / (1 - a)})")
    return 1 / ((a + b / x) ** 2 - 1)


# ---------------------------------------------------------------------------
# Q


def q_weight(l: int, j: int) -> Fraction:
    """Unnormalised probability weight of ``J = j``."""
    m = l + j
    return Fraction(j * (l - j), m * m) * (
        binomial_exact(2 * m - 1, m - 1) * binomial_exact(4 * l - 1 - 2 * m, m - 1)
    )


def log_q_weight(l: int, j: int, bits: int) -> TrackedReal:
    m = l + j
    lead = TrackedReal.exact(Fraction(j * (l - j), m * m), bits).log()
    return lead + log_binomial(2 * m - 1, m - 1, bits) + log_binomial(4 * l - 1 - 2 * m, m - 1, bits)


@lru_cache(maxsize=256)
def _q_exact(l: int) -> tuple[Fraction, ...]:
    weights = [q_weight(l, j) for j in range(1, l // 3 + 1)]
    total = sum(weights, Fraction(0))
    return tuple(w / total for w in weights)


@lru_cache(maxsize=64)
def _q_log(l: int, bits: int) -> tuple[TrackedReal, ...]:
    logs = [log_q_weight(l, j, bits) for j in range(1, l // 3 + 1)]
    top = max(logs, key=lambda t: t.value)
    shift = TrackedReal(top.value, mpmath.mpf(0), bits)
    shifted = [t - shift for t in logs]
    log_total = TrackedReal.fsum([t.exp() for t in shifted], bits).log()
    return tuple((t - log_total).exp() for t in shifted)


def q_distribution(l: int, mode: NumericMode | None = None) -> list[Number]:
    """``[Q_l(1), ..., Q_l(tau)]``; ``mode=None`` picks exact when ``4l <= 20000``."""
    if l < 6:
        raise DomainError("l must be >= 6")
    if mode is None:
        mode = EXACT if 4 * l <= Q_EXACT_LIMIT else NumericMode(53)
    if mode.is_exact:
        return list(_q_exact(l))
    return list(_q_log(l, mode.bits))


def Q(l: int, j: int, mode: NumericMode | None = None) -> Number:
    if l < 6 or not 1 <= j <= l // 3:
        raise DomainError(f"Q needs 1 <= j <= tau, got l={l}, j={j}")
    return q_distribution(l, mode)[j - 1]


# ---------------------------------------------------------------------------
# expectation


@dataclass(frozen=True)
class Expectation:
    """``E[d(J)]`` and the conditional pieces around the threshold ``a``."""

    l: int
    a: int
    total: Number
    cond_positive: Number  # E[d | J > a]
    cond_negative: Number  # E[-d | J <= a]
    p_low: Number  # P[J <= a]
    p_high: Number  # P[J > a]
    mode: NumericMode


def d_sequence(l: int, mode: NumericMode = EXACT) -> list[Number]:
    """``[d_l(0), ..., d_l(tau)]``."""
    if mode.is_exact:
        return [gv - hv for gv, hv in zip(g_sequence(l), h_sequence(l))]
    return [d((l, j), mode) for j in range(l // 3 + 1)]


def expected_d(l: int, mode: NumericMode = EXACT) -> Expectation:
    if l < 9:
        raise DomainError("expected_d needs l >= 9; l = 6..8 use the reduced pairwise check")
    a = threshold_formula(l)
    ds = d_sequence(l, mode)[1:]
    qs = q_distribution(l, mode)
    prods = [dv * qv for dv, qv in zip(ds, qs)]
    if mode.is_exact:
        low = sum(prods[:a], Fraction(0))
        high = sum(prods[a:], Fraction(0))
        p_low = sum(qs[:a], Fraction(0))
    else:
        low = TrackedReal.fsum(prods[:a], mode.bits)
        high = TrackedReal.fsum(prods[a:], mode.bits)
        p_low = TrackedReal.fsum(qs[:a], mode.bits)
    p_high = 1 - p_low
    return Expectation(
        l=l,
        a=a,
        total=low + high,
        cond_positive=high / p_high,
        cond_negative=-low / p_low,
        p_low=p_low,
        p_high=p_high,
        mode=mode,
    )
