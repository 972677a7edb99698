"""The most stringent case ``j = 1, l = 4a^2 - 1`` (shifted ``a``) and its limits.

With ``alpha = 1/a``:

* ``LHS = alpha^2 + (19/12) alpha^3 + o(alpha^3)``
* ``RHS = (e/2) alpha^3 + o(alpha^3)``, where the binomial product ratio tends
  to ``e`` (slowly)

The product ratio is evaluated for large ``a`` as ``exp(L0 - L1 + 2 L2 - L3 + 2 L4)``,
a sum of logs of near-one rationals, instead of differencing huge log-gammas.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from .kernel import (
    EXACT,
    DomainError,
    NumericMode,
    Sign,
    TrackedReal,
    _inflate,
    _lgamma_int,
    certify_sign,
    falling_factorial,
    log_binomial,
)
from .report import VerificationReport
from .threshold import SeriesResidual, converged_flags, CALIBRATION_A

Number = Fraction | TrackedReal

# product_ratio picks exact binomials up to this a when no mode is given
EXACT_A_LIMIT = 50
# L4 terms per numpy chunk; fixed so the summation order never changes
L4_CHUNK = 2_000_000
_U = 2.0**-53


def _need_a(a: int) -> None:
    if a < 2:
        raise DomainError(f"shifted a must be >= 2, got {a}")


# ---------------------------------------------------------------------------
# closed forms


def lhs_closed(a: int, mode: NumericMode = EXACT) -> Number:
    """``g/h - 1`` at ``j = a + 1`` for ``l = 4a^2 - 1`` as a ratio of falling factorials."""
    _need_a(a)
    if not mode.is_exact:
        return appendix_c_oracle(a, mode).expm1()
    A = 4 * a * a
    num = falling_factorial(A + a - 1, 2 * a + 1) * falling_factorial(A + a, 2 * a + 2)
    den = falling_factorial(A - a - 3, 2 * a + 1) * falling_factorial(A + 3 * a + 2, 2 * a + 2)
    return Fraction(num, den) - 1


def rhs_bracket(a: int) -> Fraction:
    A = 4 * a * a
    num = (32 * a * a * (a * a - 1) - 6) * Fraction(4 * a + 1, 4 * a)
    return num / ((A + 2) * (A + 1) * (A - 3) * (a + 1))


def rhs_closed(a: int, mode: NumericMode = EXACT) -> Number:
    _need_a(a)
    if mode.is_exact:
        return rhs_bracket(a) * product_ratio(a, EXACT)
    return TrackedReal.exact(rhs_bracket(a), mode.bits) * product_ratio(a, mode)


def gap_closed(a: int, mode: NumericMode = EXACT) -> Number:
    return lhs_closed(a, mode) - rhs_closed(a, mode)


def appendix_c_terms(a: int) -> list[Fraction]:
    """The factors whose product is ``1 + LHS``: two runs over ``i = 0..2a`` and a final one."""
    _need_a(a)
    A = 4 * a * a
    first = [Fraction(A + a - 1 - i, A - a - 3 - i) for i in range(2 * a + 1)]
    second = [Fraction(A + a - i, A + 3 * a + 2 - i) for i in range(2 * a + 1)]
    return first + second + [Fraction(A - a - 1, A + a + 1)]


def appendix_c_oracle(a: int, mode: NumericMode = NumericMode(53)) -> Number:
    """``log(1 + LHS)`` as a sum of logs.

    In exact mode the logarithm is not rational, so the product of the same
    factors (that is, ``1 + LHS``) is returned instead.
    """
    terms = appendix_c_terms(a)
    if mode.is_exact:
        return math.prod(terms, start=Fraction(1))
    return TrackedReal.fsum([TrackedReal.log1p_exact(t - 1, mode.bits) for t in terms], mode.bits)


# ---------------------------------------------------------------------------
# product ratio and the L-sums


def product_ratio_exact(a: int) -> Fraction:
    _need_a(a)
    A = 4 * a * a
    num = math.comb(8 * a * a - 1, A - 1) * math.comb(8 * a * a - 5, A - 1)
    den = math.comb(8 * a * a + 2 * a - 1, A + a - 1) * math.comb(8 * a * a - 2 * a - 5, A + a - 1)
    return Fraction(num, den)


def l4_count(a: int) -> int:
    return 4 * a * a - 3 * a - 4


@dataclass(frozen=True)
class LTerms:
    a: int
    L0: TrackedReal
    L1: TrackedReal
    L2: TrackedReal
    L3: TrackedReal
    L4: TrackedReal

    @property
    def combination(self) -> TrackedReal:
        """``L0 - L1 + 2 L2 - L3 + 2 L4``, the log of the product ratio."""
        return self.L0 - self.L1 + 2 * self.L2 - self.L3 + 2 * self.L4

    def constants(self) -> dict[str, TrackedReal]:
        """Each L-sum minus its linear part in ``a log 2``; tends to 0, 1/16, 9/16, 15/16, 7/16."""
        bits = self.L0.bits
        alog2 = TrackedReal.exact(self.a, bits) * TrackedReal.log_exact(2, bits)
        return {
            "L0": self.L0,
            "L1": self.L1 - alog2,
            "L2": self.L2 - 3 * alog2,
            "L3": self.L3 - 3 * alog2,
            "L4": self.L4 + alog2,
            "combination": self.combination,
        }


L_CONSTANTS = {
    "L0": Fraction(0),
    "L1": Fraction(1, 16),
    "L2": Fraction(9, 16),
    "L3": Fraction(15, 16),
    "L4": Fraction(7, 16),
    "combination": Fraction(1),
}


def _log1p_sum(qs: list[Fraction], bits: int) -> TrackedReal:
    return TrackedReal.fsum([TrackedReal.log1p_exact(q, bits) for q in qs], bits)


def _l4_float(a: int) -> TrackedReal:
    """``sum log1p(-a / (4a^2 + a + i - 1))`` for ``i = 1..4a^2-3a-4`` in float64.

    Each chunk is summed with ``math.fsum`` (exactly rounded), then the chunk
    sums are combined with ``math.fsum``.  The bound covers a few ulps per
    term for the division and ``log1p`` plus one rounding per chunk and one
    for the total.
    """
    n = l4_count(a)
    base = 4 * a * a + a - 1
    chunks, abs_sum = [], 0.0
    for start in range(1, n + 1, L4_CHUNK):
        i = np.arange(start, min(n, start + L4_CHUNK - 1) + 1, dtype=np.float64)
        t = np.log1p(-a / (base + i))
        chunks.append(math.fsum(t.tolist()))
        abs_sum += float(np.abs(t).sum())
    total = math.fsum(chunks)
    n_chunks = len(chunks)
    err = 8 * _U * abs_sum * (1 + 1e-6) + _U * sum(abs(c) for c in chunks) + _U * abs(total)
    err += n_chunks * 2.0**-1074
    return TrackedReal(mpmath.mpf(total), _inflate(mpmath.mpf(err), 53), 53)


def _l4_lgamma(a: int, bits: int) -> TrackedReal:
    """The same sum via the telescoped product ``ff(4a^2+N-1, N) / ff(4a^2+a+N-1, N)``."""
    n, A = l4_count(a), 4 * a * a
    return _lgamma_int(A + n, bits) - _lgamma_int(A, bits) - _lgamma_int(A + a + n, bits) + _lgamma_int(A + a, bits)


def l_terms(a: int, mode: NumericMode = NumericMode(53)) -> LTerms:
    """The five L-sums.  At 53 bits ``L4`` is a direct float64 sum; above, a log-gamma difference."""
    _need_a(a)
    if mode.is_exact:
        raise DomainError("L-sums are logarithms; use a log mode")
    bits, A = mode.bits, 4 * a * a
    F = Fraction
    L0 = _log1p_sum([F(-a, 8 * a * a + a + i - 4) for i in range(4)], bits)
    L1 = _log1p_sum([F(A + a - 1, A + i) for i in range(1, a + 1)], bits)
    L2 = _log1p_sum([F(A - 1, A - 3 * a + i - 4) for i in range(1, 3 * a + 1)], bits)
    L3 = _log1p_sum([F(A + a - 1, A - 3 * a + i - 4) for i in range(1, 3 * a + 1)], bits)
    L4 = _l4_float(a) if bits == 53 else _l4_lgamma(a, bits)
    return LTerms(a, L0, L1, L2, L3, L4)


def log_product_ratio(a: int, bits: int) -> TrackedReal:
    """Log of the product ratio.  53 bits uses the L-sums; more bits use log-binomials."""
    _need_a(a)
    if bits == 53:
        return l_terms(a, NumericMode(53)).combination
    A = 4 * a * a
    return (
        log_binomial(8 * a * a - 1, A - 1, bits)
        + log_binomial(8 * a * a - 5, A - 1, bits)
        - log_binomial(8 * a * a + 2 * a - 1, A + a - 1, bits)
        - log_binomial(8 * a * a - 2 * a - 5, A + a - 1, bits)
    )


def product_ratio(a: int, mode: NumericMode | None = None) -> Number:
    """``C(8a^2-1, 4a^2-1) C(8a^2-5, 4a^2-1) / (C(8a^2+2a-1, 4a^2+a-1) C(8a^2-2a-5, 4a^2+a-1))``.

    ``mode=None`` is exact for ``a <= 50`` and 53-bit L-sums above.
    """
    _need_a(a)
    if mode is None:
        mode = EXACT if a <= EXACT_A_LIMIT else NumericMode(53)
    if mode.is_exact:
        return product_ratio_exact(a)
    return log_product_ratio(a, mode.bits).exp()


# ---------------------------------------------------------------------------
# limits

REMARK_D1 = {10: 3.2737, 100: 2.7665, 1000: 2.7230, 5000: 2.7189}
REMARK_D1_TOL = 5e-5
SLOW_A = 5000

LIMIT_BITS = 113
E_HALF = "e/2"


def _residual_values(name: str, a: int, bits: int) -> mpmath.mpf:
    mode = NumericMode(bits)
    with mpmath.workprec(bits):
        if name == "a2_lhs":
            return lhs_closed(a, mode).value * a**2
        if name == "a3_lhs_minus_alpha2":
            return (lhs_closed(a, mode).value - mpmath.mpf(1) / a**2) * a**3
        if name == "a3_rhs":
            return rhs_closed(a, mode).value * a**3
        if name == "gap_over_alpha2":
            return gap_closed(a, mode).value * a**2
    raise DomainError(f"unknown residual {name!r}")


LIMIT_TARGETS: dict[str, Fraction | str] = {
    "a2_lhs": Fraction(1),
    "a3_lhs_minus_alpha2": Fraction(19, 12),
    "a3_rhs": E_HALF,
    "gap_over_alpha2": Fraction(1),
}


def target_value(target: Fraction | str) -> float:
    return float(mpmath.e / 2) if target == E_HALF else float(target)


def limit_series(name: str, a_values: list[int], bits: int = LIMIT_BITS) -> list[SeriesResidual]:
    """One scaled residual along ``a_values``; convergence is first order in ``1/a``."""
    target = LIMIT_TARGETS[name]
    values = [_residual_values(name, a, bits) for a in a_values]
    tv = target_value(target)
    cal = abs(float(_residual_values(name, CALIBRATION_A, bits)) - tv)
    flags = converged_flags(values, a_values, tv, 1, cal)
    return [SeriesResidual(a, float(v), target, ok, band) for a, v, (ok, band) in zip(a_values, values, flags)]


def limit_suite(a_values: list[int], mode: NumericMode = NumericMode(LIMIT_BITS)) -> dict[str, list[SeriesResidual]]:
    if list(a_values) != sorted(set(a_values)) or min(a_values) < 10:
        raise DomainError("a_values must be strictly increasing with min >= 10")
    bits = LIMIT_BITS if mode.is_exact else mode.bits
    return {name: limit_series(name, list(a_values), bits) for name in LIMIT_TARGETS}


def claim_d1_series(a_values: list[int], mode: NumericMode = NumericMode(53)) -> dict[str, list[SeriesResidual]]:
    """L-sum constants along ``a_values``, with monotone-shrink flags (band from ``a = 800``)."""
    terms = [l_terms(a, mode).constants() for a in a_values]
    cal_terms = l_terms(CALIBRATION_A, mode).constants()
    out = {}
    for name, target in L_CONSTANTS.items():
        values = [float(t[name]) for t in terms]
        cal = abs(float(cal_terms[name]) - float(target))
        flags = converged_flags(values, list(a_values), target, 1, cal)
        out[name] = [SeriesResidual(a, v, target, ok, band) for a, v, (ok, band) in zip(a_values, values, flags)]
    return out


def decisive_constant_check(bits: int = 53) -> VerificationReport:
    """``19/12 > e/2`` with ``e/2`` as a certified enclosure."""
    rep = VerificationReport("decisive_constant", f"log{bits}")
    e_half = TrackedReal.exact(1, bits).exp() / 2
    diff = TrackedReal.exact(Fraction(19, 12), bits) - e_half
    s = certify_sign(diff)
    rep.check("19/12_exceeds_e/2").record(None if s is Sign.INDETERMINATE else s is Sign.POSITIVE)
    rep.observations["margin"] = float(diff)
    return rep


def remark_d1_check(a_values: list[int]) -> VerificationReport:
    """Product ratio against the published 4-decimal values and monotone approach to ``e``."""
    rep = VerificationReport("remark_d1", "log53")
    vals = {}
    c = rep.check("matches_published")
    for a in a_values:
        pr = product_ratio(a, NumericMode(53))
        vals[a] = pr
        if a in REMARK_D1:
            c.record(abs(float(pr) - REMARK_D1[a]) <= REMARK_D1_TOL, a=a, value=float(pr), published=REMARK_D1[a])
    c = rep.check("decreasing_toward_e")
    ordered = sorted(vals)
    e = TrackedReal.exact(1, 53).exp()
    for k, a in enumerate(ordered):
        s = certify_sign(vals[a] - e)
        c.record(None if s is Sign.INDETERMINATE else s is Sign.POSITIVE, a=a)
        if k:
            s = certify_sign(vals[ordered[k - 1]] - vals[a])
            c.record(None if s is Sign.INDETERMINATE else s is Sign.POSITIVE, a=a)
    rep.observations["values"] = {a: float(v) for a, v in vals.items()}
    return rep
