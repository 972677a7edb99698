"""Pairwise inequalities between ``d(j)Q(j)`` terms and the gap table.

For ``1 <= j <= a`` and ``j + a + 1 <= tau(l)`` the pairwise inequality

    d(j+a+1) Q(j+a+1) > -d(j) Q(j)

is equivalent to ``lhs_41 > rhs_41`` where

    lhs_41 = g(j+a+1)/h(j+a+1) - 1
    rhs_41 = (1 - g(j)/h(j)) * j(j+l+a+1)/((j+l)(j+a+1)) * B

and ``B`` is a ratio of four central-ish binomial coefficients.  The gap is
``lhs_41 - rhs_41``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import ROUND_DOWN, ROUND_HALF_EVEN, Decimal
from fractions import Fraction

import mpmath

from .functions import (
    Number,
    Q,
    _g_exact,
    d,
    d_sequence,
    expected_d,
    log_g,
    log_h,
    q_distribution,
    tau,
    threshold_formula,
)
from .kernel import (
    EXACT,
    DomainError,
    NumericMode,
    Sign,
    TrackedReal,
    certify_sign,
    log_binomial,
)
from .report import VerificationReport, combine, sweep

TABLE_DECIMALS = 6


def _check_indices(a: int, j: int, l: int) -> None:
    if l < 6:
        raise DomainError("l must be >= 6")
    if not 1 <= j <= a:
        raise DomainError(f"need 1 <= j <= a, got a={a}, j={j}")
    if j + a + 1 > tau(l):
        raise DomainError(f"j + a + 1 = {j + a + 1} exceeds tau({l}) = {tau(l)}")


def _log_gh(l: int, j: int, bits: int) -> TrackedReal:
    return log_g(l, j, bits) - log_h(l, j, bits)


def lhs_41(a: int, j: int, l: int, mode: NumericMode = EXACT) -> Number:
    """``g(j+a+1)/h(j+a+1) - 1``."""
    _check_indices(a, j, l)
    k = j + a + 1
    if mode.is_exact:
        return _g_exact(l, k) * Fraction(l - k, l + k) - 1
    return _log_gh(l, k, mode.bits).expm1()


def binomial_ratio(a: int, j: int, l: int) -> Fraction:
    num = math.comb(2 * l - 1 + 2 * j, l - 1 + j) * math.comb(2 * l - 1 - 2 * j, l - 1 + j)
    den = math.comb(2 * l + 1 + 2 * a + 2 * j, l + a + j) * math.comb(2 * l - 3 - 2 * a - 2 * j, l + a + j)
    return Fraction(num, den)


def log_binomial_ratio(a: int, j: int, l: int, bits: int) -> TrackedReal:
    return (
        log_binomial(2 * l - 1 + 2 * j, l - 1 + j, bits)
        + log_binomial(2 * l - 1 - 2 * j, l - 1 + j, bits)
        - log_binomial(2 * l + 1 + 2 * a + 2 * j, l + a + j, bits)
        - log_binomial(2 * l - 3 - 2 * a - 2 * j, l + a + j, bits)
    )


def rhs_41(a: int, j: int, l: int, mode: NumericMode = EXACT) -> Number:
    _check_indices(a, j, l)
    lead = Fraction(j * (j + l + a + 1), (j + l) * (j + a + 1))
    if mode.is_exact:
        one_minus = 1 - _g_exact(l, j) * Fraction(l - j, l + j)
        return one_minus * lead * binomial_ratio(a, j, l)
    bits = mode.bits
    one_minus = -_log_gh(l, j, bits).expm1()
    return one_minus * TrackedReal.exact(lead, bits) * log_binomial_ratio(a, j, l, bits).exp()


def gap(a: int, j: int, l: int, mode: NumericMode = EXACT) -> Number:
    return lhs_41(a, j, l, mode) - rhs_41(a, j, l, mode)


def _sign(x: Number) -> Sign:
    if isinstance(x, TrackedReal):
        return certify_sign(x)
    return Sign.POSITIVE if x > 0 else Sign.NEGATIVE if x < 0 else Sign.INDETERMINATE


def _ok(x: Number) -> bool | None:
    s = _sign(x)
    return None if s is Sign.INDETERMINATE else s is Sign.POSITIVE


# ---------------------------------------------------------------------------
# gap table at l = 4(a+1)^2 - 1


def round_decimal(q: Fraction, places: int = TABLE_DECIMALS, rounding=ROUND_HALF_EVEN) -> Decimal:
    """Round an exact rational to ``places`` decimals without passing through a float."""
    scaled = q * 10**places
    floor = scaled.numerator // scaled.denominator
    rem = scaled - floor
    if rounding == ROUND_DOWN:
        n = floor if q >= 0 else -((-scaled).numerator // (-scaled).denominator)
    elif rem > Fraction(1, 2) or (rem == Fraction(1, 2) and floor % 2 == 1):
        n = floor + 1
    else:
        n = floor
    return Decimal(n).scaleb(-places)


@dataclass
class GapTable:
    """``gap(a, j, 4(a+1)^2 - 1)`` for ``1 <= j <= a <= A``, exact."""

    max_a: int
    entries: dict[tuple[int, int], Fraction] = field(default_factory=dict)

    def __getitem__(self, key: tuple[int, int]) -> Fraction:
        return self.entries[key]

    def rounded(self, a: int, j: int) -> Decimal:
        return round_decimal(self.entries[a, j])

    def truncated(self, a: int, j: int) -> Decimal:
        return round_decimal(self.entries[a, j], rounding=ROUND_DOWN)

    def convention_sensitive(self) -> list[tuple[int, int]]:
        """Cells where rounding and truncation to 6 places disagree."""
        return [k for k in sorted(self.entries) if self.rounded(*k) != self.truncated(*k)]

    def rows(self):
        for a in range(1, self.max_a + 1):
            yield a, [self.entries[a, j] for j in range(1, a + 1)]


def table_l(a: int) -> int:
    return 4 * (a + 1) ** 2 - 1


def table_4_1(max_a: int) -> GapTable:
    """Exact only: six-decimal reproduction needs it."""
    if max_a < 1:
        raise DomainError("max_a must be >= 1")
    table = GapTable(max_a)
    for a in range(1, max_a + 1):
        for j in range(1, a + 1):
            table.entries[a, j] = gap(a, j, table_l(a))
    return table


# ---------------------------------------------------------------------------
# verification


def _dq(l: int, mode: NumericMode) -> tuple[list[Number], list[Number]]:
    """``[d(j)]`` and ``[Q(j)]`` for ``j = 1..tau``."""
    ds = d_sequence(l, mode)[1:]
    return ds, q_distribution(l, None if mode.is_exact and 4 * l > 20000 else mode)


def verify_pairwise(l: int, mode: NumericMode = EXACT) -> VerificationReport:
    """The pairwise inequalities at ``a = a_l`` and the chain to ``E[d(J)] > 0``."""
    if l < 9:
        raise DomainError("verify_pairwise needs l >= 9; use verify_small_l for 6..8")
    a, t = threshold_formula(l), tau(l)
    rep = VerificationReport("pairwise", str(mode))
    rep.modes_used.add(str(mode))
    pre = rep.check("precondition_2a_plus_1_le_tau")
    if not pre.record(2 * a + 1 <= t, l=l, a=a, tau=t):
        return rep
    ds, qs = _dq(l, mode)
    dq = [x * y for x, y in zip(ds, qs)]  # index j-1

    ineq = rep.check("pairwise_inequality")
    equiv = rep.check("gap_sign_equivalence")
    for j in range(1, a + 1):
        diff = dq[j + a] + dq[j - 1]
        ok = ineq.record(_ok(diff), l=l, a=a, j=j)
        gsign = _ok(gap(a, j, l, mode))
        equiv.record(None if ok is None or gsign is None else ok == gsign, l=l, a=a, j=j)

    mid = rep.check("middle_block_positive")
    for j in range(a + 1, t + 1):
        mid.record(_ok(ds[j - 1]) and _ok(qs[j - 1]), l=l, j=j)

    low = sum(dq[:a], Fraction(0)) if mode.is_exact else TrackedReal.fsum(dq[:a], mode.bits)
    high = sum(dq[a:], Fraction(0)) if mode.is_exact else TrackedReal.fsum(dq[a:], mode.bits)
    rep.check("chain_upper_exceeds_lower").record(_ok(high + low), l=l)
    rep.check("expected_d_positive").record(_ok(expected_d(l, mode).total), l=l)
    return rep


def verify_small_l(l: int) -> VerificationReport:
    """``d(2)Q(2) > -d(1)Q(1)`` for ``l = 6, 7, 8``, where ``tau = 2``."""
    if l not in (6, 7, 8):
        raise DomainError("verify_small_l covers l = 6, 7, 8 only")
    rep = VerificationReport("pairwise_small", "exact")
    rep.modes_used.add("exact")
    lhs = d((l, 2)) * Q(l, 2, EXACT)
    rhs = -d((l, 1)) * Q(l, 1, EXACT)
    rep.check("reduced_inequality").record(lhs > rhs, l=l)
    rep.check("expected_d_positive").record(lhs - rhs > 0, l=l)
    return rep


def _pairwise_one(args: tuple[int, NumericMode]) -> VerificationReport:
    l, mode = args
    return verify_small_l(l) if l < 9 else verify_pairwise(l, mode)


def verify_pairwise_range(
    l_min: int, l_max: int, mode: NumericMode = EXACT, workers: int = 1
) -> VerificationReport:
    if not 6 <= l_min <= l_max:
        raise DomainError("need 6 <= l_min <= l_max")
    parts = sweep(_pairwise_one, [(l, mode) for l in range(l_min, l_max + 1)], workers)
    rep = combine("pairwise", str(mode), parts)
    rep.observations["l_range"] = [l_min, l_max]
    return rep


# ---------------------------------------------------------------------------
# monotonicity evidence for the gap


def scan_l_range(a: int, j: int) -> range:
    """All ``l`` with ``a_l = a`` where the gap at ``(a, j)`` is defined."""
    lo = max(9, 4 * a * a)
    while j + a + 1 > tau(lo):
        lo += 1
    return range(lo, 4 * (a + 1) ** 2)


def _scan_row(args: tuple[int, NumericMode]) -> VerificationReport:
    a, mode = args
    rep = VerificationReport("property41", str(mode))
    dec = rep.check("decreasing_in_l")
    for j in range(1, a + 1):
        ls = list(scan_l_range(a, j))
        gaps = [gap(a, j, l, mode) for l in ls]
        for k in range(1, len(ls)):
            dec.record(_ok(gaps[k - 1] - gaps[k]), a=a, j=j, l=ls[k])
    inc = rep.check("increasing_in_j")
    row = [gap(a, j, table_l(a), mode) for j in range(1, a + 1)]
    for j in range(2, a + 1):
        inc.record(_ok(row[j - 1] - row[j - 2]), a=a, j=j, l=table_l(a))
    return rep


def property_4_1_scan(max_a: int, mode: NumericMode = EXACT, workers: int = 1) -> VerificationReport:
    """Grid evidence for the three conjectured gap monotonicities; not a proof."""
    if max_a < 1:
        raise DomainError("max_a must be >= 1")
    parts = sweep(_scan_row, [(a, mode) for a in range(1, max_a + 1)], workers)
    rep = combine("property41", str(mode), parts)
    corner = [gap(a, 1, table_l(a), mode) for a in range(1, max_a + 1)]
    c = rep.check("corner_decreasing_in_a")
    for a in range(2, max_a + 1):
        c.record(_ok(corner[a - 2] - corner[a - 1]), a=a, j=1, l=table_l(a))
    rep.observations["max_a"] = max_a
    rep.observations["status"] = "conjecture evidence on a finite grid"
    return rep


# ---------------------------------------------------------------------------
# figure data


@dataclass(frozen=True)
class FigureData:
    id: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]


FIGURE_IDS = ("4.1", "4.2", "4.3", "4.4", "4.5", "4.6")


def gap_approximation(a: int) -> float:
    """``1/(a+1)^2 + (19/12 - e/2)/(a+1)^3``."""
    x = mpmath.mpf(1) / (a + 1)
    return float(x**2 + (mpmath.mpf(19) / 12 - mpmath.e / 2) * x**3)


def figure_data(fig_id: str) -> FigureData:
    if fig_id not in FIGURE_IDS:
        raise DomainError(f"unknown figure id {fig_id!r}; choose from {', '.join(FIGURE_IDS)}")
    if fig_id in ("4.1", "4.2"):
        l = 256
        a = threshold_formula(l)
        if fig_id == "4.1":
            ds, qs = _dq(l, EXACT)
            rows = tuple(
                (j, float(ds[j + a] * qs[j + a]), float(-ds[j - 1] * qs[j - 1])) for j in range(1, a + 1)
            )
            return FigureData(fig_id, ("j", "dQ_upper", "neg_dQ_lower"), rows)
        rows = tuple((j, float(lhs_41(a, j, l)), float(rhs_41(a, j, l))) for j in range(1, a + 1))
        return FigureData(fig_id, ("j", "lhs", "rhs"), rows)
    if fig_id == "4.6":
        rows = tuple((a, float(gap(a, 1, table_l(a))), gap_approximation(a)) for a in range(1, 11))
        return FigureData(fig_id, ("a", "gap", "approximation"), rows)
    j = {"4.3": 1, "4.4": 2, "4.5": 3}[fig_id]
    rows = tuple(
        (l, float(lhs), float(rhs), float(lhs - rhs))
        for l in range(36, 64)
        for lhs, rhs in [(lhs_41(3, j, l), rhs_41(3, j, l))]
    )
    return FigureData(fig_id, ("l", "lhs", "rhs", "gap"), rows)
