"""The threshold ``a_l = max{j : d_l(j) < 0}`` and its closed form ``floor(sqrt(l)/2)``."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Literal

import mpmath

from .functions import (
    _g_exact,
    g_ratio,
    g_sequence,
    h_sequence,
    log_g,
    log_h,
    tau,
    threshold_formula,
)
from .kernel import (
    EXACT,
    LADDER,
    DomainError,
    NumericMode,
    Sign,
    TrackedReal,
    certified_sign,
    certify_sign,
    exact_sign,
)
from .report import VerificationReport, combine, sweep


@dataclass(frozen=True)
class ThresholdResult:
    l: int
    a_computed: int | None
    a_formula: int
    signs: tuple[Sign, ...]  # sign of d_l(j) for j = 1..tau
    modes_used: frozenset[str]

    @property
    def match(self) -> bool:
        return self.a_computed == self.a_formula

    @property
    def boundary_signs(self) -> tuple[Sign, Sign | None]:
        """Signs of ``d`` at ``a_computed`` and ``a_computed + 1`` (``None`` past ``tau``)."""
        a = self.a_computed or 0
        at = self.signs[a - 1] if a >= 1 else Sign.INDETERMINATE
        after = self.signs[a] if a < len(self.signs) else None
        return at, after

    @property
    def sign_changes(self) -> int:
        return sum(1 for x, y in zip(self.signs, self.signs[1:]) if x != y)


def conjectured_a(l: int) -> int:
    if l < 6:
        raise DomainError("conjectured_a needs l >= 6")
    return threshold_formula(l)


def _log_gh_sequence(l: int, bits: int) -> list[TrackedReal]:
    """``log(g_l(j) / h_l(j))`` for ``j = 1..tau`` from cumulative ratio logs."""
    acc = TrackedReal(mpmath.mpf(0), mpmath.mpf(0), bits)
    out = []
    for j in range(tau(l)):
        acc = acc + TrackedReal.log_exact(g_ratio(l, j), bits)
        out.append(acc - log_h(l, j + 1, bits))
    return out


def d_signs(l: int, mode: NumericMode = EXACT) -> tuple[tuple[Sign, ...], frozenset[str]]:
    """Certified signs of ``d_l(1..tau)`` and the arithmetic modes needed."""
    if l < 6:
        raise DomainError("l must be >= 6")
    if mode.is_exact:
        gs, hs = g_sequence(l), h_sequence(l)
        return tuple(exact_sign(gs[j] - hs[j]) for j in range(1, tau(l) + 1)), frozenset({"exact"})
    signs, used = [], {str(mode)}
    for j, x in enumerate(_log_gh_sequence(l, mode.bits), start=1):
        s = certify_sign(x)
        if s is Sign.INDETERMINATE:
            s, m = certified_sign(
                lambda b, j=j: log_g(l, j, b) - log_h(l, j, b),
                lambda j=j: _g_exact(l, j) - Fraction(l + j, l - j),
                start_bits=next((b for b in LADDER if b > mode.bits), None),
            )
            used.add(str(m))
        signs.append(s)
    return tuple(signs), frozenset(used)


def threshold_result(l: int, mode: NumericMode = EXACT) -> ThresholdResult:
    signs, used = d_signs(l, mode)
    negative = [j for j, s in enumerate(signs, start=1) if s is Sign.NEGATIVE]
    return ThresholdResult(l, max(negative) if negative else None, conjectured_a(l), signs, used)


def compute_a(l: int, mode: NumericMode = EXACT) -> int | None:
    """Largest ``j`` with certified ``d_l(j) < 0``; ``None`` if there is none."""
    return threshold_result(l, mode).a_computed


def boundary_triple(a: int, mode: NumericMode = EXACT) -> tuple[Sign, Sign, Sign]:
    """Signs of ``d`` at ``(4a^2, a)``, ``(4a^2, a+1)`` and ``(4a^2-1, a)``."""
    if a < 2:
        raise DomainError("boundary_triple needs a >= 2 so that 4a^2 - 1 >= 6")
    start = None if mode.is_exact else mode.bits
    out = []
    for l, j in ((4 * a * a, a), (4 * a * a, a + 1), (4 * a * a - 1, a)):
        s, _ = certified_sign(
            lambda b, l=l, j=j: log_g(l, j, b) - log_h(l, j, b),
            lambda l=l, j=j: _g_exact(l, j) - Fraction(l + j, l - j),
            start_bits=start,
        )
        out.append(s)
    return tuple(out)


def _threshold_one(args: tuple[int, NumericMode]) -> VerificationReport:
    l, mode = args
    res = threshold_result(l, mode)
    rep = VerificationReport("threshold", str(mode), modes_used=set(res.modes_used))
    rep.check("a_matches_formula").record(
        res.match, l=l, a_computed=res.a_computed, a_formula=res.a_formula
    )
    undecided = Sign.INDETERMINATE in res.signs
    rep.check("single_sign_change").record(
        None if undecided else (res.signs[0] is Sign.NEGATIVE and res.sign_changes == 1), l=l
    )
    return rep


def _triple_one(args: tuple[int, NumericMode]) -> VerificationReport:
    a, mode = args
    rep = VerificationReport("threshold", str(mode))
    signs = boundary_triple(a, mode)
    expected = (Sign.NEGATIVE, Sign.POSITIVE, Sign.POSITIVE)
    ok = None if Sign.INDETERMINATE in signs else signs == expected
    rep.check("boundary_triple").record(ok, a=a, signs="".join("-" if s is Sign.NEGATIVE else "+" for s in signs))
    return rep


def verify_threshold(
    l_min: int, l_max: int, mode: NumericMode = EXACT, workers: int = 1
) -> VerificationReport:
    """``compute_a == floor(sqrt(l)/2)`` on ``l_min..l_max`` plus the boundary triples inside it.

    Only the finite range is covered; ``observations`` records it.
    """
    if not 6 <= l_min <= l_max:
        raise DomainError("verify_threshold needs 6 <= l_min <= l_max")
    parts = sweep(_threshold_one, [(l, mode) for l in range(l_min, l_max + 1)], workers)
    triples = [a for a in range(2, threshold_formula(l_max) + 1) if l_min <= 4 * a * a - 1 and 4 * a * a <= l_max]
    parts += sweep(_triple_one, [(a, mode) for a in triples], workers)
    rep = combine("threshold", str(mode), parts)
    rep.observations["l_range"] = [l_min, l_max]
    rep.observations["triple_a_range"] = [triples[0], triples[-1]] if triples else []
    return rep


# ---------------------------------------------------------------------------


def ratio_monotone_in_l(a: int, which: Literal["at_a", "at_a_plus_1"] = "at_a") -> VerificationReport:
    """``g_l(j)/h_l(j)`` along ``l`` in ``[4a^2, 4(a+1)^2 - 1]`` for ``j = a`` or ``a + 1``.

    Strict decrease is asserted for ``a >= 3``.  For ``a = 1, 2`` the maximal
    strictly increasing runs are recorded in ``observations`` instead.
    """
    if a < 1:
        raise DomainError("a must be >= 1")
    j = a if which == "at_a" else a + 1
    ls = [l for l in range(max(6, 4 * a * a), 4 * (a + 1) ** 2) if j <= tau(l)]
    ratios = [_g_exact(l, j) / Fraction(l + j, l - j) for l in ls]
    rep = VerificationReport(f"ratio_monotone_{which}", "exact")
    rep.observations.update(a=a, j=j, l_range=[ls[0], ls[-1]])
    runs, start = [], None
    for k in range(1, len(ls)):
        if ratios[k] > ratios[k - 1]:
            start = ls[k - 1] if start is None else start
        elif start is not None:
            runs.append([start, ls[k - 1]])
            start = None
    if start is not None:
        runs.append([start, ls[-1]])
    rep.observations["increasing_runs"] = runs
    if a >= 3:
        c = rep.check("strictly_decreasing")
        for k in range(1, len(ls)):
            c.record(ratios[k] < ratios[k - 1], l=ls[k], a=a, j=j)
    return rep


# ---------------------------------------------------------------------------
# asymptotic expansions of log g and log h near the threshold


F = Fraction
# kind -> (l(a), j(a), coefficients of 1/a^k for k = 1.., first k that is a target)
_EXPANSIONS: dict[str, tuple] = {
    "g_at_a": (lambda a: 4 * a * a, lambda a: a, (F(1, 2), F(0), F(-3, 32)), 3),
    "h_at_a": (lambda a: 4 * a * a, lambda a: a, (F(1, 2), F(0), F(1, 96)), 3),
    "g_off1_at_a": (lambda a: 4 * a * a - 1, lambda a: a, (F(1, 2), F(0), F(7, 32)), 3),
    "h_off1_at_a": (lambda a: 4 * a * a - 1, lambda a: a, (F(1, 2), F(0), F(13, 96)), 3),
    "g_at_a1": (lambda a: 4 * a * a, lambda a: a + 1, (F(1, 2), F(3, 2), F(47, 32), F(19, 32)), 2),
    "h_at_a1": (lambda a: 4 * a * a, lambda a: a + 1, (F(1, 2), F(1, 2), F(1, 96), F(1, 32)), 2),
}
# every expansion is stated up to O(a^-5)
_REMAINDER_ORDER = 5

EXPANSION_KINDS = tuple(_EXPANSIONS)
CALIBRATION_A = 800
RESIDUAL_BITS = 256


@dataclass(frozen=True)
class SeriesResidual:
    a: int
    scaled_residual: float
    target: Fraction | str
    converged: bool
    band: float = float("nan")


def _level_power(kind: str, level: int) -> int:
    _, _, coeffs, first = _EXPANSIONS[kind]
    if not 1 <= level <= len(coeffs) - first + 1:
        raise DomainError(f"{kind} has levels 1..{len(coeffs) - first + 1}")
    return first + level - 1


def expansion_target(kind: str, level: int = 1) -> Fraction:
    return _EXPANSIONS[kind][2][_level_power(kind, level) - 1]


def _decay_order(kind: str, level: int) -> int:
    """Power of ``1/a`` at which the scaled residual approaches its target."""
    _, _, coeffs, _ = _EXPANSIONS[kind]
    k = _level_power(kind, level)
    nxt = next((i for i in range(k + 1, len(coeffs) + 1) if coeffs[i - 1] != 0), _REMAINDER_ORDER)
    return nxt - k


def _expansion_value(kind: str, a: int, level: int) -> mpmath.mpf:
    lfun, jfun, coeffs, _ = _EXPANSIONS[kind]
    k = _level_power(kind, level)
    log_val = (log_g if kind.startswith("g") else log_h)(lfun(a), jfun(a), RESIDUAL_BITS).value
    with mpmath.workprec(RESIDUAL_BITS):
        x = mpmath.mpf(log_val)
        for i, c in enumerate(coeffs[: k - 1], start=1):
            x -= mpmath.mpf(c.numerator) / c.denominator / mpmath.mpf(a) ** i
        return x * mpmath.mpf(a) ** k


def scaled_residuals(kind: str, a_values: list[int], level: int = 1) -> list[mpmath.mpf]:
    if kind not in _EXPANSIONS:
        raise DomainError(f"unknown expansion kind {kind!r}")
    return [_expansion_value(kind, a, level) for a in a_values]


def converged_flags(
    values: list, a_values: list[int], target, order: int, calibration: float
) -> list[tuple[bool, float]]:
    """Monotone shrink of ``|value - target|`` plus a band ``2 err_cal (A_cal/a)^order``.

    ``calibration`` is ``|value - target|`` at ``a = CALIBRATION_A``.
    """
    errs = [abs(float(v) - float(target)) for v in values]
    out = []
    for k, (a, e) in enumerate(zip(a_values, errs)):
        band = 2 * calibration * (CALIBRATION_A / a) ** order
        shrinking = all(errs[i + 1] < errs[i] for i in range(k))
        out.append((shrinking and e <= band, band))
    return out


def expansion_residuals(kind: str, a_values: list[int], level: int = 1) -> list[SeriesResidual]:
    """Scaled residuals of ``log g`` or ``log h`` that should tend to the published constant.

    ``level`` selects the coefficient: level 1 is the first one after ``1/(2a)``;
    for the ``(a+1)`` kinds levels 2 and 3 peel off further terms.
    """
    if any(a < 3 for a in a_values):
        raise DomainError("expansion residuals need a >= 3")
    if kind not in _EXPANSIONS:
        raise DomainError(f"unknown expansion kind {kind!r}")
    target = expansion_target(kind, level)
    values = scaled_residuals(kind, a_values, level)
    cal = abs(float(_expansion_value(kind, CALIBRATION_A, level)) - float(target))
    flags = converged_flags(values, a_values, target, _decay_order(kind, level), cal)
    return [
        SeriesResidual(a, float(v), target, ok, band)
        for a, v, (ok, band) in zip(a_values, values, flags)
    ]
