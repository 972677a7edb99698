"""Forward and centered finite differences and the convexity suites.

Indexing follows the centered convention: the second difference at ``j`` is
``f(j+1) - 2 f(j) + f(j-1)``, so its first valid index is ``j = 1``.  For a
sequence of length ``n`` the valid ranges are

* ``delta``:  ``0 <= j <= n - 2``
* ``delta2``: ``1 <= j <= n - 2``
* ``delta3``: ``1 <= j <= n - 3``
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .functions import (
    Number,
    f_ab,
    g_ratio,
    g_sequence,
    h_sequence,
    tau,
)
from .kernel import (
    EXACT,
    DomainError,
    NumericMode,
    Sign,
    TrackedReal,
    certify_sign,
    falling_factorial,
)
from .report import VerificationReport, combine, sweep

# convexity checks run exactly up to this l, in log mode above it
EXACT_LIMIT = 2048


@dataclass(frozen=True)
class DiffSequence:
    values: tuple
    l: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        if self.l is not None and len(self.values) != self.l // 3 + 1:
            raise DomainError(f"sequence for l={self.l} must have tau+1 = {self.l // 3 + 1} entries")

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, j: int):
        return self.values[j]


def _as_seq(seq) -> DiffSequence:
    return seq if isinstance(seq, DiffSequence) else DiffSequence(tuple(seq))


def _need(cond: bool, what: str, j: int, n: int) -> None:
    if not cond:
        raise IndexError(f"{what} index {j} out of range for sequence of length {n}")


def delta(seq, j: int):
    s = _as_seq(seq)
    _need(0 <= j <= len(s) - 2, "delta", j, len(s))
    return s[j + 1] - s[j]


def delta2(seq, j: int):
    s = _as_seq(seq)
    _need(1 <= j <= len(s) - 2, "delta2", j, len(s))
    return s[j + 1] - 2 * s[j] + s[j - 1]


def delta3(seq, j: int):
    s = _as_seq(seq)
    _need(1 <= j <= len(s) - 3, "delta3", j, len(s))
    return delta2(s, j + 1) - delta2(s, j)


def delta2_h_closed(l: int, j: int) -> Fraction:
    if not 1 <= j <= tau(l) - 1:
        raise IndexError(f"delta2_h_closed needs 1 <= j <= tau-1, got l={l}, j={j}")
    return Fraction(4 * l, falling_factorial(l - j + 1, 3))


def delta3_h_closed(l: int, j: int) -> Fraction:
    if not 1 <= j <= tau(l) - 2:
        raise IndexError(f"delta3_h_closed needs 1 <= j <= tau-2, got l={l}, j={j}")
    return Fraction(12 * l, falling_factorial(l - j + 1, 4))


# ---------------------------------------------------------------------------
# sign helpers shared by the suites


def _positive(x: Number) -> bool | None:
    if isinstance(x, TrackedReal):
        s = certify_sign(x)
        return None if s is Sign.INDETERMINATE else s is Sign.POSITIVE
    return x > 0


def _default_mode(l: int, mode: NumericMode | None) -> NumericMode:
    if mode is not None:
        return mode
    return EXACT if l <= EXACT_LIMIT else NumericMode(53)


# ---------------------------------------------------------------------------


def _theorem_1_1_at(l: int, mode: NumericMode) -> VerificationReport:
    rep = VerificationReport("theorem1", str(mode))
    t = tau(l)
    hs = DiffSequence(h_sequence(l), l)  # h is always cheap to keep exact
    gs = DiffSequence(g_sequence(l, mode), l)

    c = rep.check("h_increasing")
    for j in range(t):
        c.record(delta(hs, j) > 0, l=l, j=j)
    c = rep.check("delta2_h_positive")
    c_closed = rep.check("delta2_h_closed_form")
    for j in range(1, t):
        v = delta2(hs, j)
        c.record(v > 0, l=l, j=j)
        c_closed.record(v == delta2_h_closed(l, j), l=l, j=j)
    c = rep.check("delta3_h_positive")
    for j in range(1, t - 1):
        c.record(delta3(hs, j) > 0, l=l, j=j)

    c = rep.check("g_increasing")
    for j in range(t):
        c.record(_positive(delta(gs, j)), l=l, j=j)
    d2g = {j: delta2(gs, j) for j in range(1, t)}
    c = rep.check("delta2_g_positive")
    for j, v in d2g.items():
        c.record(_positive(v), l=l, j=j)
    c = rep.check("delta3_g_positive")
    for j in range(1, t - 1):
        c.record(_positive(d2g[j + 1] - d2g[j]), l=l, j=j)

    c = rep.check("delta2_g1_exceeds_max_delta2_h")
    c.record(_positive(d2g[1] - delta2(hs, t - 1)), l=l, j=1)

    c = rep.check("delta2_d_positive")
    for j, v in d2g.items():
        c.record(_positive(v - delta2(hs, j)), l=l, j=j)
    return rep


def verify_theorem_1_1(l: int, mode: NumericMode | None = None) -> VerificationReport:
    """Certify the five convexity assertions and the corollary on ``d`` for one ``l``.

    Log-mode evaluations whose sign is not certified are retried up the
    precision ladder and finally exactly.
    """
    if l < 6:
        raise DomainError("verify_theorem_1_1 needs l >= 6")
    mode = _default_mode(l, mode)
    rep = _theorem_1_1_at(l, mode)
    rep.modes_used.add(str(mode))
    if mode.is_exact or rep.status.value != "indeterminate":
        return rep
    for bits in (113, 256):
        if bits <= mode.bits:
            continue
        rep = _theorem_1_1_at(l, NumericMode(bits))
        rep.modes_used.add(f"log{bits}")
        if rep.status.value != "indeterminate":
            return rep
    rep = _theorem_1_1_at(l, EXACT)
    rep.modes_used.add("exact")
    return rep


def theorem_1_1_bounds(l: int) -> VerificationReport:
    """The explicit bounds behind assertion (v) and the closed-form bound on ``max Delta^2 h``."""
    rep = VerificationReport("theorem1_bounds", "exact")
    t = tau(l)
    top = delta2_h_closed(l, t - 1)
    bound = Fraction(27, 2) / l**2
    rep.check("max_delta2_h_below_27_over_2l2").record(top < bound, l=l)
    lam = Fraction(1, l)
    left = bound / ((1 + 3 * lam) * (1 + Fraction(3, 2) * lam))
    if l % 3 == 0:
        rep.check("max_delta2_h_equals_bound_when_3_divides_l").record(top == left, l=l)
    else:
        rep.check("max_delta2_h_below_bound").record(top <= left, l=l)
    gs = g_sequence(l) if t >= 2 else None
    rep.check("g1_below_1_plus_9_over_l2").record(gs[1] < 1 + 9 * lam**2, l=l)
    rep.check("g2_above_1_plus_160_over_3l2").record(gs[2] > 1 + Fraction(160, 3) * lam**2, l=l)
    return rep


# ---------------------------------------------------------------------------


def appendix_a_check(a, b, grid: Sequence) -> VerificationReport:
    """Convexity of ``f_ab`` on a grid: slopes increase, and the cubic criterion is positive.

    Works for nonuniform grids by comparing consecutive divided differences.
    Pass ``Fraction`` inputs for exact results.
    """
    rep = VerificationReport("appendix_a", "exact" if isinstance(a, Fraction) else "float")
    xs = sorted(grid)
    upper = b / (1 - a)
    for x in xs:
        if not 0 < x < upper:
            raise DomainError(f"grid point {x} outside (0, {upper})")
    fs = [f_ab(a, b, x) for x in xs]
    c = rep.check("f_positive")
    for x, fx in zip(xs, fs):
        c.record(fx > 0, x=str(x))
    c = rep.check("divided_difference_increasing")
    slopes = [(fs[k + 1] - fs[k]) / (xs[k + 1] - xs[k]) for k in range(len(xs) - 1)]
    for k in range(1, len(slopes)):
        c.record(slopes[k] > slopes[k - 1], x=str(xs[k]))
    c = rep.check("cubic_criterion_positive")
    for x in xs:
        c.record(2 * a * (1 - a * a) * x**3 + 3 * b * (1 - a * a) * x**2 + b**3 > 0, x=str(x))
    return rep


def lemma_2_1_check(s: Sequence, t: Sequence) -> VerificationReport:
    """Products of positive, increasing, convex sequences are increasing and convex."""
    rep = VerificationReport("lemma_2_1", "exact")
    if len(s) != len(t):
        raise ValueError("sequences must have equal length")
    n = len(s)
    pre = rep.check("preconditions")
    for name, seq in (("s", s), ("t", t)):
        for j, v in enumerate(seq):
            pre.record(v > 0, sequence=name, property="positive", j=j)
        for j in range(n - 1):
            pre.record(delta(seq, j) > 0, sequence=name, property="increasing", j=j)
        for j in range(1, n - 1):
            pre.record(delta2(seq, j) > 0, sequence=name, property="convex", j=j)
    if pre.failures:
        rep.observations["precondition_failed"] = sorted(
            {(w["sequence"], w["property"]) for w in pre.failures}
        )
        return rep
    st = [x * y for x, y in zip(s, t)]
    c = rep.check("product_increasing")
    for j in range(n - 1):
        c.record(delta(st, j) > 0, j=j)
    c = rep.check("product_convex")
    for j in range(1, n - 1):
        c.record(delta2(st, j) > 0, j=j)
    return rep


def ratio_convexity_check(l: int) -> VerificationReport:
    """``g(j+1)/g(j)`` increases and is convex; grouped derivative terms are nonnegative.

    The derivative groups of ``L(x) = log g_ratio(l, x)`` are evaluated exactly
    at every integer ``x = 0 .. tau-1`` (all inside the domain ``x < (l-2)/3``).
    """
    if l < 6:
        raise DomainError("ratio_convexity_check needs l >= 6")
    rep = VerificationReport("ratio_convexity", "exact")
    t = tau(l)
    rs = [g_ratio(l, j) for j in range(t)]
    c = rep.check("domain_guard")
    for j in range(t):
        c.record(3 * j < l - 2, l=l, j=j)
    c = rep.check("ratio_positive")
    for j, r in enumerate(rs):
        c.record(r > 0, l=l, j=j)
    c = rep.check("ratio_increasing")
    for j in range(t - 1):
        c.record(delta(rs, j) > 0, l=l, j=j)
    c = rep.check("ratio_convex")
    for j in range(1, t - 1):
        c.record(delta2(rs, j) > 0, l=l, j=j)

    c1 = rep.check("first_derivative_groups")
    c2 = rep.check("second_derivative_groups")
    F = Fraction
    for x in range(t):
        g1 = [
            F(1, x + l + 1) - F(1, 3 * x + l + 1),
            F(1, l - 3 * x) - F(1, l - x),
            F(1, l - 1 - 3 * x) - F(1, 3 * x + l + 3),
            F(1, l - 2 - 3 * x) - F(1, 3 * x + l + 2),
        ]
        # first two groups vanish at x = 0, the last two are strictly positive
        c1.record(all(v >= 0 for v in g1[:2]) and all(v > 0 for v in g1[2:]) and sum(g1) > 0, l=l, x=x)
        g2 = [
            F(-1, (x + l + 1) ** 2) + F(3, (3 * x + l + 1) ** 2),
            F(3, (l - 3 * x) ** 2) - F(1, (l - x) ** 2),
            F(3, (l - 1 - 3 * x) ** 2),
            F(3, (3 * x + l + 3) ** 2),
            F(3, (l - 2 - 3 * x) ** 2),
            F(3, (3 * x + l + 2) ** 2),
        ]
        c2.record(all(v > 0 for v in g2), l=l, x=x)
    return rep


def _theorem_one(args: tuple[int, NumericMode | None]) -> VerificationReport:
    return verify_theorem_1_1(*args)


def verify_theorem_1_1_range(
    l_min: int, l_max: int, mode: NumericMode | None = None, workers: int = 1
) -> VerificationReport:
    if not 6 <= l_min <= l_max:
        raise DomainError("need 6 <= l_min <= l_max")
    parts = sweep(_theorem_one, [(l, mode) for l in range(l_min, l_max + 1)], workers)
    label = str(mode) if mode is not None else "auto"
    rep = combine("theorem1", label, parts)
    rep.observations["l_range"] = [l_min, l_max]
    return rep
