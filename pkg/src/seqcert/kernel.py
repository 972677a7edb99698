"""Exact and error-tracked arithmetic primitives.

Two value domains are used throughout the package:

* ``fractions.Fraction`` -- exact rationals, used whenever the integers
  involved stay manageable.
* :class:`TrackedReal` -- an mpmath float at a chosen precision paired with a
  rigorous upper bound on its absolute error.  Every operation propagates the
  bound outward, so a sign read off through :func:`certify_sign` is never an
  artifact of rounding.

Error model
-----------
Rational arithmetic (+, -, *, /) in mpmath is correctly rounded, so each
result carries at most ``2**-bits * |result|`` of fresh rounding error.  The
transcendental functions (exp, expm1, log, log1p) are modelled with a fixed
relative bound of ``2**(2-bits)`` per call and ``loggamma`` with
``2**(3-bits)`` plus an absolute floor of ``2**-bits``.  Bounds themselves are
accumulated with upward rounding and inflated by ``1 + 2**(8-bits)`` before
being stored.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Union

import mpmath
from mpmath.libmp import from_rational, round_ceiling, round_nearest, to_rational

__all__ = [
    "DomainError",
    "NumericMode",
    "EXACT",
    "LADDER",
    "Sign",
    "TrackedReal",
    "falling_factorial",
    "binomial_exact",
    "log_binomial",
    "certify_sign",
    "exact_sign",
    "certified_sign",
    "to_fraction",
]

Rational = Union[int, Fraction]

# precision ladder used when a sign cannot be certified
LADDER: tuple[int, ...] = (53, 113, 256)


class DomainError(ValueError):
    """Argument outside the documented domain of an operation."""


@dataclass(frozen=True)
class NumericMode:
    """Arithmetic regime: exact rationals (``bits is None``) or tracked floats."""

    bits: int | None = None

    def __post_init__(self) -> None:
        if self.bits is not None and self.bits < 53:
            raise DomainError(f"precision_bits must be >= 53, got {self.bits}")

    @classmethod
    def log(cls, bits: int = 53) -> NumericMode:
        return cls(bits)

    @property
    def is_exact(self) -> bool:
        return self.bits is None

    def __str__(self) -> str:
        return "exact" if self.bits is None else f"log{self.bits}"

    @classmethod
    def parse(cls, text: str) -> NumericMode:
        """Parse ``exact``, ``log`` or ``logNNN``."""
        text = text.strip().lower()
        if text == "exact":
            return EXACT
        if text.startswith("log"):
            rest = text[3:]
            return cls(int(rest) if rest else 53)
        raise ValueError(f"unknown numeric mode {text!r}")


EXACT = NumericMode()


class Sign(enum.Enum):
    POSITIVE = "positive"
    NEGATIVE = "negative"
    INDETERMINATE = "indeterminate"


# ---------------------------------------------------------------------------
# mpf helpers


def _mpf_rational(q: Rational, bits: int, rnd=round_nearest) -> mpmath.mpf:
    q = Fraction(q)
    return mpmath.mp.make_mpf(from_rational(q.numerator, q.denominator, bits, rnd))


def _mpf_to_fraction(x: mpmath.mpf) -> Fraction:
    p, q = to_rational(x._mpf_)
    return Fraction(int(p), int(q))


def _up_add(*xs: mpmath.mpf, bits: int) -> mpmath.mpf:
    acc = mpmath.mpf(0)
    for x in xs:
        acc = mpmath.fadd(acc, x, prec=bits, rounding="u")
    return acc


def _up_mul(x, y, bits: int) -> mpmath.mpf:
    return mpmath.fmul(x, y, prec=bits, rounding="u")


def _abs(x: mpmath.mpf) -> mpmath.mpf:
    # plain abs()/unary minus round to the global context precision
    return x if x >= 0 else mpmath.fneg(x, exact=True)


def _one_plus_ulps(k: int, bits: int) -> mpmath.mpf:
    return mpmath.fadd(1, mpmath.ldexp(1, k - bits), exact=True)


def _inflate(err: mpmath.mpf, bits: int) -> mpmath.mpf:
    if err == 0:
        return mpmath.mpf(0)
    return _up_mul(err, _one_plus_ulps(8, bits), bits)


def _rnd_err(v: mpmath.mpf, bits: int, ulps_exp: int = 0) -> mpmath.mpf:
    # |v| * 2**(ulps_exp - bits)
    return mpmath.ldexp(_abs(v), ulps_exp - bits)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TrackedReal:
    """A real number known to lie in ``[value - abs_error, value + abs_error]``."""

    value: mpmath.mpf
    abs_error: mpmath.mpf
    bits: int = 53

    def __post_init__(self) -> None:
        if self.abs_error < 0:
            raise ValueError("abs_error must be nonnegative")

    # construction -----------------------------------------------------------
    @classmethod
    def exact(cls, q: Rational, bits: int = 53) -> TrackedReal:
        """Round an exact rational to ``bits``; the error is the true rounding error."""
        v = _mpf_rational(q, bits)
        diff = abs(_mpf_to_fraction(v) - Fraction(q))
        err = _mpf_rational(diff, bits, round_ceiling) if diff else mpmath.mpf(0)
        return cls(v, err, bits)

    @classmethod
    def from_float(cls, x: float, abs_error: float, bits: int = 53) -> TrackedReal:
        return cls(mpmath.mpf(x), mpmath.mpf(abs_error), bits)

    def _coerce(self, other) -> TrackedReal:
        if isinstance(other, TrackedReal):
            return other
        if isinstance(other, (int, Fraction)):
            return TrackedReal.exact(other, self.bits)
        return NotImplemented

    @property
    def lower(self) -> mpmath.mpf:
        return mpmath.fsub(self.value, self.abs_error, prec=self.bits, rounding="d")

    @property
    def upper(self) -> mpmath.mpf:
        return mpmath.fadd(self.value, self.abs_error, prec=self.bits, rounding="u")

    def contains(self, q: Rational | float) -> bool:
        x = Fraction(q)
        return abs(x - _mpf_to_fraction(self.value)) <= _mpf_to_fraction(self.abs_error)

    def __float__(self) -> float:
        return float(self.value)

    def __repr__(self) -> str:
        return (
            f"TrackedReal({mpmath.nstr(self.value, 17)} "
            f"± {mpmath.nstr(self.abs_error, 3)}, bits={self.bits})"
        )

    # arithmetic ---------------------------------------------------------------
    def __neg__(self) -> TrackedReal:
        return TrackedReal(mpmath.fneg(self.value, exact=True), self.abs_error, self.bits)

    def __add__(self, other) -> TrackedReal:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        bits = max(self.bits, other.bits)
        v = mpmath.fadd(self.value, other.value, prec=bits)
        err = _up_add(self.abs_error, other.abs_error, _rnd_err(v, bits), bits=bits)
        return TrackedReal(v, _inflate(err, bits), bits)

    __radd__ = __add__

    def __sub__(self, other) -> TrackedReal:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other) -> TrackedReal:
        return (-self) + other

    def __mul__(self, other) -> TrackedReal:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        bits = max(self.bits, other.bits)
        v = mpmath.fmul(self.value, other.value, prec=bits)
        err = _up_add(
            _up_mul(_abs(self.value), other.abs_error, bits),
            _up_mul(_abs(other.value), self.abs_error, bits),
            _up_mul(self.abs_error, other.abs_error, bits),
            _rnd_err(v, bits),
            bits=bits,
        )
        return TrackedReal(v, _inflate(err, bits), bits)

    __rmul__ = __mul__

    def __truediv__(self, other) -> TrackedReal:
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        bits = max(self.bits, other.bits)
        den = _abs(other.value)
        margin = mpmath.fsub(den, other.abs_error, prec=bits, rounding="d")
        if margin <= 0:
            raise ZeroDivisionError("divisor interval contains zero")
        v = mpmath.fdiv(self.value, other.value, prec=bits)
        num = _up_add(
            _up_mul(den, self.abs_error, bits),
            _up_mul(_abs(self.value), other.abs_error, bits),
            bits=bits,
        )
        prop = mpmath.fdiv(num, mpmath.fmul(den, margin, prec=bits, rounding="d"), prec=bits, rounding="u")
        err = _up_add(prop, _rnd_err(v, bits), bits=bits)
        return TrackedReal(v, _inflate(err, bits), bits)

    def __rtruediv__(self, other) -> TrackedReal:
        return TrackedReal.exact(other, self.bits) / self

    # transcendental -----------------------------------------------------------
    def exp(self) -> TrackedReal:
        bits = self.bits
        with mpmath.workprec(bits):
            v = mpmath.exp(self.value)
            spread = mpmath.expm1(self.abs_error)
        err = _up_add(
            _up_mul(_up_mul(_abs(v), _one_plus_ulps(2, bits), bits), spread, bits),
            _rnd_err(v, bits, 2),
            bits=bits,
        )
        return TrackedReal(v, _inflate(err, bits), bits)

    def expm1(self) -> TrackedReal:
        bits = self.bits
        with mpmath.workprec(bits):
            v = mpmath.expm1(self.value)
            ev = mpmath.exp(self.value)
            spread = mpmath.expm1(self.abs_error)
        err = _up_add(
            _up_mul(_up_mul(ev, _one_plus_ulps(2, bits), bits), spread, bits),
            _rnd_err(v, bits, 2),
            bits=bits,
        )
        return TrackedReal(v, _inflate(err, bits), bits)

    def log(self) -> TrackedReal:
        bits = self.bits
        if self.lower <= 0:
            raise DomainError("log of an interval not bounded away from zero")
        with mpmath.workprec(bits):
            v = mpmath.log(self.value)
            spread = -mpmath.log1p(-self.abs_error / self.value)
        err = _up_add(
            _up_mul(spread, _one_plus_ulps(2, bits), bits),
            _rnd_err(v, bits, 2),
            bits=bits,
        )
        return TrackedReal(v, _inflate(err, bits), bits)

    def log1p(self) -> TrackedReal:
        bits = self.bits
        if self.lower <= -1:
            raise DomainError("log1p of an interval reaching -1")
        with mpmath.workprec(bits):
            v = mpmath.log1p(self.value)
            spread = -mpmath.log1p(-self.abs_error / (1 + self.value))
        err = _up_add(
            _up_mul(spread, _one_plus_ulps(2, bits), bits),
            _rnd_err(v, bits, 2),
            bits=bits,
        )
        return TrackedReal(v, _inflate(err, bits), bits)

    @classmethod
    def log1p_exact(cls, q: Rational, bits: int) -> TrackedReal:
        """``log(1 + q)`` for an exact rational ``q``."""
        return cls.exact(q, bits).log1p()

    @classmethod
    def log_exact(cls, q: Rational, bits: int) -> TrackedReal:
        """``log(q)`` for an exact positive rational, well conditioned near 1."""
        q = Fraction(q)
        if q <= 0:
            raise DomainError("log of a nonpositive rational")
        return cls.exact(q - 1, bits).log1p()

    @classmethod
    def fsum(cls, items: Iterable[TrackedReal], bits: int = 53) -> TrackedReal:
        """Sum with a conservative bound ``n * 2**-bits * sum|v_i|`` on summation error."""
        items = list(items)
        if not items:
            return cls(mpmath.mpf(0), mpmath.mpf(0), bits)
        bits = max([bits] + [t.bits for t in items])
        with mpmath.workprec(bits):
            v = mpmath.fsum(t.value for t in items)
        mags = mpmath.mpf(0)
        errs = mpmath.mpf(0)
        for t in items:
            mags = mpmath.fadd(mags, _abs(t.value), prec=bits, rounding="u")
            errs = mpmath.fadd(errs, t.abs_error, prec=bits, rounding="u")
        rounding = _up_mul(mpmath.ldexp(mags, -bits), len(items) + 1, bits)
        return cls(v, _inflate(_up_add(errs, rounding, bits=bits), bits), bits)


# ---------------------------------------------------------------------------
# integer primitives


def falling_factorial(x: int, m: int) -> int:
    """``x (x-1) ... (x-m+1)``; 1 when ``m == 0``.  Any integer ``x`` is allowed."""
    if m < 0:
        raise DomainError("falling factorial needs m >= 0")
    return math.prod(range(x, x - m, -1))


def binomial_exact(n: int, k: int) -> int:
    """``C(n, k)`` with the convention ``0`` outside ``0 <= k <= n``."""
    if n < 0:
        raise DomainError("binomial_exact needs n >= 0")
    if k < 0 or k > n:
        return 0
    return math.comb(n, k)


def _lgamma_int(n: int, bits: int) -> TrackedReal:
    # log((n-1)!) for integer n >= 1
    if n <= 2:
        return TrackedReal(mpmath.mpf(0), mpmath.mpf(0), bits)
    with mpmath.workprec(bits):
        v = mpmath.loggamma(n)
    err = _up_add(_rnd_err(v, bits, 3), mpmath.ldexp(1, -bits), bits=bits)
    return TrackedReal(v, err, bits)


def log_binomial(n: int, k: int, bits: int = 53) -> TrackedReal:
    """Natural log of ``C(n, k)`` as a :class:`TrackedReal` via log-gamma."""
    if k < 0 or k > n:
        raise DomainError(f"log_binomial needs 0 <= k <= n, got n={n}, k={k}")
    if k == 0 or k == n:
        return TrackedReal(mpmath.mpf(0), mpmath.mpf(0), bits)
    return _lgamma_int(n + 1, bits) - _lgamma_int(k + 1, bits) - _lgamma_int(n - k + 1, bits)


# ---------------------------------------------------------------------------
# signs


def certify_sign(x: TrackedReal) -> Sign:
    if mpmath.fsub(x.value, x.abs_error, exact=True) > 0:
        return Sign.POSITIVE
    if mpmath.fadd(x.value, x.abs_error, exact=True) < 0:
        return Sign.NEGATIVE
    return Sign.INDETERMINATE


def exact_sign(q: Rational) -> Sign:
    """Sign of an exact rational; zero counts as indeterminate (no strict sign)."""
    if q > 0:
        return Sign.POSITIVE
    if q < 0:
        return Sign.NEGATIVE
    return Sign.INDETERMINATE


def certified_sign(
    tracked: Callable[[int], TrackedReal] | None,
    exact: Callable[[], Rational] | None,
    start_bits: int | None = 53,
) -> tuple[Sign, NumericMode]:
    """Walk the precision ladder until the sign is certified.

    ``tracked(bits)`` evaluates the quantity at a given precision and
    ``exact()`` evaluates it as a rational.  ``start_bits=None`` goes straight
    to exact evaluation.  Returns the sign and the mode that settled it.
    """
    if tracked is not None and start_bits is not None:
        rungs = [b for b in LADDER if b >= start_bits] or [start_bits]
        for bits in rungs:
            s = certify_sign(tracked(bits))
            if s is not Sign.INDETERMINATE:
                return s, NumericMode(bits)
        if exact is None:
            return Sign.INDETERMINATE, NumericMode(rungs[-1])
    if exact is None:
        raise ValueError("no evaluator supplied")
    return exact_sign(exact()), EXACT


def to_fraction(x: Rational | TrackedReal) -> Fraction:
    """Exact value for rationals; the stored midpoint for tracked reals."""
    if isinstance(x, TrackedReal):
        return _mpf_to_fraction(x.value)
    return Fraction(x)
