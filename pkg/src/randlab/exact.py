"""Exact probabilities.

A probability is either an exact :class:`~fractions.Fraction` or, once square
roots, logarithms or runaway denominators enter, an :class:`Interval` with
dyadic endpoints.  Every interval operation rounds outward onto the grid
``2**-prec``, so the true value is always enclosed.

The two kinds mix freely under ``+ - * /``; the result is a Fraction only if
both operands are.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from typing import Callable, Union

from mpmath.libmp import from_int, from_rational, libmpi, round_ceiling, round_floor, to_rational

DEFAULT_PRECISION = 64

# Rationals whose denominator grows past this many bits are converted to
# intervals.  Hitting sequences double their denominator size every step, so
# exact values are only kept for the first dozen or so terms.
EXACT_BITS = 1 << 14

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+)\s*)?$")


class MalformedRational(ValueError):
    """Raised when a string is not of the form ``a/b`` or ``a``."""


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse ``"a/b"`` (or a bare integer) into a Fraction.

    Decimal notation is rejected on purpose: ``"0.1"`` is not the number the
    user meant to write in a setting where every probability is exact.
    """
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    m = _RATIONAL_RE.match(str(text))
    if not m:
        raise MalformedRational(f"expected a rational 'a/b', got {text!r}")
    num, den = m.group(1), m.group(2)
    if den is not None and int(den) == 0:
        raise MalformedRational(f"zero denominator in {text!r}")
    return Fraction(int(num), int(den) if den is not None else 1)


def _floor_to_grid(x: Fraction, prec: int) -> Fraction:
    return Fraction((x.numerator << prec) // x.denominator, 1 << prec)


def _ceil_to_grid(x: Fraction, prec: int) -> Fraction:
    return Fraction(-((-x.numerator << prec) // x.denominator), 1 << prec)


class Interval:
    """Closed interval ``[lo, hi]`` with dyadic rational endpoints."""

    __slots__ = ("lo", "hi", "prec")

    def __init__(self, lo, hi=None, prec: int = DEFAULT_PRECISION):
        lo = Fraction(lo)
        hi = lo if hi is None else Fraction(hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        self.lo = lo
        self.hi = hi
        self.prec = prec

    @classmethod
    def enclose(cls, lo, hi=None, prec: int = DEFAULT_PRECISION) -> "Interval":
        """Smallest grid interval containing ``[lo, hi]``."""
        lo = Fraction(lo)
        hi = lo if hi is None else Fraction(hi)
        return cls(_floor_to_grid(lo, prec), _ceil_to_grid(hi, prec), prec)

    # -- inspection -------------------------------------------------------

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    def overlaps(self, other) -> bool:
        return lower(other) <= self.hi and self.lo <= upper(other)

    def __float__(self) -> float:
        return float(self.mid)

    def __repr__(self) -> str:
        return f"Interval({float(self.lo)!r}, {float(self.hi)!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Interval):
            return NotImplemented
        return self.lo == other.lo and self.hi == other.hi

    def __hash__(self) -> int:
        return hash((self.lo, self.hi))

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, Interval):
            return other, max(self.prec, other.prec)
        if isinstance(other, (int, Fraction)):
            return Interval(other, prec=self.prec), self.prec
        return None, None

    def __neg__(self) -> "Interval":
        return Interval(-self.hi, -self.lo, self.prec)

    def __add__(self, other):
        o, prec = self._coerce(other)
        if o is None:
            return NotImplemented
        return Interval.enclose(self.lo + o.lo, self.hi + o.hi, prec)

    __radd__ = __add__

    def __sub__(self, other):
        o, prec = self._coerce(other)
        if o is None:
            return NotImplemented
        return Interval.enclose(self.lo - o.hi, self.hi - o.lo, prec)

    def __rsub__(self, other):
        o, prec = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o, prec = self._coerce(other)
        if o is None:
            return NotImplemented
        products = (self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi)
        return Interval.enclose(min(products), max(products), prec)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o, prec = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.lo <= 0 <= o.hi:
            raise ZeroDivisionError(f"division by an interval containing 0: {o!r}")
        quotients = (self.lo / o.lo, self.lo / o.hi, self.hi / o.lo, self.hi / o.hi)
        return Interval.enclose(min(quotients), max(quotients), prec)

    def __rtruediv__(self, other):
        o, prec = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = Interval(1, prec=self.prec)
        for _ in range(k):
            out = out * self
        return out

    def sqrt(self) -> "Interval":
        if self.lo < 0:
            raise ValueError(f"square root of an interval with negative part: {self!r}")
        return Interval(_sqrt_floor(self.lo, self.prec), _sqrt_ceil(self.hi, self.prec), self.prec)

    def map_increasing(self, fn: Callable[[Fraction], Fraction]) -> "Interval":
        """Image under ``fn``, which the caller guarantees is nondecreasing here.

        Evaluating at the endpoints avoids the dependency blow-up that plain
        interval arithmetic suffers on expressions like ``2*p*q - (p*q)**2``.
        """
        return Interval.enclose(fn(self.lo), fn(self.hi), self.prec)

    def with_precision(self, prec: int) -> "Interval":
        return Interval.enclose(self.lo, self.hi, prec)


def _sqrt_floor(x: Fraction, prec: int) -> Fraction:
    # floor(sqrt(x) * 2**prec) == isqrt(floor(x * 4**prec))
    return Fraction(math.isqrt((x.numerator << (2 * prec)) // x.denominator), 1 << prec)


def _sqrt_ceil(x: Fraction, prec: int) -> Fraction:
    scaled = x * (1 << (2 * prec))
    k = math.isqrt(scaled.numerator // scaled.denominator)
    if Fraction(k * k) != scaled:
        k += 1
    return Fraction(k, 1 << prec)


ExactProb = Union[Fraction, Interval]


def is_exact(x: ExactProb) -> bool:
    return not isinstance(x, Interval)


def lower(x) -> Fraction:
    return x.lo if isinstance(x, Interval) else Fraction(x)


def upper(x) -> Fraction:
    return x.hi if isinstance(x, Interval) else Fraction(x)


def midpoint(x) -> Fraction:
    return x.mid if isinstance(x, Interval) else Fraction(x)


def width(x) -> Fraction:
    return x.width if isinstance(x, Interval) else Fraction(0)


def contains(x: ExactProb, value) -> bool:
    """Whether the enclosure ``x`` admits ``value`` (equality for rationals)."""
    if isinstance(x, Interval):
        return x.contains(value)
    if isinstance(value, Interval):
        return value.lo == value.hi == x
    return x == value


def as_interval(x: ExactProb, prec: int = DEFAULT_PRECISION) -> Interval:
    if isinstance(x, Interval):
        return x
    return Interval.enclose(x, x, prec)


def tame(x: ExactProb, prec: int = DEFAULT_PRECISION, exact_bits: int = EXACT_BITS) -> ExactProb:
    """Trade an exact value for an interval once its denominator gets too large."""
    if isinstance(x, Fraction) and x.denominator.bit_length() > exact_bits:
        return Interval.enclose(x, x, prec)
    return x


def map_increasing(x: ExactProb, fn: Callable[[Fraction], Fraction]) -> ExactProb:
    if isinstance(x, Interval):
        return x.map_increasing(fn)
    return fn(x)


def exact_sqrt(q: Fraction) -> Fraction | None:
    """Square root of a nonnegative rational if it is rational, else None."""
    if q < 0:
        return None
    a, b = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if a * a == q.numerator and b * b == q.denominator:
        return Fraction(a, b)
    return None


def sqrt(x: ExactProb, prec: int = DEFAULT_PRECISION) -> ExactProb:
    if isinstance(x, Interval):
        return x.sqrt()
    root = exact_sqrt(Fraction(x))
    if root is not None:
        return root
    return Interval.enclose(x, x, prec).sqrt()


def _power_of_two_exponent(q: Fraction) -> int | None:
    n, d = q.numerator, q.denominator
    if n > 0 and n & (n - 1) == 0 and d & (d - 1) == 0:
        return n.bit_length() - d.bit_length()
    return None


def _log2_enclosure(q: Fraction, prec: int) -> tuple[Fraction, Fraction]:
    wp = prec + 24
    x = (
        from_rational(q.numerator, q.denominator, wp, round_floor),
        from_rational(q.numerator, q.denominator, wp, round_ceiling),
    )
    two = from_int(2)
    lo_raw, hi_raw = libmpi.mpi_div(libmpi.mpi_log(x, wp), libmpi.mpi_log((two, two), wp), wp)
    lo = Fraction(*to_rational(lo_raw))
    hi = Fraction(*to_rational(hi_raw))
    return lo, hi


def log2(x: ExactProb, prec: int = DEFAULT_PRECISION) -> ExactProb:
    """Binary logarithm; exact for powers of two, else a rigorous enclosure."""
    if isinstance(x, Interval):
        if x.lo <= 0:
            raise ValueError(f"log2 of an interval reaching 0: {x!r}")
        if x.lo == x.hi:
            return log2(x.lo, prec)
        lo, _ = _log2_enclosure(x.lo, prec)
        _, hi = _log2_enclosure(x.hi, prec)
        return Interval.enclose(lo, hi, prec)
    q = Fraction(x)
    if q <= 0:
        raise ValueError(f"log2 of a nonpositive number: {q}")
    k = _power_of_two_exponent(q)
    if k is not None:
        return Fraction(k)
    lo, hi = _log2_enclosure(q, prec)
    return Interval.enclose(lo, hi, prec)


def neg_log2(x: ExactProb, prec: int = DEFAULT_PRECISION) -> ExactProb:
    return -log2(x, prec)


def decimal_str(x: ExactProb, digits: int = 10) -> str:
    """Decimal rendering of the midpoint, for human eyes only."""
    q = midpoint(x)
    scaled = round(q * 10**digits)
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    whole, frac = divmod(scaled, 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}" if digits else f"{sign}{whole}"


def to_json(x: ExactProb, decimals: int | None = None):
    """Rationals as ``"a/b"`` strings, intervals as ``{"lo": ..., "hi": ...}``."""
    if isinstance(x, Interval):
        out = {"lo": str(x.lo), "hi": str(x.hi)}
        if decimals is not None:
            out["approx"] = decimal_str(x, decimals)
        return out
    q = Fraction(x)
    if decimals is not None:
        return {"exact": str(q), "approx": decimal_str(q, decimals)}
    return str(q)


def from_json(value) -> ExactProb:
    if isinstance(value, dict):
        if "exact" in value:
            return parse_rational(value["exact"])
        lo, hi = parse_rational(value["lo"]), parse_rational(value["hi"])
        prec = max(lo.denominator.bit_length(), hi.denominator.bit_length()) - 1
        return Interval(lo, hi, max(prec, 1))
    return parse_rational(value)
