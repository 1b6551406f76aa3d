"""Bernoulli measures on ternary code words.

A code digit always lives on a *level* ``>= 1``: the depth of the binary nodes
it decides about.  In a representing-function label word the digit for node
``σ`` has level ``|σ|``; in a closed-set code the digit describing node ``σ``
decides the children of ``σ`` and has level ``|σ| + 1``.  Plain and symmetric
Bernoulli measures ignore the level; generalized symmetric measures use
``r_level``.
"""

from __future__ import annotations

import csv
import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import rng
from .exact import (
    DEFAULT_PRECISION,
    ExactProb,
    Interval,
    lower,
    midpoint,
    parse_rational,
    upper,
    width,
)

FUNCTION = "function"
CLOSED_SET = "closed-set"
LAYOUTS = (FUNCTION, CLOSED_SET)

HALF = Fraction(1, 2)


class MeasureError(ValueError):
    """Invalid measure parameters or a word outside the measure's reach."""


class PrecisionError(ValueError):
    """An interval-valued parameter is too wide for the requested operation."""


def _check_prob(x: ExactProb, name: str, hi: Fraction = Fraction(1)) -> None:
    if lower(x) < 0 or upper(x) > hi:
        raise MeasureError(f"{name}={x} outside [0, {hi}]")


class MeasureSpec:
    """Common interface: digit probabilities per level."""

    def triple(self, level: int) -> tuple[ExactProb, ExactProb, ExactProb]:
        raise NotImplementedError

    @property
    def is_symmetric(self) -> bool:
        return False

    @property
    def is_rational(self) -> bool:
        return True

    @property
    def max_level(self) -> int | None:
        """Deepest level with known parameters; None when unbounded."""
        return None

    def support(self, level: int) -> tuple[int, ...]:
        return tuple(d for d, p in enumerate(self.triple(level)) if upper(p) > 0)

    def describe(self) -> str:
        raise NotImplementedError


@dataclass(frozen=True)
class Bernoulli(MeasureSpec):
    p0: Fraction
    p1: Fraction
    p2: Fraction

    def __post_init__(self):
        for name in ("p0", "p1", "p2"):
            object.__setattr__(self, name, Fraction(getattr(self, name)))
            _check_prob(getattr(self, name), name)
        if self.p0 + self.p1 + self.p2 != 1:
            raise MeasureError(f"p0+p1+p2 must be 1, got {self.p0 + self.p1 + self.p2}")

    def triple(self, level: int = 1):
        return (self.p0, self.p1, self.p2)

    @property
    def is_symmetric(self) -> bool:
        return self.p0 == self.p1

    def describe(self) -> str:
        return f"triple:{self.p0},{self.p1},{self.p2}"


@dataclass(frozen=True)
class SymmetricBernoulli(MeasureSpec):
    r: Fraction

    def __post_init__(self):
        object.__setattr__(self, "r", Fraction(self.r))
        _check_prob(self.r, "r", HALF)

    def triple(self, level: int = 1):
        return (self.r, self.r, 1 - 2 * self.r)

    @property
    def is_symmetric(self) -> bool:
        return True

    def describe(self) -> str:
        return f"sym:r={self.r}"


UNIFORM = SymmetricBernoulli(Fraction(1, 3))
ONLINE = SymmetricBernoulli(HALF)


@dataclass(frozen=True)
class GeneralizedSymmetricBernoulli(MeasureSpec):
    """Symmetric measure with a level-dependent parameter.

    ``r_seq[k]`` is the parameter of level ``k + 1``.  Entries may be
    intervals; ``refine``, when present, recomputes the whole sequence at a
    requested precision (bits).
    """

    r_seq: tuple
    refine: Callable[[int], Sequence[ExactProb]] | None = field(default=None, compare=False)

    def __post_init__(self):
        seq = tuple(x if isinstance(x, Interval) else Fraction(x) for x in self.r_seq)
        for k, r in enumerate(seq, start=1):
            _check_prob(r, f"r_{k}", HALF)
        object.__setattr__(self, "r_seq", seq)

    def r(self, level: int) -> ExactProb:
        if not 1 <= level <= len(self.r_seq):
            raise MeasureError(f"no parameter for level {level} (known: 1..{len(self.r_seq)})")
        return self.r_seq[level - 1]

    def triple(self, level: int):
        r = self.r(level)
        return (r, r, 1 - 2 * r)

    @property
    def is_symmetric(self) -> bool:
        return True

    @property
    def is_rational(self) -> bool:
        return all(not isinstance(r, Interval) for r in self.r_seq)

    @property
    def max_level(self) -> int:
        return len(self.r_seq)

    def refined(self, prec: int) -> "GeneralizedSymmetricBernoulli":
        if self.refine is None:
            raise PrecisionError("this measure has no refinement procedure")
        return GeneralizedSymmetricBernoulli(tuple(self.refine(prec)), self.refine)

    def describe(self) -> str:
        return f"gen:levels={len(self.r_seq)}"


# -- digit levels ----------------------------------------------------------


def function_digit_level(k: int) -> int:
    """Level of the ``k``-th label (0-based) of a representing-function word."""
    return (k + 2).bit_length() - 1


def digit_levels(word: str, layout: str = FUNCTION) -> list[int]:
    if layout == FUNCTION:
        return [function_digit_level(k) for k in range(len(word))]
    if layout == CLOSED_SET:
        from .trees import code_node_depths

        return [d + 1 for d in code_node_depths(word)]
    raise MeasureError(f"unknown layout {layout!r}; expected one of {LAYOUTS}")


def _check_word(word: str) -> None:
    if any(c not in "012" for c in word):
        raise MeasureError(f"code words use digits 0, 1, 2 only: {word!r}")


def cylinder_measure(m: MeasureSpec, word: str, layout: str = FUNCTION) -> ExactProb:
    """Measure of the set of infinite code words extending ``word``."""
    _check_word(word)
    value: ExactProb = Fraction(1)
    for digit, level in zip(word, digit_levels(word, layout)):
        value = value * m.triple(level)[int(digit)]
    return value


def approx_measure(m: MeasureSpec, word: str, i: int, layout: str = FUNCTION) -> Fraction:
    """A dyadic rational within ``2**-i`` of the cylinder measure.

    The output is the midpoint of the grid cell ``[k/2**i, (k+1)/2**i)`` that
    contains the value (or the midpoint of its enclosure), so it has
    denominator ``2**(i+1)``.
    """
    if i < 0:
        raise ValueError("precision index must be nonnegative")
    value = cylinder_measure(m, word, layout)
    if width(value) > Fraction(1, 1 << (i + 2)):
        if not isinstance(m, GeneralizedSymmetricBernoulli):
            raise PrecisionError("enclosure too wide")
        value = cylinder_measure(m.refined(i + 16), word, layout)
        if width(value) > Fraction(1, 1 << (i + 2)):
            raise PrecisionError("refinement did not reach the requested precision")
    center = midpoint(value)
    k = (center.numerator << i) // center.denominator
    return Fraction(2 * k + 1, 1 << (i + 1))


# -- sampling --------------------------------------------------------------

_MAX_SAMPLING_WIDTH = Fraction(1, 1 << 53)


def sampling_thresholds(m: MeasureSpec, level: int) -> tuple[float, float]:
    """Cumulative cut points ``(p0, p0 + p1)`` as doubles.

    Interval parameters are replaced by their midpoints, which is only
    allowed once they are known to within ``2**-53``.
    """
    p0, p1, _ = m.triple(level)
    if max(width(p0), width(p1)) > _MAX_SAMPLING_WIDTH:
        raise PrecisionError(f"level-{level} parameters must be known to 2**-53 before sampling")
    t0 = midpoint(p0)
    return float(t0), float(t0 + midpoint(p1))


def digits_from_uniforms(u: np.ndarray, t0, t1) -> np.ndarray:
    """Map uniforms to digits: ``u < t0`` -> 0, ``u < t1`` -> 1, else 2."""
    return np.where(u < t0, 0, np.where(u < t1, 1, 2)).astype(np.int8)


def sample_digits(
    m: MeasureSpec, count: int, seed: int, layout: str = FUNCTION, stream: int = 0
) -> str:
    """``count`` digits drawn from ``m``; a pure function of its arguments."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    if layout == FUNCTION:
        levels = np.array([function_digit_level(k) for k in range(count)], dtype=np.int64)
        u = rng.uniforms(rng.stream_keys(seed, [stream]), np.arange(count))
        out = np.empty(count, dtype=np.int8)
        for level in np.unique(levels):
            t0, t1 = sampling_thresholds(m, int(level))
            mask = levels == level
            out[mask] = digits_from_uniforms(u[mask], t0, t1)
        return "".join(map(str, out.tolist()))
    if layout == CLOSED_SET:
        key = rng.stream_keys(seed, [stream])
        u = rng.uniforms(key, np.arange(count))
        digits = []
        queue = deque([0])
        cache: dict[int, tuple[float, float]] = {}
        for k in range(count):
            depth = queue.popleft()
            level = depth + 1
            if level not in cache:
                cache[level] = sampling_thresholds(m, level)
            t0, t1 = cache[level]
            d = 0 if u[k] < t0 else (1 if u[k] < t1 else 2)
            digits.append(str(d))
            queue.extend([depth + 1] * (2 if d == 2 else 1))
        return "".join(digits)
    raise MeasureError(f"unknown layout {layout!r}")


# -- parsing ---------------------------------------------------------------


def read_parameter_csv(path: str | Path) -> tuple[Fraction, ...]:
    """Per-level parameters: lines ``a/b`` (levels 1, 2, ...) or ``n,a/b``."""
    values: dict[int, Fraction] = {}
    nxt = 1
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            row = [c.strip() for c in row if c.strip()]
            if not row or row[0].startswith("#") or row[0] in ("n", "level"):
                continue
            if len(row) == 1:
                values[nxt] = parse_rational(row[0])
            else:
                values[int(row[0])] = parse_rational(row[1])
            nxt = max(values) + 1
    levels = sorted(values)
    if levels != list(range(1, len(levels) + 1)):
        raise MeasureError(f"levels in {path} must be 1..n without gaps")
    return tuple(values[k] for k in levels)


def parse_measure(text: str) -> MeasureSpec:
    """Parse ``sym:r=1/3``, ``triple:1/4,1/4,1/2``, ``gen:file=PATH``,
    ``gen:r=1/2,2/5,...`` or ``gen:standard[,n=K]``."""
    text = text.strip()
    if text in ("uniform", "standard"):
        return UNIFORM
    if text == "online":
        return ONLINE
    kind, _, rest = text.partition(":")
    if kind == "sym":
        m = re.fullmatch(r"r=(.+)", rest)
        if not m:
            raise MeasureError(f"expected sym:r=a/b, got {text!r}")
        return SymmetricBernoulli(parse_rational(m.group(1)))
    if kind == "triple":
        parts = rest.split(",")
        if len(parts) != 3:
            raise MeasureError(f"expected triple:p0,p1,p2, got {text!r}")
        return Bernoulli(*(parse_rational(p) for p in parts))
    if kind == "gen":
        if rest.startswith("file="):
            return GeneralizedSymmetricBernoulli(read_parameter_csv(rest[len("file="):]))
        if rest.startswith("r="):
            return GeneralizedSymmetricBernoulli(
                tuple(parse_rational(p) for p in rest[2:].split(","))
            )
        if rest.startswith("standard"):
            m = re.fullmatch(r"standard(?:,n=(\d+))?", rest)
            if not m:
                raise MeasureError(f"expected gen:standard[,n=K], got {text!r}")
            from .capacity import standard_closed_set_params

            return standard_closed_set_params(int(m.group(1) or 32), DEFAULT_PRECISION)
    raise MeasureError(f"unrecognized measure {text!r}")
