"""Hitting probabilities, capacities and the capacity-to-measure inversion.

Most quantities here are probabilities that a random labeled binary tree has a
path with some property.  Depth-``n`` values come from exact recurrences; the
limits from closed forms.  Recurrences whose denominators explode (they double
in size every step) switch to dyadic intervals after a few dozen terms, see
:func:`randlab.exact.tame`.
"""

from __future__ import annotations

import functools
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, Sequence

from .exact import (
    DEFAULT_PRECISION,
    EXACT_BITS,
    ExactProb,
    Interval,
    as_interval,
    exact_sqrt,
    is_exact,
    log2,
    lower,
    map_increasing,
    neg_log2,
    tame,
    upper,
)
from .functions import Semantics
from .measures import (
    CLOSED_SET,
    UNIFORM,
    GeneralizedSymmetricBernoulli,
    MeasureSpec,
    SymmetricBernoulli,
    sample_digits,
)
from .trees import PrunedTree, code_node_depths

ONE = Fraction(1)
HALF = Fraction(1, 2)


class CapacityError(ValueError):
    pass


class InvalidCapacity(CapacityError):
    """The sequence is not the hitting sequence of any symmetric measure."""


class DiscontinuityError(CapacityError):
    """r = 0: the closed form's limit is not the value of the measure."""


class NullPrefix(CapacityError):
    """A code prefix of measure zero."""


def _check_unit(x: Fraction, name: str, hi: Fraction = ONE) -> Fraction:
    x = Fraction(x)
    if not 0 <= x <= hi:
        raise CapacityError(f"{name}={x} outside [0, {hi}]")
    return x


# -- hitting sequences -------------------------------------------------------


@dataclass(frozen=True)
class QuadraticStep:
    """The map ``x -> a1*x + a2*x**2`` that generates a hitting sequence."""

    a1: Fraction
    a2: Fraction

    def __call__(self, x: Fraction) -> Fraction:
        return x * (self.a1 + self.a2 * x)

    def complement_root(self) -> Fraction | None:
        """``c`` with ``1 - step(x) == (1 - c*x)**2`` identically, if one exists."""
        c = self.a1 / 2
        return c if self.a2 == -c * c else None


@dataclass(frozen=True)
class HittingSequence:
    """``values[n]`` is the depth-``n`` probability, ``values[0] == 1``.

    When the sequence is the orbit of a :class:`QuadraticStep` from
    ``values[0]``, the step is kept: two orbits of the same step from the same
    seed are equal term by term even where the terms are only enclosed.
    """

    values: tuple
    step: QuadraticStep | None = None

    def __post_init__(self):
        if not self.values or self.values[0] != 1:
            raise CapacityError("a hitting sequence starts with p_0 = 1")
        for k in range(len(self.values) - 1):
            a, b = self.values[k], self.values[k + 1]
            if lower(b) < 0 or lower(b) > upper(a):
                raise CapacityError(f"p_{k + 1} is not in [0, p_{k}]")

    def __getitem__(self, n):
        return self.values[n]

    def __len__(self) -> int:
        return len(self.values)

    def __iter__(self):
        return iter(self.values)

    @property
    def n(self) -> int:
        return len(self.values) - 1

    def same_orbit(self, other: "HittingSequence") -> bool:
        return self.step is not None and self.step == other.step and self.values[0] == other.values[0]

    def exact_prefix(self) -> tuple:
        out = []
        for v in self.values:
            if not is_exact(v):
                break
            out.append(v)
        return tuple(out)


def _orbit(step: Callable, n: int, prec: int, exact_bits: int) -> tuple:
    x: ExactProb = ONE
    values = [x]
    for _ in range(n):
        # the steps used here are nondecreasing on [0, 1]
        x = tame(map_increasing(x, step), prec, exact_bits)
        values.append(x)
    return tuple(values)


def survival_sequence(
    p, n: int, prec: int = DEFAULT_PRECISION, exact_bits: int = EXACT_BITS
) -> HittingSequence:
    """``q_0 = 1``, ``q_{k+1} = 2p q_k - p**2 q_k**2``.

    ``q_k`` is the probability that a depth-``k`` tree whose node labels are
    independently "good" with probability ``p`` has an all-good path.
    """
    p = _check_unit(p, "p")
    step = QuadraticStep(2 * p, -p * p)
    return HittingSequence(_orbit(step, n, prec, exact_bits), step)


def survival_fixed_point(p) -> Fraction:
    p = _check_unit(p, "p")
    return Fraction(0) if p <= HALF else (2 * p - 1) / (p * p)


def partial_measure(r) -> int:
    """Probability that a random delayed-output function is partial (0 or 1)."""
    r = _check_unit(r, "r", HALF)
    return 1 if r < Fraction(1, 4) else 0


def hit_probability_closed_form(r) -> Fraction:
    """Probability that the range of a μ_r-random function contains a fixed real."""
    r = _check_unit(r, "r", HALF)
    if r == 0:
        raise DiscontinuityError(
            "r = 0 gives the everywhere-delaying function, whose range is empty; "
            "the formula's limit 1 does not apply"
        )
    return (1 - 2 * r) / (1 - r) ** 2


def domain_nonempty_probability(r) -> Fraction:
    """Probability that a random partial online function is defined somewhere."""
    r = _check_unit(r, "r", HALF)
    if r < Fraction(1, 4):
        return Fraction(0)
    return (4 * r - 1) / (4 * r * r)


ONLINE_STEP = QuadraticStep(ONE, Fraction(-1, 4))


def _online_step(x: Fraction) -> Fraction:
    return x * (1 - x / 4)


@functools.lru_cache(maxsize=32)
def online_hitting_sequence(
    n: int, prec: int = DEFAULT_PRECISION, exact_bits: int = EXACT_BITS
) -> HittingSequence:
    """``p_0 = 1``, ``p_{k+1} = p_k (1 - p_k/4)``: a random online function hits ``⟦σ⟧``, ``|σ| = k``."""
    return HittingSequence(_orbit(_online_step, n, prec, exact_bits), ONLINE_STEP)


def geometric_sequence(ratio, n: int) -> HittingSequence:
    ratio = _check_unit(ratio, "ratio")
    return HittingSequence(tuple(ratio**k for k in range(n + 1)))


def sequences_agree(a: HittingSequence, b: HittingSequence) -> bool:
    """Term-by-term equality, decided exactly.

    Exact terms are compared as rationals; enclosed terms must come from the
    same generating step and seed.  Overlap of enclosures alone never counts.
    """
    if len(a) != len(b):
        return False
    for x, y in zip(a, b):
        if is_exact(x) and is_exact(y):
            if x != y:
                return False
        elif not (a.same_orbit(b) and as_interval(x).overlaps(y)):
            return False
    return True


# -- finite-depth cylinder hitting --------------------------------------------


def cylinder_hitting_probability(
    m: MeasureSpec,
    target: str,
    depth: int,
    semantics=Semantics.DELAY,
    prec: int = DEFAULT_PRECISION,
    exact_bits: int = EXACT_BITS,
) -> ExactProb:
    """Probability that a random function's depth-``depth`` range meets ``⟦target⟧``.

    The function's labels are drawn from ``m`` (level = node depth).  Under
    DELAY semantics a path counts once it has emitted ``target``; under
    PARTIAL_ONLINE it must also stay defined down to ``depth``.
    """
    semantics = Semantics(semantics)
    if any(c not in "01" for c in target):
        raise ValueError("target must be a bit string")
    k = len(target)
    if k > depth:
        raise ValueError(f"target length {k} exceeds depth {depth}")
    if semantics is Semantics.ONLINE:
        for level in range(1, depth + 1):
            if upper(m.triple(level)[2]) > 0:
                raise CapacityError("online semantics needs a measure without digit 2")
    # h[i] = success probability below a node at the current depth with i bits matched
    h: list[ExactProb] = [Fraction(0)] * k + [ONE]
    for d in range(depth - 1, -1, -1):
        p0, p1, p2 = m.triple(d + 1)
        nxt: list[ExactProb] = []
        for i in range(k + 1):
            if i == k and semantics is not Semantics.PARTIAL_ONLINE:
                nxt.append(ONE)
                continue
            if i == k:
                s = (p0 + p1) * h[k]
            else:
                s = (p0 if target[i] == "0" else p1) * h[i + 1]
                if semantics is Semantics.DELAY:
                    s = s + p2 * h[i]
            nxt.append(tame(map_increasing(s, lambda t: 1 - (1 - t) ** 2), prec, exact_bits))
        h = nxt
    return h[0]


# -- capacities of clopen sets ----------------------------------------------


def capacity_from_bernoulli_code_measure(m: MeasureSpec, target: PrunedTree) -> ExactProb:
    """Probability that a closed set with code distributed as ``m`` meets ``target``.

    The code digit of a node at depth ``d`` has level ``d + 1``; subtrees are
    independent, so the value follows from one pass up the target tree.
    """
    if target.is_empty:
        return Fraction(0)
    if target.dead_ends():
        raise CapacityError(f"target tree has dead ends: {target.dead_ends()[:4]}")
    depth = target.depth
    triples = [m.triple(d + 1) for d in range(depth)]

    def cap(s: str) -> ExactProb:
        if len(s) == depth:
            return ONE
        a = cap(s + "0") if s + "0" in target else Fraction(0)
        b = cap(s + "1") if s + "1" in target else Fraction(0)
        p0, p1, p2 = triples[len(s)]
        return p2 * (1 - (1 - a) * (1 - b)) + p0 * a + p1 * b

    return cap("")


@dataclass(frozen=True)
class CapacityFn:
    """Capacity of the closed set coded by a Bernoulli code measure."""

    measure: MeasureSpec

    def __call__(self, target: PrunedTree) -> ExactProb:
        return capacity_from_bernoulli_code_measure(self.measure, target)


STANDARD_CAPACITY = CapacityFn(UNIFORM)


@dataclass(frozen=True)
class AlternatingResult:
    ok: bool
    slack: ExactProb
    lhs: ExactProb
    rhs: ExactProb


def alternating_check(T: Callable[[PrunedTree], ExactProb], sets: Sequence[PrunedTree], max_sets: int = 4):
    """Check ``T(⋂Q_i) <= Σ_{∅≠I} (-1)**(|I|+1) T(⋃_{i∈I} Q_i)``; slack = rhs - lhs."""
    sets = list(sets)
    if not 2 <= len(sets) <= max_sets:
        raise ValueError(f"need between 2 and {max_sets} sets, got {len(sets)}")
    inter = sets[0]
    for q in sets[1:]:
        inter = inter.intersection(q)
    lhs = T(inter)
    rhs: ExactProb = Fraction(0)
    for size in range(1, len(sets) + 1):
        sign = 1 if size % 2 else -1
        for idx in combinations(range(len(sets)), size):
            u = sets[idx[0]]
            for i in idx[1:]:
                u = u.union(sets[i])
            rhs = rhs + sign * T(u)
    slack = rhs - lhs
    return AlternatingResult(lower(slack) >= 0, slack, lhs, rhs)


# -- inversion ----------------------------------------------------------------


def _inversion_step(pk: ExactProb, pk1: ExactProb, c: Fraction | None, prec: int) -> ExactProb:
    """``r = p_{k+1} / (p_k (1 + sqrt(1 - p_{k+1})))``."""
    if lower(pk) <= 0 and upper(pk) <= 0:
        raise InvalidCapacity("hitting probabilities must be positive")
    if is_exact(pk1):
        root = exact_sqrt(1 - pk1)
        if root is None:
            root = as_interval(1 - pk1, prec).sqrt()
    elif c is not None:
        # p_{k+1} = step(p_k) and 1 - step(x) = (1 - c x)**2, so r = c exactly
        return c
    else:
        root = (1 - pk1).with_precision(prec).sqrt()
    r = pk1 / (pk * (1 + root))
    if isinstance(r, Interval):
        r = r.with_precision(prec)
    return r


def _invert_values(values: Sequence[ExactProb], n: int, prec: int, c: Fraction | None) -> tuple:
    if len(values) < n + 1:
        raise CapacityError(f"need p_0..p_{n}, got {len(values)} terms")
    if values[0] != 1:
        raise InvalidCapacity("p_0 must be 1")
    out = []
    for k in range(n):
        pk, pk1 = values[k], values[k + 1]
        if lower(pk1) <= 0 and upper(pk1) <= 0:
            raise InvalidCapacity(f"p_{k + 1} = 0; the sequence must stay positive")
        if lower(pk1) > upper(pk):
            raise InvalidCapacity(f"p_{k + 1} > p_{k}; the sequence must be nonincreasing")
        r = _inversion_step(pk, pk1, c, prec)
        if upper(r) > HALF:
            raise InvalidCapacity(
                f"r_{k + 1} = {r} exceeds 1/2 (or cannot be certified below it); "
                "no symmetric measure has this hitting sequence"
            )
        out.append(r)
    return tuple(out)


def invert_capacity_to_params(
    p: HittingSequence | Sequence[ExactProb], n: int, prec: int = DEFAULT_PRECISION
) -> GeneralizedSymmetricBernoulli:
    """Level parameters ``r_1..r_n`` of the symmetric measure with hitting sequence ``p``.

    Each ``r_{k+1}`` is the smaller root of ``p_{k+1} = 2 p_k r - p_k**2 r**2``.
    Rational square roots are taken exactly; otherwise the result is a
    dyadic interval at ``prec`` bits.
    """
    step = p.step if isinstance(p, HittingSequence) else None
    c = step.complement_root() if step is not None else None
    values = tuple(p)
    r = _invert_values(values, n, prec, c)
    refine = None
    if all(is_exact(v) for v in values[: n + 1]):
        refine = functools.partial(_refine, values[: n + 1], n, c)
    return GeneralizedSymmetricBernoulli(r, refine)


def _refine(values, n, c, prec):
    return _invert_values(values, n, prec, c)


def forward_substitute(m: GeneralizedSymmetricBernoulli, n: int, prec: int = DEFAULT_PRECISION) -> tuple:
    """``p_0 = 1``, ``p_{k+1} = 2 p_k r_{k+1} - (p_k r_{k+1})**2``, using only the parameters."""
    p: ExactProb = ONE
    out = [p]
    for k in range(1, n + 1):
        x = p * m.r(k)
        p = map_increasing(x, lambda t: 1 - (1 - t) ** 2)
        if isinstance(p, Interval):
            p = p.with_precision(prec)
        out.append(p)
    return tuple(out)


def standard_closed_set_params(n: int, prec: int = DEFAULT_PRECISION) -> GeneralizedSymmetricBernoulli:
    """Parameters whose hitting sequence is ``(2/3)**k``, the uniform closed-set capacity."""
    return invert_capacity_to_params(geometric_sequence(Fraction(2, 3), n), n, prec)


def params_limit(ratio) -> Fraction:
    """Limit of ``r_n`` when ``p_{n+1}/p_n -> ratio``."""
    return _check_unit(ratio, "ratio") / 2


# -- online range codes and the martingale -----------------------------------


def _online_values(n: int):
    # grow in chunks so repeated queries share one cached sequence
    size = 64
    while size < n:
        size *= 2
    return online_hitting_sequence(size)


def range_code_conditionals(n: int, hitting: HittingSequence | None = None):
    """Digit probabilities ``(p_n/4, p_n/4, 1 - p_n/2)`` at a code node of depth ``n``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    seq = hitting if hitting is not None else _online_values(n)
    p = seq[n]
    return (p / 4, p / 4, 1 - p / 2)


@functools.lru_cache(maxsize=256)
def _default_conditionals(n: int) -> tuple:
    return range_code_conditionals(n)


@functools.lru_cache(maxsize=256)
def _default_bets(n: int) -> tuple:
    # (1/3) / ν(i | depth n), zero where ν puts no mass
    return tuple(Fraction(1, 3) / c if c else None for c in _default_conditionals(n))


def _conditionals(n: int, hitting: HittingSequence | None):
    return _default_conditionals(n) if hitting is None else range_code_conditionals(n, hitting)


def nu_measure(word: str, hitting: HittingSequence | None = None, prec: int | None = None) -> ExactProb:
    """Tree-Markov measure of a code prefix under the range-code conditionals."""
    value: ExactProb = ONE
    for digit, depth in zip(word, code_node_depths(word)):
        c = _conditionals(depth, hitting)[int(digit)]
        if prec is not None:
            c = as_interval(c, prec)
        value = value * c
    return value


def martingale_value(
    code_prefix: str, hitting: HittingSequence | None = None, prec: int | None = None
) -> ExactProb:
    """``d(w) = μ(w)/ν(w)`` with μ uniform on ternary codes.

    Built one digit at a time, ``d(wi) = d(w) * (1/3) / ν(i | node depth)``.
    With ``prec`` the conditionals are enclosed in intervals, which keeps
    long words cheap.
    """
    depths = code_node_depths(code_prefix)
    if hitting is None and prec is None:
        d = ONE
        for digit, depth in zip(code_prefix, depths):
            bet = _default_bets(depth)[int(digit)]
            if bet is None:
                raise NullPrefix(f"{code_prefix!r} has ν-measure zero")
            d = d * bet
        return d
    third = Fraction(1, 3) if prec is None else as_interval(Fraction(1, 3), prec)
    d: ExactProb = ONE
    for digit, depth in zip(code_prefix, depths):
        c = _conditionals(depth, hitting)[int(digit)]
        if upper(c) == 0:
            raise NullPrefix(f"{code_prefix!r} has ν-measure zero")
        if prec is not None:
            c = as_interval(c, prec)
        d = d * third / c
        if isinstance(d, Interval):
            d = d.with_precision(prec)
    return d


@functools.lru_cache(maxsize=8)
def _log2_conditionals(n: int, prec: int) -> tuple:
    """``log2 ν(i | depth)`` enclosures for depths ``0..n``."""
    seq = _online_values(n)
    return tuple(
        tuple(log2(c, prec) for c in range_code_conditionals(depth, seq)) for depth in range(n + 1)
    )


def martingale_log2(code_prefix: str, prec: int = DEFAULT_PRECISION) -> ExactProb:
    """``log2 d(w)``, summed digit by digit from cached logarithm enclosures."""
    depths = code_node_depths(code_prefix)
    table = _log2_conditionals(max(depths, default=0), prec)
    log3 = as_interval(log2(Fraction(3), prec))
    # endpoint sums of dyadic enclosures are exact, so group equal terms first
    lo = hi = Fraction(0)
    for (digit, depth), count in Counter(zip(code_prefix, depths)).items():
        c = as_interval(table[depth][int(digit)])
        lo -= count * (log3.hi + c.hi)
        hi -= count * (log3.lo + c.lo)
    return lo if lo == hi else Interval.enclose(lo, hi, prec)


def sample_martingale_paths(paths: int, length: int, seed: int, prec: int = DEFAULT_PRECISION) -> list:
    """``log2 d(x↾length)`` along ``paths`` uniformly random code words (stream = path index)."""
    return [
        martingale_log2(sample_digits(UNIFORM, length, seed, CLOSED_SET, stream=i), prec)
        for i in range(paths)
    ]


# -- order function and complexity bound -------------------------------------


@dataclass(frozen=True)
class OrderFunction:
    """``f(n) = -log2 p_n`` as exact values or dyadic enclosures."""

    values: tuple

    def __getitem__(self, n):
        return self.values[n]

    def __len__(self) -> int:
        return len(self.values)

    def is_nondecreasing(self) -> bool:
        """Certified: every enclosure lies entirely above (or at) its predecessor."""
        return all(lower(b) >= upper(a) or a == b for a, b in zip(self.values, self.values[1:]))

    def first_exceeding(self, t) -> int | None:
        for n, v in enumerate(self.values):
            if lower(v) > t:
                return n
        return None


def order_function(p: HittingSequence | Sequence[ExactProb], prec: int = DEFAULT_PRECISION) -> OrderFunction:
    values = []
    for n, v in enumerate(p):
        if upper(v) <= 0:
            raise CapacityError(f"p_{n} = 0 has no logarithm")
        values.append(neg_log2(v, prec))
    return OrderFunction(tuple(values))


def complexity_bound(p: HittingSequence | Sequence[ExactProb], n: int, c: int, prec: int = DEFAULT_PRECISION):
    """``-log2 p_n - c``: initial segments of members need at least this much complexity."""
    v = p[n]
    if upper(v) <= 0:
        raise CapacityError(f"p_{n} = 0")
    return neg_log2(v, prec) - c


def symmetric_cylinder_capacity(r) -> Callable[[int], ExactProb]:
    """Cylinder capacity of the symmetric closed-set measure: ``n -> T(⟦σ⟧)``, ``|σ| = n``."""
    m = SymmetricBernoulli(r)

    def cap(n: int) -> ExactProb:
        return capacity_from_bernoulli_code_measure(m, PrunedTree.from_leaves(["0" * n], n))

    return cap
