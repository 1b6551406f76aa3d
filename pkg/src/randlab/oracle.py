"""Exact event probabilities by exhaustive enumeration of labelings.

A labeling assigns a digit to every node ``σ`` with ``1 <= |σ| <= depth``;
its probability under a measure is ``Π p_{|σ|}(f(σ))``.  Instead of summing
Fractions labeling by labeling, satisfying labelings are counted per
*signature* (how often each digit occurs on each level), which makes the
count table independent of the measure: the probability is
``Σ count(sig) * Π p_{level,digit} ** k``.

Two engines produce the tables.  Path events (some input path with a
property) run level by level: the frontier holds one state per current node,
labelings whose outcome is already decided leave the frontier, and frontier
rows with identical (sorted) state vectors and signatures are merged.  Range
code events enumerate every labeling in full.  Tables of both engines are
exact integers; the rational result is the same for any worker count.
"""

from __future__ import annotations

import itertools
import os
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exact import is_exact, upper
from .functions import RepresentingFunction, Semantics, evaluate, range_tree
from .measures import MeasureSpec
from .trees import decode_code, encode_closed_set, strings_of_length

TERNARY_DEPTH_CAP = 3
BINARY_DEPTH_CAP = 4
CAP_ENV = "RANDLAB_DEPTH_CAP"

# full enumeration (range codes) refuses tables larger than this many labelings
FULL_ENUMERATION_LIMIT = 1 << 22


class OracleError(ValueError):
    pass


class DepthCapError(OracleError):
    """Requested depth is beyond the configured enumeration cap."""


class IrrationalMeasure(OracleError):
    """The oracle only accepts measures with rational parameters."""


class UndeterminedEvent(OracleError):
    """The event is not decided by labels up to the given depth."""


class EventKind(str, Enum):
    EXISTS_ALL_A_PATH = "exists"
    HITS_CYLINDER = "hits"
    TOTAL_TO_DEPTH = "total"
    DOMAIN_NONEMPTY_TO_DEPTH = "domain-nonempty"
    RANGE_CODE_PREFIX = "range-code"


@dataclass(frozen=True)
class EventSpec:
    """An event about a random labeling of depth ``depth``.

    * ``EXISTS_ALL_A_PATH``: some input of length ``depth`` sees only labels in ``alphabet``;
    * ``HITS_CYLINDER``: some input's output (per ``semantics``) extends ``target``;
      under PARTIAL_ONLINE the input must stay defined to ``depth``;
    * ``TOTAL_TO_DEPTH``: every input has emitted an output bit by ``depth``;
    * ``DOMAIN_NONEMPTY_TO_DEPTH``: some input has no label 2 up to ``depth``;
    * ``RANGE_CODE_PREFIX``: the canonical code of the online range starts with ``word``.
    """

    kind: EventKind
    depth: int
    alphabet: frozenset = field(default=frozenset())
    target: str = ""
    semantics: Semantics = Semantics.DELAY
    word: str = ""

    def __post_init__(self):
        object.__setattr__(self, "kind", EventKind(self.kind))
        object.__setattr__(self, "semantics", Semantics(self.semantics))
        object.__setattr__(self, "alphabet", frozenset(int(a) for a in self.alphabet))
        if self.depth < 0:
            raise OracleError("depth must be nonnegative")
        if not self.alphabet <= {0, 1, 2}:
            raise OracleError("alphabet must be a subset of {0, 1, 2}")
        if any(c not in "01" for c in self.target):
            raise OracleError("target must be a bit string")
        if any(c not in "012" for c in self.word):
            raise OracleError("code words use digits 0, 1, 2")
        if self.kind is EventKind.HITS_CYLINDER and len(self.target) > self.depth:
            raise OracleError(f"target {self.target!r} is longer than depth {self.depth}")

    @classmethod
    def exists_all_a_path(cls, alphabet, depth: int) -> "EventSpec":
        return cls(EventKind.EXISTS_ALL_A_PATH, depth, alphabet=frozenset(alphabet))

    @classmethod
    def hits_cylinder(cls, target: str, semantics, depth: int) -> "EventSpec":
        return cls(EventKind.HITS_CYLINDER, depth, target=target, semantics=semantics)

    @classmethod
    def total_to_depth(cls, depth: int) -> "EventSpec":
        return cls(EventKind.TOTAL_TO_DEPTH, depth)

    @classmethod
    def domain_nonempty_to_depth(cls, depth: int) -> "EventSpec":
        return cls(EventKind.DOMAIN_NONEMPTY_TO_DEPTH, depth)

    @classmethod
    def range_code_prefix(cls, word: str, depth: int) -> "EventSpec":
        return cls(EventKind.RANGE_CODE_PREFIX, depth, word=word, semantics=Semantics.ONLINE)

    @classmethod
    def parse(cls, text: str, depth: int, semantics=Semantics.DELAY) -> "EventSpec":
        """``hits:00``, ``exists:02``, ``total``, ``domain-nonempty``, ``range-code:20``."""
        kind, _, arg = text.strip().partition(":")
        if kind == "hits":
            return cls.hits_cylinder(arg, semantics, depth)
        if kind == "exists":
            return cls.exists_all_a_path({int(c) for c in arg}, depth)
        if kind == "total":
            return cls.total_to_depth(depth)
        if kind == "domain-nonempty":
            return cls.domain_nonempty_to_depth(depth)
        if kind == "range-code":
            return cls.range_code_prefix(arg, depth)
        raise OracleError(f"unknown event {text!r}")

    def with_depth(self, depth: int) -> "EventSpec":
        return EventSpec(self.kind, depth, self.alphabet, self.target, self.semantics, self.word)

    def describe(self) -> str:
        k = self.kind
        if k is EventKind.EXISTS_ALL_A_PATH:
            arg = "".join(map(str, sorted(self.alphabet)))
            return f"exists:{arg}@{self.depth}"
        if k is EventKind.HITS_CYLINDER:
            return f"hits:{self.target}[{self.semantics.value}]@{self.depth}"
        if k is EventKind.RANGE_CODE_PREFIX:
            return f"range-code:{self.word}@{self.depth}"
        return f"{k.value}@{self.depth}"


# -- configuration -----------------------------------------------------------


def depth_cap(alphabet_size: int) -> int:
    env = os.environ.get(CAP_ENV)
    if env:
        return int(env)
    return TERNARY_DEPTH_CAP if alphabet_size >= 3 else BINARY_DEPTH_CAP


def support_alphabets(m: MeasureSpec, depth: int) -> tuple:
    """Digits of positive probability on levels ``1..depth``."""
    if depth and m.max_level is not None and m.max_level < depth:
        raise OracleError(f"measure has parameters only up to level {m.max_level}")
    out = []
    for level in range(1, depth + 1):
        triple = m.triple(level)
        if not all(is_exact(p) for p in triple):
            raise IrrationalMeasure("the oracle needs rational digit probabilities")
        out.append(tuple(d for d, p in enumerate(triple) if upper(p) > 0))
    return tuple(out)


def _check_depth(depth: int, alphabets: tuple) -> None:
    size = max((len(a) for a in alphabets), default=1)
    cap = depth_cap(size)
    if depth > cap:
        raise DepthCapError(
            f"depth {depth} exceeds the cap {cap} for a {size}-letter alphabet "
            f"(set {CAP_ENV} to override)"
        )


# -- signatures ----------------------------------------------------------------


@dataclass(frozen=True)
class Signature:
    """Mixed-radix encoding of per-(level, digit) label counts as one integer."""

    depth: int

    @property
    def bases(self) -> dict:
        out = {}
        base = 1
        for level in range(1, self.depth + 1):
            for d in range(3):
                out[(level, d)] = base
                base *= (1 << level) + 1
        return out

    def decode(self, key: int) -> dict:
        counts = {}
        for level in range(1, self.depth + 1):
            for d in range(3):
                key, c = divmod(key, (1 << level) + 1)
                counts[(level, d)] = c
        return counts

    def weight(self, key: int, m: MeasureSpec) -> Fraction:
        w = Fraction(1)
        for (level, d), c in self.decode(key).items():
            if c:
                w *= m.triple(level)[d] ** c
        return w


def _level_combos(alphabet: tuple, nodes: int) -> np.ndarray:
    return np.array(list(itertools.product(alphabet, repeat=nodes)), dtype=np.int8).reshape(-1, nodes)


def _combo_keys(combos: np.ndarray, level: int, sig: Signature) -> np.ndarray:
    bases = sig.bases
    keys = np.zeros(len(combos), dtype=np.int64)
    for d in range(3):
        keys += (combos == d).sum(axis=1).astype(np.int64) * bases[(level, d)]
    return keys


# -- path automata -------------------------------------------------------------


@dataclass(frozen=True)
class PathAutomaton:
    """Per-path state machine; ``table[state, digit]`` is the next state."""

    table: np.ndarray
    init: int
    accept: np.ndarray
    dead: int
    success: int | None = None


def path_automaton(e: EventSpec) -> PathAutomaton:
    if e.kind in (EventKind.EXISTS_ALL_A_PATH, EventKind.TOTAL_TO_DEPTH, EventKind.DOMAIN_NONEMPTY_TO_DEPTH):
        if e.kind is EventKind.TOTAL_TO_DEPTH:
            good = {2}
        elif e.kind is EventKind.DOMAIN_NONEMPTY_TO_DEPTH:
            good = {0, 1}
        else:
            good = e.alphabet
        table = np.array([[0 if d in good else 1 for d in range(3)], [1, 1, 1]], dtype=np.int8)
        return PathAutomaton(table, 0, np.array([True, False]), dead=1)
    if e.kind is EventKind.HITS_CYLINDER:
        k = len(e.target)
        dead, n_states = k + 1, k + 2
        table = np.full((n_states, 3), dead, dtype=np.int8)
        for i in range(k):
            table[i, int(e.target[i])] = i + 1
            if e.semantics is Semantics.DELAY:
                table[i, 2] = i
        accept = np.zeros(n_states, dtype=bool)
        accept[k] = True
        if e.semantics is Semantics.PARTIAL_ONLINE:
            # matched paths must still avoid 2 down to the full depth
            table[k, 0] = table[k, 1] = k
            return PathAutomaton(table, 0, accept, dead)
        table[k, :] = k
        return PathAutomaton(table, 0, accept, dead, success=k)
    raise OracleError(f"{e.kind} is not a path event")


def _completions(alphabets: tuple, level: int) -> int:
    """Number of ways to label the levels below ``level``."""
    n = 1
    for lv in range(level + 1, len(alphabets) + 1):
        n *= len(alphabets[lv - 1]) ** (1 << lv)
    return n


def _merge(states: np.ndarray, keys: np.ndarray, counts: np.ndarray):
    states = np.sort(states, axis=1)
    table = np.concatenate([states.astype(np.int64), keys[:, None]], axis=1)
    uniq, inverse = np.unique(table, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    merged = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(merged, inverse, counts)
    return uniq[:, :-1].astype(np.int8), uniq[:, -1].copy(), merged


@dataclass
class Histogram:
    """Satisfying labelings grouped by signature.

    ``prefixes[key]`` counts labelings *decided* with that signature; a
    labeling decided above the bottom level stands for all its completions,
    which add nothing to its probability but are counted in ``satisfying``.
    """

    prefixes: Counter = field(default_factory=Counter)
    satisfying: int = 0

    def merge(self, other: "Histogram") -> None:
        self.prefixes.update(other.prefixes)
        self.satisfying += other.satisfying


def _add_decided(out: Histogram, keys: np.ndarray, counts: np.ndarray, mult: int) -> None:
    if len(keys) == 0:
        return
    uniq, inverse = np.unique(keys, return_inverse=True)
    sums = np.zeros(len(uniq), dtype=np.int64)
    np.add.at(sums, inverse.reshape(-1), counts)
    for k, c in zip(uniq.tolist(), sums.tolist()):
        out.prefixes[k] += c
        out.satisfying += c * mult


_BLOCK = 1 << 22


def _path_histogram(auto: PathAutomaton, alphabets: tuple, first_level: tuple | None = None) -> Histogram:
    """Satisfying-labeling counts per signature key.

    ``first_level`` optionally restricts the level-1 labelings to the given
    combo indices (used to split the work between processes).
    """
    depth = len(alphabets)
    out = Histogram()
    if depth == 0:
        if auto.accept[auto.init]:
            out.prefixes[0] += 1
            out.satisfying += 1
        return out
    sig = Signature(depth)
    states = np.full((1, 1), auto.init, dtype=np.int8)
    keys = np.zeros(1, dtype=np.int64)
    counts = np.ones(1, dtype=np.int64)
    for level in range(1, depth + 1):
        nodes = 1 << level
        combos = _level_combos(alphabets[level - 1], nodes)
        if level == 1 and first_level is not None:
            combos = combos[list(first_level)]
        combo_keys = _combo_keys(combos, level, sig)
        parent = np.arange(nodes) // 2
        final = level == depth
        new_states, new_keys, new_counts = [], [], []
        rows_per_block = max(1, _BLOCK // max(1, len(combos) * nodes))
        for start in range(0, len(states), rows_per_block):
            st = states[start : start + rows_per_block]
            rows = len(st)
            # child state = table[parent state, child label], for every (row, combo)
            ps = np.repeat(st[:, parent], len(combos), axis=0)
            labels = np.tile(combos, (rows, 1))
            cs = auto.table[ps, labels]
            ks = np.repeat(keys[start : start + rows], len(combos)) + np.tile(combo_keys, rows)
            ns = np.repeat(counts[start : start + rows], len(combos))
            if final:
                hit = auto.accept[cs].any(axis=1)
                _add_decided(out, ks[hit], ns[hit], 1)
                continue
            alive = ~(cs == auto.dead).all(axis=1)
            if auto.success is not None:
                won = (cs == auto.success).any(axis=1)
                _add_decided(out, ks[won], ns[won], _completions(alphabets, level))
                alive &= ~won
            new_states.append(cs[alive])
            new_keys.append(ks[alive])
            new_counts.append(ns[alive])
        if final:
            break
        if not new_states or sum(len(s) for s in new_states) == 0:
            break
        states, keys, counts = _merge(
            np.concatenate(new_states), np.concatenate(new_keys), np.concatenate(new_counts)
        )
    return out


# -- full enumeration (range codes) ---------------------------------------------


def _all_labelings(alphabets: tuple):
    depth = len(alphabets)
    sizes = [len(alphabets[lv - 1]) ** (1 << lv) for lv in range(1, depth + 1)]
    total = int(np.prod(sizes, dtype=object)) if sizes else 1
    if total > FULL_ENUMERATION_LIMIT:
        raise DepthCapError(f"{total} labelings exceed the full-enumeration limit")
    per_level = [list(itertools.product(alphabets[lv - 1], repeat=1 << lv)) for lv in range(1, depth + 1)]
    for parts in itertools.product(*per_level):
        yield tuple(itertools.chain.from_iterable(parts))


@lru_cache(maxsize=16)
def range_code_table(alphabets: tuple) -> dict:
    """``code -> Counter(signature key -> labelings)`` for online range codes.

    ``code`` is the canonical code of the range tree at the full depth, so it
    fixes every digit of nodes above the bottom level.
    """
    depth = len(alphabets)
    if any(2 in a for a in alphabets):
        raise OracleError("range codes are defined for online (binary) labelings")
    sig = Signature(depth)
    bases = sig.bases
    levels = [lv for lv in range(1, depth + 1) for _ in range(1 << lv)]
    table: dict = {}
    for labels in _all_labelings(alphabets):
        f = RepresentingFunction("".join(map(str, labels)), Semantics.ONLINE)
        code = encode_closed_set(range_tree(f, depth).tree) if depth else ""
        key = sum(bases[(lv, d)] for lv, d in zip(levels, labels))
        table.setdefault(code, Counter())[key] += 1
    return table


def _range_code_histogram(e: EventSpec, alphabets: tuple) -> Histogram:
    out = Histogram()
    for code, hist in range_code_table(alphabets).items():
        if code.startswith(e.word):
            out.prefixes.update(hist)
            out.satisfying += sum(hist.values())
        elif e.word.startswith(code):
            raise UndeterminedEvent(
                f"code prefix {e.word!r} runs past what depth {e.depth} determines ({code!r})"
            )
    return out


# -- public interface --------------------------------------------------------------


@dataclass(frozen=True)
class OracleResult:
    probability: Fraction
    satisfying: int
    labelings: int

    def to_json(self) -> dict:
        return {
            "probability": str(self.probability),
            "satisfying_labelings": self.satisfying,
            "labelings": self.labelings,
        }


def _split(n: int, parts: int) -> list:
    return [tuple(range(i, n, parts)) for i in range(parts) if i < n]


def event_histogram(e: EventSpec, alphabets: tuple, workers: int = 1) -> Histogram:
    _check_depth(e.depth, alphabets)
    if e.kind is EventKind.HITS_CYLINDER and e.semantics is Semantics.ONLINE:
        if any(2 in a for a in alphabets):
            raise OracleError("online semantics needs a measure without digit 2")
    if e.kind is EventKind.RANGE_CODE_PREFIX:
        return _range_code_histogram(e, alphabets)
    auto = path_automaton(e)
    if workers <= 1 or e.depth == 0:
        return _path_histogram(auto, alphabets)
    n_first = len(alphabets[0]) ** 2
    chunks = _split(n_first, workers)
    out = Histogram()
    with ProcessPoolExecutor(max_workers=len(chunks)) as pool:
        for part in pool.map(_path_histogram, [auto] * len(chunks), [alphabets] * len(chunks), chunks):
            out.merge(part)
    return out


def total_labelings(alphabets: tuple) -> int:
    return _completions(alphabets, 0)


def exact_event(m: MeasureSpec, e: EventSpec, workers: int = 1) -> OracleResult:
    alphabets = support_alphabets(m, e.depth)
    hist = event_histogram(e, alphabets, workers)
    sig = Signature(e.depth)
    prob = sum((c * sig.weight(k, m) for k, c in hist.prefixes.items()), Fraction(0))
    satisfying = hist.satisfying
    total = total_labelings(alphabets)
    if e.kind is EventKind.TOTAL_TO_DEPTH:
        # the automaton tracks the complement: some input sees only 2s
        if e.depth == 0:
            return OracleResult(Fraction(1), 1, 1)
        return OracleResult(1 - prob, total - satisfying, total)
    return OracleResult(prob, satisfying, total)


def exact_event_probability(m: MeasureSpec, e: EventSpec, workers: int = 1) -> Fraction:
    return exact_event(m, e, workers).probability


def _implies(a: EventSpec, b: EventSpec) -> bool:
    if a == b:
        return True
    return (
        a.kind is b.kind is EventKind.RANGE_CODE_PREFIX
        and a.depth == b.depth
        and a.word.startswith(b.word)
    )


def exact_conditional(m: MeasureSpec, given: EventSpec, event: EventSpec, workers: int = 1) -> Fraction:
    """``P(event | given)``.

    When ``event`` implies ``given`` (equal events, or a longer range-code
    prefix) this is a ratio of two oracle values; otherwise the joint is
    counted by brute-force evaluation of every labeling.
    """
    p_given = exact_event_probability(m, given, workers)
    if p_given == 0:
        raise OracleError("conditioning on an event of probability zero")
    if _implies(event, given):
        return exact_event_probability(m, event, workers) / p_given
    if event.depth != given.depth:
        raise OracleError("joint events must share a depth")
    alphabets = support_alphabets(m, event.depth)
    _check_depth(event.depth, alphabets)
    joint = Fraction(0)
    sig = Signature(event.depth)
    bases = sig.bases
    levels = [lv for lv in range(1, event.depth + 1) for _ in range(1 << lv)]
    for labels in _all_labelings(alphabets):
        if brute_force_event(given, labels) and brute_force_event(event, labels):
            joint += sig.weight(sum(bases[(lv, d)] for lv, d in zip(levels, labels)), m)
    return joint / p_given


# -- brute force evaluation of one labeling ---------------------------------------


def brute_force_event(e: EventSpec, labels) -> bool:
    """Decide ``e`` on one labeling (label word in length-lex order), input by input."""
    word = "".join(map(str, labels))
    inputs = list(strings_of_length(e.depth))
    if e.kind is EventKind.RANGE_CODE_PREFIX:
        f = RepresentingFunction(word, Semantics.ONLINE)
        code = encode_closed_set(range_tree(f, e.depth).tree) if e.depth else ""
        if e.word.startswith(code) and len(e.word) > len(code):
            raise UndeterminedEvent(e.word)
        return code.startswith(e.word)
    f = RepresentingFunction(word, Semantics.DELAY)
    along = {x: f.labels_along(x) for x in inputs}
    if e.kind is EventKind.EXISTS_ALL_A_PATH:
        return any(all(d in e.alphabet for d in along[x]) for x in inputs)
    if e.kind is EventKind.TOTAL_TO_DEPTH:
        return all(any(d != 2 for d in along[x]) for x in inputs) if e.depth else True
    if e.kind is EventKind.DOMAIN_NONEMPTY_TO_DEPTH:
        return any(all(d != 2 for d in along[x]) for x in inputs)
    g = f.with_semantics(e.semantics)
    for x in inputs:
        res = evaluate(g, x)
        if res.ok and res.output.startswith(e.target):
            return True
    return False


# -- range-code adjudication ------------------------------------------------------


@dataclass(frozen=True)
class RangeCodeReport:
    """Exact statistics of the range-code distribution of random online functions.

    ``node_conditionals[σ]`` is the distribution of the code digit of node
    ``σ`` given ``σ`` lies in the range tree.  ``context_conditionals`` gives
    the same for node ``0`` split by the root digit, which shows whether the
    code distribution is tree-Markov.
    """

    depth: int
    node_conditionals: dict
    context_conditionals: dict
    prefix_conditionals: dict

    @property
    def is_tree_markov(self) -> bool:
        dists = {tuple(v) for v in self.context_conditionals.values()}
        return len(dists) <= 1


def adjudicate_range_code(depth: int = 3) -> RangeCodeReport:
    """Exhaustive range-code statistics under the uniform online measure."""
    alphabets = ((0, 1),) * depth
    _check_depth(depth, alphabets)
    n_labelings = total_labelings(alphabets)
    node_hits: dict = {}
    node_digits: dict = {}
    context: dict = {}
    prefix_counts: Counter = Counter()
    for code, hist in range_code_table(alphabets).items():
        count = sum(hist.values())
        tree = decode_code(code)
        inner = [s for s in tree.ordered() if len(s) < depth]
        digit_of = dict(zip(inner, code))
        for s, d in digit_of.items():
            node_hits[s] = node_hits.get(s, 0) + count
            node_digits.setdefault(s, Counter())[int(d)] += count
        if "0" in digit_of:
            context.setdefault(digit_of[""], Counter())[int(digit_of["0"])] += count
        for k in range(len(code) + 1):
            prefix_counts[code[:k]] += count
    node_cond = {
        s: tuple(Fraction(node_digits[s][d], node_hits[s]) for d in range(3)) for s in sorted(node_hits)
    }
    ctx_cond = {
        root: tuple(Fraction(c[d], sum(c.values())) for d in range(3)) for root, c in sorted(context.items())
    }
    prefix_cond = {}
    for w, c in prefix_counts.items():
        if w and prefix_counts[w[:-1]]:
            prefix_cond[w] = Fraction(c, prefix_counts[w[:-1]])
    assert sum(prefix_counts[d] for d in "012") == n_labelings
    return RangeCodeReport(depth, node_cond, ctx_cond, prefix_cond)


# -- closed sets -------------------------------------------------------------------


def all_closed_set_codes(depth: int):
    """Every canonical code of a dead-end-free tree of the given depth, level by level."""
    frontier = [("", [""])]
    for _ in range(depth):
        nxt = []
        for code, level in frontier:
            for digits in itertools.product("012", repeat=len(level)):
                children = []
                for s, d in zip(level, digits):
                    if d in "20":
                        children.append(s + "0")
                    if d in "21":
                        children.append(s + "1")
                nxt.append((code + "".join(digits), children))
        frontier = nxt
    for code, leaves in frontier:
        yield code, leaves


def exact_closed_set_capacity(m: MeasureSpec, target) -> Fraction:
    """Probability that a code-measure random closed set meets ``target``, tree by tree."""
    from .measures import CLOSED_SET, cylinder_measure

    # a closed set of depth d has as many code digits as a labeling of depth d - 1
    if target.depth > depth_cap(3) + 1:
        raise DepthCapError(f"closed-set enumeration is capped at depth {depth_cap(3) + 1}")
    wanted = set(target.leaves())
    total = Fraction(0)
    for code, leaves in all_closed_set_codes(target.depth):
        if wanted.intersection(leaves):
            total += cylinder_measure(m, code, CLOSED_SET)
    return total
