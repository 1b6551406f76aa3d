"""Self-check suite behind ``randlab verify``.

Each check compares two independent computations exactly.  The ``fast`` tier
covers depth <= 2 and runs in seconds; ``full`` goes to depth 3 and adds
statistical checks.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from . import capacity as cap
from .functions import RepresentingFunction, Semantics, evaluate, range_tree
from .measures import CLOSED_SET, ONLINE, UNIFORM, SymmetricBernoulli, cylinder_measure
from .montecarlo import estimate_event
from .oracle import EventSpec, adjudicate_range_code, exact_closed_set_capacity, exact_event_probability
from .trees import PrunedTree, decode_code, decode_partial, encode_closed_set, strings_up_to

R_VALUES = (Fraction(1, 5), Fraction(1, 4), Fraction(1, 3), Fraction(2, 5), Fraction(1, 2))


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    seconds: float
    detail: str = ""

    def to_json(self) -> dict:
        return {"name": self.name, "ok": self.ok, "seconds": round(self.seconds, 3), "detail": self.detail}


def _codec(max_len: int, max_depth: int) -> bool:
    for n in range(max_len + 1):
        for digits in itertools.product("012", repeat=n):
            word = "".join(digits)
            dec = decode_partial(word)
            if encode_closed_set(dec.tree) != word[: dec.consumed]:
                return False
    for depth in range(1, max_depth + 1):
        nodes = list(strings_up_to(depth))
        for bits in itertools.product((0, 1), repeat=len(nodes) - 1):
            members = {""} | {s for s, b in zip(nodes[1:], bits) if b}
            try:
                t = PrunedTree(depth, frozenset(members))
            except ValueError:
                continue
            if t.dead_ends():
                continue
            if decode_code(encode_closed_set(t)) != t:
                return False
    return True


def _survival_vs_oracle(depth: int) -> bool:
    for r in R_VALUES:
        m = SymmetricBernoulli(r)
        for alphabet, p in (({2}, 1 - 2 * r), ({0, 2}, 1 - r), ({0, 1}, 2 * r)):
            seq = cap.survival_sequence(p, depth)
            for n in range(1, depth + 1):
                if exact_event_probability(m, EventSpec.exists_all_a_path(alphabet, n)) != seq[n]:
                    return False
    return True


def _online_vs_oracle(depth: int) -> bool:
    seq = cap.online_hitting_sequence(depth)
    if not cap.sequences_agree(seq, cap.survival_sequence(Fraction(1, 2), depth)):
        return False
    for n in range(1, depth + 1):
        e = EventSpec.hits_cylinder("0" * n, Semantics.ONLINE, n)
        if exact_event_probability(ONLINE, e) != seq[n]:
            return False
    return True


def _cylinder_dp_vs_oracle(depth: int) -> bool:
    for r in R_VALUES:
        m = SymmetricBernoulli(r)
        sems = [Semantics.DELAY, Semantics.PARTIAL_ONLINE] + ([Semantics.ONLINE] if r == Fraction(1, 2) else [])
        for sem in sems:
            for k in range(depth + 1):
                for target in ("0" * k, "01"[:k]):
                    e = EventSpec.hits_cylinder(target, sem, depth)
                    if exact_event_probability(m, e) != cap.cylinder_hitting_probability(m, target, depth, sem):
                        return False
    return True


def _closed_forms() -> bool:
    for r in (Fraction(1, 5), Fraction(1, 4), Fraction(1, 3), Fraction(2, 5), Fraction(1, 2)):
        if cap.hit_probability_closed_form(r) != cap.survival_fixed_point(1 - r):
            return False
        if cap.domain_nonempty_probability(r) != cap.survival_fixed_point(2 * r):
            return False
    return (
        cap.hit_probability_closed_form(Fraction(1, 3)) == Fraction(3, 4)
        and cap.partial_measure(Fraction(1, 4)) == 0
        and cap.partial_measure(Fraction(1, 5)) == 1
    )


def _capacity_vs_oracle(depth: int) -> bool:
    for r in (Fraction(1, 4), Fraction(1, 3), Fraction(1, 2)):
        m = SymmetricBernoulli(r)
        leaves = list(strings_up_to(depth))[(1 << depth) - 1 :]
        for bits in itertools.product((0, 1), repeat=len(leaves)):
            chosen = [s for s, b in zip(leaves, bits) if b]
            t = PrunedTree.from_leaves(chosen, depth)
            if cap.capacity_from_bernoulli_code_measure(m, t) != exact_closed_set_capacity(m, t):
                return False
    return True


def _standard_capacity(max_len: int) -> bool:
    for s in strings_up_to(max_len):
        t = PrunedTree.from_leaves([s], len(s))
        if cap.capacity_from_bernoulli_code_measure(UNIFORM, t) != Fraction(2, 3) ** len(s):
            return False
    return True


def _martingale_identity(max_len: int) -> bool:
    for n in range(max_len + 1):
        for digits in itertools.product("012", repeat=n):
            w = "".join(digits)
            lhs = cap.nu_measure(w) * cap.martingale_value(w)
            rhs = sum(cap.nu_measure(w + i) * cap.martingale_value(w + i) for i in "012")
            if lhs != rhs:
                return False
    return True


def _root_conditionals() -> bool:
    root = EventSpec.range_code_prefix("", 2)
    got = tuple(
        exact_event_probability(ONLINE, EventSpec.range_code_prefix(d, 2))
        / exact_event_probability(ONLINE, root)
        for d in "012"
    )
    return got == cap.range_code_conditionals(0)


def _online_inversion(n: int) -> bool:
    m = cap.invert_capacity_to_params(cap.online_hitting_sequence(n), n)
    return all(r == Fraction(1, 2) for r in m.r_seq)


def _range_tree_brute(depth: int) -> bool:
    n_labels = (1 << (depth + 1)) - 2
    for digits in itertools.product("012", repeat=n_labels):
        f = RepresentingFunction("".join(digits), Semantics.PARTIAL_ONLINE)
        leaves = []
        for x in strings_up_to(depth):
            if len(x) == depth:
                res = evaluate(f, x)
                if res.ok:
                    leaves.append(res.output)
        if range_tree(f, depth).tree != PrunedTree.from_leaves(leaves, depth):
            return False
    return True


def _mc_smoke() -> bool:
    e = EventSpec.hits_cylinder("00", Semantics.DELAY, 6)
    exact = cap.cylinder_hitting_probability(UNIFORM, "00", 6)
    a = estimate_event(UNIFORM, e, 20000, seed=7)
    return a.contains(exact) and a == estimate_event(UNIFORM, e, 20000, seed=7, workers=2)


def _adjudication() -> bool:
    rep = adjudicate_range_code(3)
    seq = cap.online_hitting_sequence(3)
    return all(v == cap.range_code_conditionals(len(s), seq) for s, v in rep.node_conditionals.items())


def checks(tier: str = "fast") -> list[tuple[str, Callable[[], bool]]]:
    fast = [
        ("codec round trip (codes <= 6, trees <= 2)", lambda: _codec(6, 2)),
        (
            "cylinder additivity (words <= 5)",
            lambda: all(
                cylinder_measure(UNIFORM, w, CLOSED_SET)
                == sum(cylinder_measure(UNIFORM, w + d, CLOSED_SET) for d in "012")
                for n in range(6)
                for w in map("".join, itertools.product("012", repeat=n))
            ),
        ),
        ("survival recurrence = oracle (depth <= 2)", lambda: _survival_vs_oracle(2)),
        ("online hitting = oracle = survival(1/2) (depth <= 2)", lambda: _online_vs_oracle(2)),
        ("cylinder hitting DP = oracle (depth <= 2)", lambda: _cylinder_dp_vs_oracle(2)),
        ("closed-form identities", _closed_forms),
        ("capacity recursion = closed-set oracle (depth <= 2)", lambda: _capacity_vs_oracle(2)),
        ("standard capacity (2/3)^n (|σ| <= 6)", lambda: _standard_capacity(6)),
        ("martingale identity (|w| <= 5)", lambda: _martingale_identity(5)),
        ("range-code root conditionals = oracle", _root_conditionals),
        ("online inversion gives r = 1/2 (n <= 30)", lambda: _online_inversion(30)),
        ("partial-online range tree = brute force (depth 2)", lambda: _range_tree_brute(2)),
    ]
    if tier == "fast":
        return fast
    if tier != "full":
        raise ValueError(f"unknown tier {tier!r}")
    return fast + [
        ("codec round trip (codes <= 10, trees <= 3)", lambda: _codec(10, 3)),
        ("survival recurrence = oracle (depth 3)", lambda: _survival_vs_oracle(3)),
        ("online hitting = oracle (depth 3)", lambda: _online_vs_oracle(3)),
        ("cylinder hitting DP = oracle (depth 3)", lambda: _cylinder_dp_vs_oracle(3)),
        ("capacity recursion = closed-set oracle (depth 3)", lambda: _capacity_vs_oracle(3)),
        ("range-code node conditionals = oracle (depth 3)", _adjudication),
        ("Monte Carlo band and worker invariance", _mc_smoke),
    ]


def run(tier: str = "fast") -> list[CheckResult]:
    out = []
    for name, fn in checks(tier):
        t = time.perf_counter()
        try:
            ok, detail = bool(fn()), ""
        except Exception as exc:  # report, keep going
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, ok, time.perf_counter() - t, detail))
    return out
