"""Command-line entry point: ``randlab <subcommand> ...``.

Every command prints one JSON document (or CSV rows with ``--format csv``).
Rationals are always exact strings ``"a/b"``; intervals are ``{"lo", "hi"}``
objects; ``--decimals k`` adds a decimal rendering next to each value.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import re
import statistics
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import capacity as cap
from .exact import DEFAULT_PRECISION, MalformedRational, is_exact, parse_rational, to_json
from .functions import (
    DepthError,
    RepresentingFunction,
    Semantics,
    evaluate,
    label_count,
    preimage_tree,
    range_tree,
)
from .measures import CLOSED_SET, FUNCTION, parse_measure, sample_digits
from .montecarlo import estimate_event
from .oracle import DepthCapError, EventSpec, adjudicate_range_code, exact_event
from .trees import PrunedTree, decode_partial, encode_closed_set

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2
EXIT_RATIONAL = 3
EXIT_DEPTH = 4
EXIT_INVALID_CAPACITY = 5
EXIT_VERIFY_FAILED = 6

# labels of a sampled function are materialized, so keep the word manageable
SAMPLE_DEPTH_CAP = 20


class UsageError(Exception):
    pass


@dataclass
class CommandResult:
    payload: object = None
    code: int = EXIT_OK
    message: str = ""
    rows: list | None = field(default=None, repr=False)
    fmt: str = "json"

    @property
    def ok(self) -> bool:
        return self.code == EXIT_OK

    def to_json(self) -> dict:
        if self.ok:
            return {"status": "ok", "payload": self.payload}
        return {"status": "error", "code": self.code, "message": self.message}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- helpers -------------------------------------------------------------------


def _value(x, args):
    return to_json(x, args.decimals)


def _read_function(args) -> RepresentingFunction:
    text = args.function
    if text.startswith("@"):
        text = Path(text[1:]).read_text().strip()
    return RepresentingFunction.parse(text, args.semantics)


def _parse_sets(text: str, depth: int | None) -> list[PrunedTree]:
    """``"0,11;1"`` -> clopen sets ⟦0⟧∪⟦11⟧ and ⟦1⟧, on a common depth."""
    groups = [g.split(",") for g in text.split(";")]
    d = depth if depth is not None else max((len(w) for g in groups for w in g), default=0)
    return [PrunedTree.from_cylinders(g, d) for g in groups]


_POWER_RE = re.compile(r"^\(\s*([0-9/ ]+)\s*\)\s*\^\s*n$")


def _parse_sequence(text: str, n: int) -> cap.HittingSequence:
    text = text.strip()
    if text == "online":
        return cap.online_hitting_sequence(n)
    m = _POWER_RE.match(text)
    if m:
        return cap.geometric_sequence(parse_rational(m.group(1)), n)
    path = Path(text)
    if not path.exists():
        raise ValueError(f"expected '(a/b)^n', 'online' or a CSV file, got {text!r}")
    values = {}
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            row = [c.strip() for c in row if c.strip()]
            if not row or row[0].startswith("#") or row[0] == "n":
                continue
            if len(row) == 1:
                values[len(values)] = parse_rational(row[0])
            else:
                values[int(row[0])] = parse_rational(row[1])
    if 0 not in values:
        values[0] = Fraction(1)
    return cap.HittingSequence(tuple(values[k] for k in sorted(values)))


def _sequence_result(key: str, seq, args) -> CommandResult:
    values = [_value(v, args) for v in seq]
    rows = [["n", "value"]] + [[k, _csv_value(v)] for k, v in enumerate(seq)]
    return CommandResult({key: values}, rows=rows)


def _csv_value(v) -> str:
    if is_exact(v):
        return str(v)
    return f"{v.lo},{v.hi}"


# -- subcommands ---------------------------------------------------------------


def cmd_sample_function(args) -> CommandResult:
    if args.depth > SAMPLE_DEPTH_CAP:
        raise DepthCapError(f"sampled functions are capped at depth {SAMPLE_DEPTH_CAP}")
    m = parse_measure(args.measure)
    sem = Semantics(args.semantics)
    labels = sample_digits(m, label_count(args.depth), args.seed, FUNCTION)
    f = RepresentingFunction(labels, sem)
    return CommandResult({"labels": f.labels, "semantics": sem.value, "depth": args.depth})


def cmd_sample_closed_set(args) -> CommandResult:
    if args.depth > SAMPLE_DEPTH_CAP:
        raise DepthCapError(f"sampled closed sets are capped at depth {SAMPLE_DEPTH_CAP}")
    m = parse_measure(args.measure)
    word = sample_digits(m, (1 << args.depth) - 1, args.seed, CLOSED_SET)
    tree = decode_partial(word).tree.truncate(args.depth)
    return CommandResult({"code": encode_closed_set(tree), "nodes": tree.ordered(), "depth": args.depth})


def cmd_eval(args) -> CommandResult:
    f = _read_function(args)
    res = evaluate(f, args.x)
    return CommandResult({"output": res.output, "status": res.status})


def cmd_range_tree(args) -> CommandResult:
    f = _read_function(args)
    rt = range_tree(f, args.depth, allow_truncated=args.allow_truncated)
    out = {"nodes": rt.tree.ordered(), "truncated": rt.truncated}
    if not rt.truncated and not rt.tree.is_empty:
        out["code"] = encode_closed_set(rt.tree)
    return CommandResult(out)


def cmd_preimage_tree(args) -> CommandResult:
    f = _read_function(args)
    return CommandResult({"nodes": preimage_tree(f, args.y).ordered()})


def cmd_hitting(args) -> CommandResult:
    fam = args.family
    if fam == "online":
        seq = cap.online_hitting_sequence(args.n, args.precision)
    elif fam == "survival":
        seq = cap.survival_sequence(parse_rational(args.p), args.n, args.precision)
    elif fam == "geometric":
        seq = cap.geometric_sequence(parse_rational(args.p), args.n)
    else:
        m = parse_measure(args.measure)
        seq = [cap.cylinder_hitting_probability(m, "0" * k, args.depth, args.semantics) for k in range(args.n + 1)]
    return _sequence_result("p", seq, args)


def cmd_closed_form(args) -> CommandResult:
    kind = args.kind
    if kind == "hit":
        v = cap.hit_probability_closed_form(parse_rational(args.r))
    elif kind == "domain":
        v = cap.domain_nonempty_probability(parse_rational(args.r))
    elif kind == "partial":
        v = Fraction(cap.partial_measure(parse_rational(args.r)))
    elif kind == "fixed-point":
        v = cap.survival_fixed_point(parse_rational(args.p))
    else:
        v = cap.params_limit(parse_rational(args.p))
    return CommandResult(_value(v, args))


def cmd_capacity(args) -> CommandResult:
    m = parse_measure(args.measure)
    (target,) = _parse_sets(args.cylinders, args.depth)
    return CommandResult(_value(cap.capacity_from_bernoulli_code_measure(m, target), args))


def cmd_alternating_check(args) -> CommandResult:
    T = cap.CapacityFn(parse_measure(args.measure))
    res = cap.alternating_check(T, _parse_sets(args.sets, args.depth), args.max_sets)
    return CommandResult(
        {"ok": res.ok, "slack": _value(res.slack, args), "lhs": _value(res.lhs, args), "rhs": _value(res.rhs, args)}
    )


def cmd_invert_capacity(args) -> CommandResult:
    seq = _parse_sequence(args.p, args.n)
    m = cap.invert_capacity_to_params(seq, args.n, args.precision)
    rows = [["n", "lo", "hi"]]
    for k, r in enumerate(m.r_seq, start=1):
        lo, hi = (r, r) if is_exact(r) else (r.lo, r.hi)
        rows.append([k, str(lo), str(hi)])
    return CommandResult({"r": [_value(r, args) for r in m.r_seq]}, rows=rows)


def cmd_martingale(args) -> CommandResult:
    if args.adjudicate:
        rep = adjudicate_range_code(args.depth)
        return CommandResult(
            {
                "depth": rep.depth,
                "node_conditionals": {s or "ε": [str(v) for v in c] for s, c in rep.node_conditionals.items()},
                "node0_given_root": {d: [str(v) for v in c] for d, c in rep.context_conditionals.items()},
                "tree_markov": rep.is_tree_markov,
            }
        )
    if args.paths:
        logs = cap.sample_martingale_paths(args.paths, args.length, args.seed, args.precision)
        median = statistics.median(float(v) for v in logs)
        rows = [["path", "log2_d"]] + [[i, float(v)] for i, v in enumerate(logs)]
        return CommandResult(
            {"paths": args.paths, "length": args.length, "seed": args.seed, "median_log2_d": median}, rows=rows
        )
    word = args.word or ""
    return CommandResult(
        {"d": _value(cap.martingale_value(word), args), "nu": _value(cap.nu_measure(word), args)}
    )


def _parse_event(text: str, depth: int, semantics) -> EventSpec:
    kind, _, arg = text.partition(":")
    if kind == "range-contains":
        return EventSpec.hits_cylinder(arg, semantics, depth)
    return EventSpec.parse(text, depth, semantics)


def cmd_oracle(args) -> CommandResult:
    m = parse_measure(args.measure)
    e = _parse_event(args.event, args.depth, args.semantics)
    res = exact_event(m, e, args.workers)
    detail = res.to_json()
    detail["event"] = e.describe()
    if args.decimals is not None:
        detail["approx"] = to_json(res.probability, args.decimals)["approx"]
    return CommandResult(detail)


def cmd_mc(args) -> CommandResult:
    m = parse_measure(args.measure)
    e = _parse_event(args.event, args.depth, args.semantics)
    est = estimate_event(m, e, args.samples, args.seed, args.workers)
    out = est.to_json()
    out["event"] = e.describe()
    rows = [list(out.keys()), list(out.values())]
    return CommandResult(out, rows=rows)


def cmd_verify(args) -> CommandResult:
    from .verify import run

    results = run(args.tier)
    payload = {"tier": args.tier, "passed": all(r.ok for r in results), "checks": [r.to_json() for r in results]}
    rows = [["name", "ok", "seconds"]] + [[r.name, r.ok, round(r.seconds, 3)] for r in results]
    if not payload["passed"]:
        return CommandResult(payload, EXIT_VERIFY_FAILED, "some checks failed", rows)
    return CommandResult(payload, rows=rows)


# -- parser ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--decimals", type=int, default=None)
    common.add_argument("--precision", type=int, default=DEFAULT_PRECISION, help="dyadic bits for intervals")

    p = _Parser(prog="randlab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(fn=fn)
        return sp

    sp = add("sample-function", cmd_sample_function, "sample a representing function")
    sp.add_argument("--measure", default="uniform")
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--semantics", default="delay", choices=[s.value for s in Semantics])

    sp = add("sample-closed-set", cmd_sample_closed_set, "sample a closed-set code")
    sp.add_argument("--measure", default="uniform")
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--seed", type=int, default=0)

    for name, fn, help_ in (
        ("eval", cmd_eval, "evaluate a function on a finite input"),
        ("range-tree", cmd_range_tree, "range tree of a function"),
        ("preimage-tree", cmd_preimage_tree, "preimage tree of an online function"),
    ):
        sp = add(name, fn, help_)
        sp.add_argument("--function", required=True, help="label word, 'semantics:word' or @FILE")
        sp.add_argument("--semantics", default=None, choices=[s.value for s in Semantics])
        if name == "eval":
            sp.add_argument("--x", required=True)
        elif name == "range-tree":
            sp.add_argument("--depth", type=int, required=True)
            sp.add_argument("--allow-truncated", action="store_true")
        else:
            sp.add_argument("--y", required=True)

    sp = add("hitting", cmd_hitting, "hitting / survival sequences")
    sp.add_argument("--family", choices=("online", "survival", "geometric", "cylinder"), default="online")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", default=None, help="label probability (survival) or ratio (geometric)")
    sp.add_argument("--measure", default="uniform")
    sp.add_argument("--depth", type=int, default=None)
    sp.add_argument("--semantics", default="delay", choices=[s.value for s in Semantics])

    sp = add("closed-form", cmd_closed_form, "closed-form probabilities")
    sp.add_argument("kind", choices=("hit", "domain", "partial", "fixed-point", "limit"))
    sp.add_argument("--r", default=None)
    sp.add_argument("--p", default=None)

    sp = add("capacity", cmd_capacity, "capacity of a clopen set")
    sp.add_argument("--measure", default="uniform")
    sp.add_argument("--cylinders", required=True, help="comma-separated cylinder words")
    sp.add_argument("--depth", type=int, default=None)

    sp = add("alternating-check", cmd_alternating_check, "alternating-order inequality")
    sp.add_argument("--measure", default="uniform")
    sp.add_argument("--sets", required=True, help="';'-separated sets of ','-separated cylinders")
    sp.add_argument("--depth", type=int, default=None)
    sp.add_argument("--max-sets", type=int, default=4)

    sp = add("invert-capacity", cmd_invert_capacity, "level parameters from a hitting sequence")
    sp.add_argument("--p", required=True, help="'(a/b)^n', 'online' or CSV file of 'n,a/b'")
    sp.add_argument("--n", type=int, required=True)

    sp = add("martingale", cmd_martingale, "the range-code martingale")
    sp.add_argument("--word", default=None)
    sp.add_argument("--paths", type=int, default=0)
    sp.add_argument("--length", type=int, default=200)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--adjudicate", action="store_true", help="exact range-code statistics")
    sp.add_argument("--depth", type=int, default=3)

    sp = add("oracle", cmd_oracle, "exact event probability by enumeration")
    sp.add_argument("--measure", default="uniform")
    sp.add_argument("--event", required=True, help="hits:W, exists:A, total, domain-nonempty, range-code:W")
    sp.add_argument("--semantics", default="delay", choices=[s.value for s in Semantics])
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--workers", type=int, default=1)

    sp = add("mc", cmd_mc, "Monte Carlo estimate")
    sp.add_argument("--measure", default="uniform")
    sp.add_argument("--event", required=True, help="range-contains:W or any oracle event")
    sp.add_argument("--semantics", default="delay", choices=[s.value for s in Semantics])
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--samples", type=int, default=100000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=1)

    sp = add("verify", cmd_verify, "run the self-check suite")
    sp.add_argument("--tier", choices=("fast", "full"), default="fast")
    return p


def run(argv: list[str] | None = None) -> CommandResult:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return CommandResult(code=EXIT_USAGE, message=str(exc))
    try:
        if args.command == "hitting" and args.family == "cylinder" and args.depth is None:
            args.depth = args.n
        result = args.fn(args)
    except MalformedRational as exc:
        return CommandResult(code=EXIT_RATIONAL, message=str(exc))
    except (DepthCapError, DepthError) as exc:
        return CommandResult(code=EXIT_DEPTH, message=str(exc))
    except cap.InvalidCapacity as exc:
        return CommandResult(code=EXIT_INVALID_CAPACITY, message=f"INVALID_CAPACITY: {exc}")
    except (ValueError, TypeError, OSError, ZeroDivisionError) as exc:
        return CommandResult(code=EXIT_ERROR, message=f"{type(exc).__name__}: {exc}")
    result.fmt = args.format
    return result


def render(result: CommandResult, fmt: str = "json") -> str:
    if fmt == "csv" and result.rows is not None:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerows(result.rows)
        return buf.getvalue().rstrip("\n")
    return json.dumps(result.payload)


def main(argv: list[str] | None = None) -> int:
    result = run(argv)
    if result.ok:
        print(render(result, result.fmt))
    else:
        print(json.dumps(result.to_json()), file=sys.stderr)
    return result.code


if __name__ == "__main__":
    sys.exit(main())
