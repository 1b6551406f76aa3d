"""Representing functions of continuous maps on Cantor space.

A representing function labels every nonempty bit string up to some depth with
a digit in {0, 1, 2}.  It is stored as its *label word*: the labels of the
nodes 0, 1, 00, 01, 10, 11, 000, ... in length-lex order, so a function of
depth ``d`` has ``2**(d+1) - 2`` labels.

How a label 2 is read depends on the semantics:

* ``DELAY``: output is postponed (2s are deleted from the label sequence);
* ``ONLINE``: 2 never occurs and every input bit yields one output bit;
* ``PARTIAL_ONLINE``: the function is undefined on every input through the node.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .trees import PrunedTree, length_lex_rank, prefixes, strings_of_length


class Semantics(str, Enum):
    DELAY = "delay"
    ONLINE = "online"
    PARTIAL_ONLINE = "partial-online"


class DepthError(ValueError):
    """Input or query deeper than the function is defined."""


class SemanticsError(ValueError):
    """Operation not available under the function's semantics."""


def label_count(depth: int) -> int:
    return (1 << (depth + 1)) - 2


def depth_of_label_count(n: int) -> int:
    depth = (n + 2).bit_length() - 2
    if label_count(depth) != n:
        raise ValueError(f"{n} labels do not fill a complete depth (need 2**(d+1)-2)")
    return depth


@dataclass(frozen=True)
class RepresentingFunction:
    labels: str
    semantics: Semantics = Semantics.DELAY

    def __post_init__(self):
        object.__setattr__(self, "semantics", Semantics(self.semantics))
        if any(c not in "012" for c in self.labels):
            raise ValueError("labels must be digits 0, 1, 2")
        depth_of_label_count(len(self.labels))
        if self.semantics is Semantics.ONLINE and "2" in self.labels:
            raise SemanticsError("an online function has no label 2")

    @property
    def depth(self) -> int:
        return depth_of_label_count(len(self.labels))

    @classmethod
    def from_labeling(cls, labeling: dict, depth: int, semantics=Semantics.DELAY):
        """Build from a mapping ``node -> digit`` that covers every node up to ``depth``."""
        word = []
        for n in range(1, depth + 1):
            for s in strings_of_length(n):
                word.append(str(labeling[s]))
        return cls("".join(word), semantics)

    def label(self, s: str) -> int:
        if not s:
            raise ValueError("the empty string carries no label")
        if len(s) > self.depth:
            raise DepthError(f"node {s!r} is deeper than {self.depth}")
        return int(self.labels[length_lex_rank(s) - 1])

    def labels_along(self, x: str) -> list[int]:
        if len(x) > self.depth:
            raise DepthError(f"input of length {len(x)} exceeds depth {self.depth}")
        return [self.label(p) for p in prefixes(x, include_empty=False)]

    def with_semantics(self, semantics) -> "RepresentingFunction":
        return RepresentingFunction(self.labels, semantics)

    def serialize(self) -> str:
        return f"{self.semantics.value}:{self.labels}"

    @classmethod
    def parse(cls, text: str, semantics=None) -> "RepresentingFunction":
        """Read ``"online:0110..."`` or a bare label word (semantics given separately)."""
        tag, sep, word = text.strip().rpartition(":")
        if sep:
            return cls(word, Semantics(tag))
        return cls(word, Semantics(semantics or Semantics.DELAY))


@dataclass(frozen=True)
class EvalResult:
    output: str
    undefined_at: str | None = None

    @property
    def ok(self) -> bool:
        return self.undefined_at is None

    @property
    def status(self) -> str:
        return "OK" if self.ok else f"UNDEFINED_AT({self.undefined_at})"


def eval_delay(f: RepresentingFunction, x: str) -> str:
    """Output on the finite input ``x``: its labels with every 2 deleted."""
    if f.semantics is Semantics.PARTIAL_ONLINE:
        raise SemanticsError("use eval_partial_online for partial online functions")
    return "".join(str(d) for d in f.labels_along(x) if d != 2)


def eval_partial_online(f: RepresentingFunction, x: str) -> EvalResult:
    if f.semantics is not Semantics.PARTIAL_ONLINE:
        raise SemanticsError("eval_partial_online needs PARTIAL_ONLINE semantics")
    out = []
    for k, d in enumerate(f.labels_along(x), start=1):
        if d == 2:
            return EvalResult("".join(out), undefined_at=x[:k])
        out.append(str(d))
    return EvalResult("".join(out))


def evaluate(f: RepresentingFunction, x: str) -> EvalResult:
    if f.semantics is Semantics.PARTIAL_ONLINE:
        return eval_partial_online(f, x)
    return EvalResult(eval_delay(f, x))


def online_from_real(z: str, depth: int | None = None) -> RepresentingFunction:
    """Online function whose label word is the bit string ``z``.

    Node number ``n + 1`` in length-lex order gets label ``z[n]``.  Without a
    depth, ``z`` must have exactly ``2**(d+1) - 2`` bits.
    """
    if any(c not in "01" for c in z):
        raise ValueError("z must be a bit string")
    if depth is None:
        depth = depth_of_label_count(len(z))
    need = label_count(depth)
    if len(z) < need:
        raise DepthError(f"depth {depth} needs {need} bits, got {len(z)}")
    return RepresentingFunction(z[:need], Semantics.ONLINE)


@dataclass(frozen=True)
class RangeTree:
    tree: PrunedTree
    truncated: bool = False


def _walk_outputs(f: RepresentingFunction):
    """Yield ``(input, output)`` for every input of full length that stays defined."""
    partial = f.semantics is Semantics.PARTIAL_ONLINE
    labels = f.labels
    stack = [("", "")]
    while stack:
        x, out = stack.pop()
        if len(x) == f.depth:
            yield x, out
            continue
        for b in "10":
            y = x + b
            d = labels[length_lex_rank(y) - 1]
            if d == "2":
                if partial:
                    continue
                stack.append((y, out))
            else:
                stack.append((y, out + d))


def range_tree(f: RepresentingFunction, out_depth: int, allow_truncated: bool = False) -> RangeTree:
    """Tree of output prefixes of length ``<= out_depth`` over all defined inputs.

    Under DELAY semantics an input may not have produced ``out_depth`` bits
    by the function's depth; the result is then flagged ``truncated`` (and
    may have dead ends) and is only returned with ``allow_truncated``.
    """
    if out_depth < 0:
        raise ValueError("out_depth must be nonnegative")
    if f.semantics is not Semantics.DELAY and f.depth < out_depth:
        raise DepthError(f"range to depth {out_depth} needs function depth >= {out_depth}")
    nodes = set()
    truncated = False
    for _, out in _walk_outputs(f):
        if len(out) < out_depth:
            truncated = True
        nodes.update(prefixes(out[:out_depth]))
    if truncated and not allow_truncated:
        raise DepthError(
            f"some inputs emit fewer than {out_depth} bits by depth {f.depth}; "
            "pass allow_truncated=True for the truncated tree"
        )
    return RangeTree(PrunedTree(out_depth, frozenset(nodes)), truncated)


def preimage_tree(f: RepresentingFunction, y: str) -> PrunedTree:
    """Tree of the inputs of length ``|y|`` that an online function maps to ``y``.

    Every node lies on such an input, so the tree has no dead ends; it is
    empty when ``y`` is not an output at all.
    """
    if f.semantics is not Semantics.ONLINE:
        raise SemanticsError("preimage trees are defined for online functions")
    if any(c not in "01" for c in y):
        raise ValueError("y must be a bit string")
    if len(y) > f.depth:
        raise DepthError(f"|y|={len(y)} exceeds depth {f.depth}")
    leaves = []
    stack = [""]
    while stack:
        x = stack.pop()
        if len(x) == len(y):
            leaves.append(x)
            continue
        for b in "01":
            if f.labels[length_lex_rank(x + b) - 1] == y[len(x)]:
                stack.append(x + b)
    return PrunedTree.from_leaves(leaves, len(y))
