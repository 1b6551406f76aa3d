"""Binary strings, finite-depth pruned trees and canonical closed-set codes.

Bit strings are plain ``str`` objects over ``"01"``; the empty string is the
root.  A closed set is only ever seen through its tree truncated at some depth,
so every tree here carries its depth explicitly.

The canonical code of a tree lists, for every node above the bottom level in
length-lexicographic order, which children are present: ``2`` for both, ``0``
for the left child only, ``1`` for the right child only.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator


class CodecError(ValueError):
    """A tree cannot be encoded (dead end, empty tree) or a word is not a code."""


def _check_bits(s: str) -> None:
    if any(c not in "01" for c in s):
        raise ValueError(f"not a bit string: {s!r}")


def length_lex_rank(s: str) -> int:
    """Position of ``s`` in the order ε, 0, 1, 00, 01, 10, 11, 000, ..."""
    _check_bits(s)
    return (1 << len(s)) - 1 + (int(s, 2) if s else 0)


def length_lex_unrank(n: int) -> str:
    if n < 0:
        raise ValueError("rank must be nonnegative")
    length = (n + 1).bit_length() - 1
    if length == 0:
        return ""
    return format(n + 1 - (1 << length), f"0{length}b")


def strings_of_length(n: int) -> Iterator[str]:
    for v in range(1 << n):
        yield format(v, f"0{n}b") if n else ""


def strings_up_to(depth: int, include_empty: bool = True) -> Iterator[str]:
    """All bit strings of length ``<= depth`` in length-lex order."""
    for n in range(0 if include_empty else 1, depth + 1):
        yield from strings_of_length(n)


def prefixes(s: str, include_empty: bool = True) -> Iterator[str]:
    for k in range(0 if include_empty else 1, len(s) + 1):
        yield s[:k]


def swap_bits(s: str) -> str:
    return s.translate(str.maketrans("01", "10"))


@dataclass(frozen=True)
class PrunedTree:
    """A downward-closed set of bit strings of length at most ``depth``.

    Trees built from codes, clopen sets, online ranges and preimages never
    have dead ends above ``depth``.  A delayed-output range that was cut off
    early may have some; :meth:`dead_ends` reports them and :func:`encode_closed_set`
    refuses such trees.  The empty tree (no nodes at all) stands for the empty
    closed set, which has no code.
    """

    depth: int
    nodes: frozenset

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be nonnegative")
        for s in self.nodes:
            _check_bits(s)
            if len(s) > self.depth:
                raise ValueError(f"node {s!r} deeper than tree depth {self.depth}")
            if s and s[:-1] not in self.nodes:
                raise ValueError(f"tree is not downward closed: {s!r} lacks its parent")

    # -- constructors -----------------------------------------------------

    @classmethod
    def empty(cls, depth: int = 0) -> "PrunedTree":
        return cls(depth, frozenset())

    @classmethod
    def full(cls, depth: int) -> "PrunedTree":
        return cls(depth, frozenset(strings_up_to(depth)))

    @classmethod
    def from_leaves(cls, leaves: Iterable[str], depth: int | None = None) -> "PrunedTree":
        """Tree of all prefixes of ``leaves``.

        With ``depth`` given, every leaf must have exactly that length, which
        makes the result the tree of the clopen set ``⋃ ⟦leaf⟧``.
        """
        leaves = list(leaves)
        if depth is None:
            depth = max((len(s) for s in leaves), default=0)
        elif any(len(s) != depth for s in leaves):
            raise ValueError(f"all leaves must have length {depth}")
        nodes = set()
        for s in leaves:
            nodes.update(prefixes(s))
        return cls(depth, frozenset(nodes))

    @classmethod
    def from_cylinders(cls, words: Iterable[str], depth: int) -> "PrunedTree":
        """Tree, at ``depth``, of the clopen set ``⋃ ⟦w⟧`` for ``|w| <= depth``."""
        leaves = set()
        for w in words:
            _check_bits(w)
            if len(w) > depth:
                raise ValueError(f"cylinder {w!r} is deeper than {depth}")
            for tail in strings_of_length(depth - len(w)):
                leaves.add(w + tail)
        return cls.from_leaves(leaves, depth)

    # -- queries ----------------------------------------------------------

    def __contains__(self, s: str) -> bool:
        return s in self.nodes

    def __len__(self) -> int:
        return len(self.nodes)

    @property
    def is_empty(self) -> bool:
        return not self.nodes

    def level(self, k: int) -> list[str]:
        return sorted((s for s in self.nodes if len(s) == k), key=length_lex_rank)

    def leaves(self) -> list[str]:
        """Nodes on the bottom level."""
        return self.level(self.depth)

    def ordered(self) -> list[str]:
        return sorted(self.nodes, key=length_lex_rank)

    def children(self, s: str) -> list[str]:
        return [s + b for b in "01" if s + b in self.nodes]

    def dead_ends(self) -> list[str]:
        return [s for s in self.ordered() if len(s) < self.depth and not self.children(s)]

    def truncate(self, depth: int) -> "PrunedTree":
        if depth > self.depth:
            raise ValueError("cannot truncate to a larger depth")
        return PrunedTree(depth, frozenset(s for s in self.nodes if len(s) <= depth))

    def extend_to(self, depth: int) -> "PrunedTree":
        """Clopen-set view at a finer depth: every leaf gets both children."""
        if depth < self.depth:
            raise ValueError("cannot extend to a smaller depth")
        if self.is_empty:
            return PrunedTree.empty(depth)
        return PrunedTree.from_cylinders(self.leaves(), depth)

    def swap(self) -> "PrunedTree":
        """Mirror image under the bit swap 0 <-> 1."""
        return PrunedTree(self.depth, frozenset(swap_bits(s) for s in self.nodes))

    # -- clopen set algebra (trees of equal depth, read as ⋃ of leaf cylinders)

    def _aligned(self, other: "PrunedTree") -> tuple["PrunedTree", "PrunedTree"]:
        d = max(self.depth, other.depth)
        return self.extend_to(d), other.extend_to(d)

    def union(self, other: "PrunedTree") -> "PrunedTree":
        a, b = self._aligned(other)
        return PrunedTree(a.depth, a.nodes | b.nodes)

    def intersection(self, other: "PrunedTree") -> "PrunedTree":
        a, b = self._aligned(other)
        return PrunedTree.from_leaves(set(a.leaves()) & set(b.leaves()), a.depth)

    def issubset(self, other: "PrunedTree") -> bool:
        a, b = self._aligned(other)
        return set(a.leaves()) <= set(b.leaves())

    # -- serialization ----------------------------------------------------

    def to_json(self) -> str:
        return json.dumps(self.ordered())

    @classmethod
    def from_json(cls, text: str, depth: int | None = None) -> "PrunedTree":
        nodes = json.loads(text)
        if depth is None:
            depth = max((len(s) for s in nodes), default=0)
        return cls(depth, frozenset(nodes))


def encode_closed_set(tree: PrunedTree) -> str:
    """Canonical code of a nonempty dead-end-free tree, one digit per inner node."""
    if tree.is_empty:
        raise CodecError("the empty closed set has no code")
    digits = []
    for s in tree.ordered():
        if len(s) == tree.depth:
            continue
        left, right = s + "0" in tree, s + "1" in tree
        if left and right:
            digits.append("2")
        elif left:
            digits.append("0")
        elif right:
            digits.append("1")
        else:
            raise CodecError(f"tree has a dead end at {s!r}")
    return "".join(digits)


@dataclass(frozen=True)
class DecodedCode:
    """Result of reading a code word breadth-first.

    ``tree`` holds every level that the digits determine completely;
    ``pending`` are the nodes one level below it that the leftover digits
    already place, and ``consumed`` is the number of digits used by ``tree``.
    """

    tree: PrunedTree
    pending: frozenset
    consumed: int


def _check_code(word: str) -> None:
    if any(c not in "012" for c in word):
        raise CodecError(f"code digits must be 0, 1 or 2: {word!r}")


def decode_partial(word: str) -> DecodedCode:
    _check_code(word)
    nodes = {""}
    level = [""]
    depth = 0
    consumed = 0
    pos = 0
    while True:
        if pos + len(level) > len(word):
            break
        nxt = []
        for s in level:
            d = word[pos]
            pos += 1
            if d in "20":
                nxt.append(s + "0")
            if d in "21":
                nxt.append(s + "1")
        nodes.update(nxt)
        level = nxt
        depth += 1
        consumed = pos
    pending = set()
    for s, d in zip(level, word[consumed:]):
        if d in "20":
            pending.add(s + "0")
        if d in "21":
            pending.add(s + "1")
    return DecodedCode(PrunedTree(depth, frozenset(nodes)), frozenset(pending), consumed)


def decode_code(word: str) -> PrunedTree:
    """Tree described by a code word, cut at its last complete level."""
    return decode_partial(word).tree


def code_node_depths(word: str) -> list[int]:
    """Depth of the tree node that each digit of ``word`` describes."""
    _check_code(word)
    depths = []
    queue = deque([0])
    for d in word:
        k = queue.popleft()
        depths.append(k)
        queue.extend([k + 1] * (2 if d == "2" else 1))
    return depths
