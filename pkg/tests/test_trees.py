import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from randlab.trees import (
    CodecError,
    PrunedTree,
    code_node_depths,
    decode_code,
    decode_partial,
    encode_closed_set,
    length_lex_rank,
    length_lex_unrank,
    strings_up_to,
)


@pytest.mark.parametrize("s, rank", [("", 0), ("0", 1), ("1", 2), ("00", 3), ("01", 4), ("11", 6), ("000", 7)])
def test_length_lex_rank(s, rank):
    assert length_lex_rank(s) == rank
    assert length_lex_unrank(rank) == s


@given(st.integers(min_value=0, max_value=10**9))
def test_rank_bijection(n):
    assert length_lex_rank(length_lex_unrank(n)) == n


def test_encode_examples():
    assert encode_closed_set(PrunedTree.full(2)) == "222"
    assert encode_closed_set(PrunedTree.from_leaves(["000"], 3)) == "000"
    assert encode_closed_set(PrunedTree.from_leaves(["000", "111"], 3)) == "20101"


def test_decode_examples():
    assert decode_code("102").nodes == {"", "1", "10", "100", "101"}
    assert decode_code("2").nodes == {"", "0", "1"}
    assert encode_closed_set(decode_code("20101")) == "20101"


def test_decode_exposes_partial_level():
    dec = decode_partial("22")
    assert dec.tree == PrunedTree.full(1)
    assert dec.consumed == 1
    assert dec.pending == {"00", "01"}


def test_encode_rejects_dead_ends_and_empty():
    with pytest.raises(CodecError):
        encode_closed_set(PrunedTree(2, frozenset({"", "0", "1", "00"})))
    with pytest.raises(CodecError):
        encode_closed_set(PrunedTree.empty(3))


def test_tree_must_be_downward_closed():
    with pytest.raises(ValueError):
        PrunedTree(2, frozenset({"", "01"}))


codes = st.text(alphabet="012", max_size=40)


@given(codes)
def test_decode_encode_round_trip(word):
    dec = decode_partial(word)
    assert encode_closed_set(dec.tree) == word[: dec.consumed]
    assert len(dec.tree.leaves()) <= len(word) + 1


def _enumerate_trees(depth):
    """Dead-end-free trees of a given depth, by brute force over node subsets."""
    nodes = list(strings_up_to(depth))[1:]
    out = []
    for bits in itertools.product((0, 1), repeat=len(nodes)):
        members = frozenset({""} | {s for s, b in zip(nodes, bits) if b})
        if any(s[:-1] not in members for s in members if s):
            continue
        t = PrunedTree(depth, members)
        if not t.dead_ends():
            out.append(t)
    return out


@pytest.mark.parametrize("depth, count", [(1, 3), (2, 15), (3, 255)])
def test_tree_counts_and_round_trip(depth, count):
    trees = _enumerate_trees(depth)
    assert len(trees) == count
    assert {decode_code(encode_closed_set(t)) for t in trees} == set(trees)


def test_frontier_grows_by_number_of_twos():
    # each complete level: frontier size = number of 2s among that level's digits + level size
    for n in range(8):
        for digits in itertools.product("012", repeat=n):
            word = "".join(digits)
            dec = decode_partial(word)
            inner = [s for s in dec.tree.nodes if len(s) < dec.tree.depth]
            assert dec.consumed == len(inner)
            assert len(dec.tree.leaves()) == word[: dec.consumed].count("2") + 1


def test_code_node_depths():
    assert code_node_depths("20101") == [0, 1, 1, 2, 2]
    assert code_node_depths("000") == [0, 1, 2]


def test_clopen_algebra():
    a = PrunedTree.from_cylinders(["0"], 2)
    b = PrunedTree.from_cylinders(["01", "1"], 2)
    assert a.union(b).leaves() == ["00", "01", "10", "11"]
    assert a.intersection(b).leaves() == ["01"]
    assert a.intersection(PrunedTree.from_cylinders(["1"], 1)).is_empty
    assert PrunedTree.from_cylinders(["01"], 3).issubset(a)
    assert a.swap().leaves() == ["10", "11"]


def test_json_round_trip():
    t = PrunedTree.from_leaves(["010", "011"], 3)
    assert PrunedTree.from_json(t.to_json(), 3) == t
