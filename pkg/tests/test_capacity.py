import itertools
import math
import random
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from randlab import capacity as cap
from randlab.exact import Interval, contains, is_exact, lower, upper, width
from randlab.functions import Semantics
from randlab.measures import UNIFORM, SymmetricBernoulli
from randlab.trees import PrunedTree, strings_of_length

fractions = st.fractions(min_value=0, max_value=1, max_denominator=50)
r_values = st.fractions(min_value=0, max_value=F(1, 2), max_denominator=50)


def test_survival_examples():
    assert cap.survival_sequence(F(1, 2), 2).values == (1, F(3, 4), F(39, 64))
    assert cap.survival_sequence(1, 3).values == (1, 1, 1, 1)
    assert cap.survival_sequence(0, 2).values == (1, 0, 0)


def test_survival_switches_to_intervals():
    seq = cap.survival_sequence(F(2, 3), 60)
    assert is_exact(seq[5]) and not is_exact(seq[60])
    assert width(seq[60]) < F(1, 2**60)


@given(fractions, st.integers(min_value=0, max_value=12))
def test_survival_stays_in_range_and_above_fixed_point(p, n):
    seq = cap.survival_sequence(p, n)
    s = cap.survival_fixed_point(p)
    for a, b in zip(seq, list(seq)[1:]):
        assert 0 <= lower(b) and upper(b) <= upper(a)
        assert upper(b) >= s


@pytest.mark.parametrize(
    "r,expected", [(F(1, 3), F(3, 4)), (F(1, 2), 0), (F(1, 4), F(8, 9)), (F(1, 5), F(15, 16))]
)
def test_hit_closed_form(r, expected):
    assert cap.hit_probability_closed_form(r) == expected


def test_hit_closed_form_rejects_r_zero():
    with pytest.raises(cap.DiscontinuityError):
        cap.hit_probability_closed_form(0)
    with pytest.raises(cap.CapacityError):
        cap.hit_probability_closed_form(F(3, 5))


@given(r_values)
def test_closed_forms_match_fixed_points(r):
    if r > 0:
        assert cap.hit_probability_closed_form(r) == cap.survival_fixed_point(1 - r)
    assert cap.domain_nonempty_probability(r) == cap.survival_fixed_point(2 * r)
    assert cap.partial_measure(r) == (1 if r < F(1, 4) else 0)


def test_domain_examples():
    assert cap.domain_nonempty_probability(F(1, 2)) == 1
    assert cap.domain_nonempty_probability(F(1, 4)) == 0
    assert cap.domain_nonempty_probability(F(1, 3)) == F(3, 4)


def test_online_examples():
    assert cap.online_hitting_sequence(3).values == (1, F(3, 4), F(39, 64), F(8463, 16384))
    assert cap.sequences_agree(cap.online_hitting_sequence(40), cap.survival_sequence(F(1, 2), 40))
    assert not cap.sequences_agree(cap.online_hitting_sequence(3), cap.survival_sequence(F(2, 3), 3))


def test_sequence_validation():
    with pytest.raises(cap.CapacityError):
        cap.HittingSequence((F(1, 2), F(1, 4)))
    with pytest.raises(cap.CapacityError):
        cap.HittingSequence((1, F(1, 2), F(3, 4)))


# oracle-derived, frozen: exhaustive enumeration of the 3^14 depth-3 labelings
@pytest.mark.parametrize(
    "target,semantics,expected",
    [
        ("00", Semantics.DELAY, F(2873045, 4782969)),
        ("0", Semantics.PARTIAL_ONLINE, F(2289728, 4782969)),
    ],
)
def test_cylinder_hitting_frozen(target, semantics, expected):
    assert cap.cylinder_hitting_probability(UNIFORM, target, 3, semantics) == expected


def test_cylinder_hitting_online_is_online_sequence():
    m = SymmetricBernoulli(F(1, 2))
    for n in range(6):
        assert cap.cylinder_hitting_probability(m, "01101"[:n], n, Semantics.ONLINE) == cap.online_hitting_sequence(n)[n]
    with pytest.raises(cap.CapacityError):
        cap.cylinder_hitting_probability(UNIFORM, "0", 1, Semantics.ONLINE)


@given(r_values, st.integers(min_value=0, max_value=6), st.data())
def test_cylinder_hitting_monotone(r, depth, data):
    m = SymmetricBernoulli(r)
    target = data.draw(st.text(alphabet="01", max_size=depth))
    for sem in (Semantics.DELAY, Semantics.PARTIAL_ONLINE):
        v = cap.cylinder_hitting_probability(m, target, depth, sem)
        assert 0 <= v <= 1
        assert cap.cylinder_hitting_probability(m, target + "0", depth + 1, sem) <= v
    if r > 0:
        # a delayed path may need more input, so extra depth only helps
        v = cap.cylinder_hitting_probability(m, target, depth, Semantics.DELAY)
        assert cap.cylinder_hitting_probability(m, target, depth + 1, Semantics.DELAY) >= v


def test_standard_capacity_examples():
    assert cap.STANDARD_CAPACITY(PrunedTree.from_leaves(["01"], 2)) == F(4, 9)
    assert cap.STANDARD_CAPACITY(PrunedTree.full(2)) == 1
    assert cap.STANDARD_CAPACITY(PrunedTree.empty(2)) == 0
    assert cap.STANDARD_CAPACITY(PrunedTree.from_leaves(["0", "1"], 1)) == 1
    with pytest.raises(cap.CapacityError):
        cap.STANDARD_CAPACITY(PrunedTree(2, frozenset({"", "0"})))


def random_clopen(rnd, depth):
    leaves = [s for s in strings_of_length(depth) if rnd.random() < 0.4]
    return PrunedTree.from_leaves(leaves, depth)


@given(r_values, st.integers(min_value=0, max_value=2**16 - 1), st.integers(min_value=1, max_value=4))
def test_capacity_monotone_and_subadditive(r, seed, depth):
    rnd = random.Random(seed)
    T = cap.CapacityFn(SymmetricBernoulli(r))
    a, b = random_clopen(rnd, depth), random_clopen(rnd, depth)
    assert T(a.intersection(b)) <= min(T(a), T(b))
    assert max(T(a), T(b)) <= T(a.union(b)) <= T(a) + T(b)
    assert T(a.union(b)) + T(a.intersection(b)) <= T(a) + T(b)


def test_alternating_check_random_families():
    rnd = random.Random(11)
    for _ in range(100):
        depth = rnd.randint(1, 4)
        sets = [random_clopen(rnd, depth) for _ in range(rnd.randint(2, 4))]
        res = cap.alternating_check(cap.STANDARD_CAPACITY, sets)
        assert res.ok and res.slack == res.rhs - res.lhs


def test_alternating_check_flags_supermodular_function():
    # T(Q) = (number of leaves / 4)^2 is not alternating
    def bad(q):
        return F(len(q.leaves()), 4) ** 2

    sets = [PrunedTree.from_leaves(["00", "01"], 2), PrunedTree.from_leaves(["01", "10"], 2)]
    res = cap.alternating_check(bad, sets)
    assert not res.ok and res.slack < 0
    with pytest.raises(ValueError):
        cap.alternating_check(bad, sets[:1])


def test_inversion_examples():
    m = cap.invert_capacity_to_params(cap.online_hitting_sequence(5), 5)
    assert m.r_seq == (F(1, 2),) * 5
    exact = cap.invert_capacity_to_params([1, F(3, 4)], 1)
    assert exact.r_seq == (F(1, 2),)
    with pytest.raises(cap.InvalidCapacity):
        cap.invert_capacity_to_params([1, F(1, 2), F(1, 2)], 2)
    with pytest.raises(cap.InvalidCapacity):
        cap.invert_capacity_to_params([1, F(1, 2), 0], 2)
    with pytest.raises(cap.InvalidCapacity):
        cap.invert_capacity_to_params([1, F(1, 2), F(3, 4)], 2)


@given(st.lists(st.fractions(min_value=F(1, 40), max_value=F(1, 2), max_denominator=40), min_size=1, max_size=8))
def test_inversion_round_trip(rs):
    # hitting sequence of a generalized measure, then back to its parameters
    p = [F(1)]
    for r in rs:
        x = p[-1] * r
        p.append(1 - (1 - x) ** 2)
    m = cap.invert_capacity_to_params(p, len(rs))
    for r, got in zip(rs, m.r_seq):
        assert contains(got, r)
    for a, b in zip(p, cap.forward_substitute(m, len(rs))):
        assert contains(b, a)


def test_standard_params():
    m = cap.standard_closed_set_params(12)
    root3 = Interval(F(17320508, 10**7), F(17320509, 10**7))
    assert lower(m.r_seq[0]) <= (F(2, 3) / (1 + root3 / 3)).hi
    assert cap.params_limit(F(2, 3)) == F(1, 3)
    assert all(lower(r) > F(1, 3) for r in m.r_seq)


def test_range_code_conditionals():
    assert cap.range_code_conditionals(0) == (F(1, 4), F(1, 4), F(1, 2))
    assert cap.range_code_conditionals(1) == (F(3, 16), F(3, 16), F(5, 8))
    assert cap.range_code_conditionals(2) == (F(39, 256), F(39, 256), F(89, 128))


def test_martingale_identity_small():
    for n in range(5):
        for digits in itertools.product("012", repeat=n):
            w = "".join(digits)
            lhs = cap.nu_measure(w) * cap.martingale_value(w)
            assert lhs == sum(cap.nu_measure(w + i) * cap.martingale_value(w + i) for i in "012")
            assert cap.nu_measure(w) == sum(cap.nu_measure(w + i) for i in "012")


def test_martingale_examples():
    assert cap.martingale_value("") == 1
    assert cap.martingale_value("0") == F(4, 3)
    assert cap.martingale_value("2") == F(2, 3)
    assert cap.martingale_value("22") == F(2, 3) * F(1, 3) / F(5, 8)


@given(st.text(alphabet="012", max_size=30))
def test_martingale_log_matches_exact(w):
    exact = cap.martingale_value(w)
    enc = cap.martingale_log2(w, 80)
    assert lower(enc) - 1e-9 <= math.log2(exact) <= upper(enc) + 1e-9


def test_sample_paths_deterministic():
    a = cap.sample_martingale_paths(5, 40, seed=3)
    assert a == cap.sample_martingale_paths(5, 40, seed=3)
    assert a != cap.sample_martingale_paths(5, 40, seed=4)


def test_order_function_and_bound():
    f = cap.order_function(cap.online_hitting_sequence(20))
    assert f[0] == 0 and f.is_nondecreasing()
    assert f[1] == cap.order_function([1, F(3, 4)])[1]
    assert abs(float(lower(f[1])) - 0.4150374992788438) < 1e-15
    assert f.first_exceeding(1) == 4
    b = cap.complexity_bound(cap.online_hitting_sequence(20), 2, 1)
    assert abs(float(lower(b)) - (-math.log2(39 / 64) - 1)) < 1e-12
    with pytest.raises(cap.CapacityError):
        cap.order_function([1, 0])


def test_symmetric_cylinder_capacity():
    assert cap.symmetric_cylinder_capacity(F(1, 3))(3) == F(8, 27)
    T = cap.symmetric_cylinder_capacity(F(1, 4))
    assert [T(n) for n in range(5)] == [F(3, 4) ** n for n in range(5)]
