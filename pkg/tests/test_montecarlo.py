from fractions import Fraction as F

import pytest

from randlab import capacity as cap
from randlab.functions import Semantics
from randlab.measures import ONLINE, UNIFORM, SymmetricBernoulli
from randlab.montecarlo import Estimate, estimate_event, estimate_range_contains
from randlab.oracle import EventSpec, exact_event_probability


def test_estimate_band():
    est = Estimate.from_counts(500, 1000, seed=1)
    assert est.point == 0.5
    assert est.ci_low == pytest.approx(0.5 - 3 * (0.25 / 1000) ** 0.5)
    assert est.contains(F(1, 2)) and not est.contains(F(3, 4))
    edge = Estimate.from_counts(0, 1000, seed=1)
    assert edge.ci_low == 0 and edge.ci_high == 0


def test_deterministic_and_worker_invariant():
    e = EventSpec.hits_cylinder("01", Semantics.DELAY, 5)
    a = estimate_event(UNIFORM, e, 3000, seed=9)
    assert a == estimate_event(UNIFORM, e, 3000, seed=9)
    assert a == estimate_event(UNIFORM, e, 3000, seed=9, workers=3)
    assert a == estimate_event(UNIFORM, e, 3000, seed=9, batch=97)
    assert a != estimate_event(UNIFORM, e, 3000, seed=10)


def test_total_is_certain_without_delays():
    m = SymmetricBernoulli(F(1, 2))
    assert estimate_event(m, EventSpec.total_to_depth(6), 500, seed=0).point == 1.0


def test_hits_everything_in_the_limit_of_no_delay():
    m = SymmetricBernoulli(F(1, 2) - F(1, 10**6))
    est = estimate_range_contains(m, "0101", 4, 2000, seed=2)
    assert est.point > 0.1
    assert est.contains(cap.cylinder_hitting_probability(m, "0101", 4))


@pytest.mark.parametrize(
    "m,e",
    [
        (ONLINE, EventSpec.hits_cylinder("000", Semantics.ONLINE, 3)),
        (UNIFORM, EventSpec.exists_all_a_path({0, 2}, 3)),
        (SymmetricBernoulli(F(1, 3)), EventSpec.hits_cylinder("1", Semantics.PARTIAL_ONLINE, 3)),
        (ONLINE, EventSpec.range_code_prefix("2", 2)),
    ],
)
def test_agrees_with_exact_values(m, e):
    est = estimate_event(m, e, 20000, seed=5)
    assert est.contains(exact_event_probability(m, e))


def test_validation():
    with pytest.raises(ValueError):
        estimate_event(UNIFORM, EventSpec.total_to_depth(2), 10, seed=0)
    with pytest.raises(ValueError):
        estimate_event(UNIFORM, EventSpec.hits_cylinder("0", Semantics.ONLINE, 2), 1000, seed=0)
