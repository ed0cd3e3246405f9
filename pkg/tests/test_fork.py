from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from minetactics.fork import (
    SplitScenario,
    Stake,
    TowingAgreement,
    apply_towing,
    branch_win_probability,
    expected_branch_utility,
    fig1_split,
    per_pool_expected_utility,
)
from minetactics.model import ModelError, Pool


def test_branch_probability_examples():
    assert branch_win_probability(fig1_split())["lower"] == Fraction(1, 5)
    assert branch_win_probability(apply_towing(fig1_split(towing=True)))["lower"] == Fraction(2, 5)
    s = fig1_split()
    everyone_up = SplitScenario(s.pools, s.branches, dict.fromkeys(s.allocation, "upper"), 50, 10)
    assert branch_win_probability(everyone_up) == {"upper": 1, "lower": 0}


def test_apply_towing_examples():
    s = fig1_split(towing=True)
    towed = apply_towing(s)
    assert towed.allocation["C"] == "lower"
    assert s.allocation["C"] == "upper"  # input untouched
    assert {k: v for k, v in towed.allocation.items() if k != "C"} == \
        {k: v for k, v in s.allocation.items() if k != "C"}
    plain = fig1_split()
    assert apply_towing(plain) == plain
    assert apply_towing(towed) == towed


def test_towing_validation():
    s = fig1_split()
    with pytest.raises(ModelError, match="unknown pool"):
        SplitScenario(s.pools, s.branches, s.allocation, 50, 10, (TowingAgreement("Z", "B"),))
    with pytest.raises(ModelError):
        TowingAgreement("B", "B")
    with pytest.raises(ModelError, match="proposed"):
        SplitScenario(s.pools, s.branches, s.allocation, 50, 10, (TowingAgreement("A", "B"),), s.stakes)
    with pytest.raises(ModelError, match="cycle"):
        SplitScenario(s.pools, s.branches, s.allocation, 50, 10,
                      (TowingAgreement("C", "D"), TowingAgreement("D", "C")))
    with pytest.raises(ModelError, match="allocated elsewhere"):
        SplitScenario(s.pools, s.branches, s.allocation, 50, 10, stakes={"lower": Stake("A", 40)})


def test_towing_chain_follows_to_end():
    s = fig1_split()
    chained = SplitScenario(s.pools, s.branches, s.allocation, 50, 10,
                            (TowingAgreement("D", "C"), TowingAgreement("C", "B")))
    towed = apply_towing(chained)
    assert towed.allocation["C"] == towed.allocation["D"] == "lower"
    assert apply_towing(towed) == towed


def test_expected_branch_utility_examples():
    assert expected_branch_utility(fig1_split())["lower"] == 8
    assert expected_branch_utility(apply_towing(fig1_split(towing=True)))["lower"] == 16
    s = fig1_split()
    lone = SplitScenario(s.pools, s.branches, dict.fromkeys(s.allocation, "upper"), 50, 10)
    assert expected_branch_utility(lone)["lower"] == 0


def test_per_pool_examples():
    assert per_pool_expected_utility(fig1_split())["B"] == 8
    towed = apply_towing(fig1_split(towing=True))
    pp = per_pool_expected_utility(towed)
    assert (pp["B"], pp["C"]) == (8, 8)
    assert pp["B"] + pp["C"] == 16
    with_risk = per_pool_expected_utility(towed, include_at_risk=True)
    assert with_risk["B"] - pp["B"] == Fraction(2, 5) * 40
    no_tow = per_pool_expected_utility(fig1_split(), include_at_risk=True)
    assert no_tow["B"] - 8 == Fraction(1, 5) * 40


def test_at_risk_by_enumeration():
    """Enumerate both race outcomes and weight B's realised payoff by probability."""
    for towing, p_lower in ((False, Fraction(1, 5)), (True, Fraction(2, 5))):
        s = apply_towing(fig1_split(towing=towing))
        lower_hash = s.branch_hash()["lower"]
        b_share = Fraction(1, 5) / lower_hash
        outcomes = {"lower": p_lower, "upper": 1 - p_lower}
        # B keeps its block 1002 (40) and its hash-share of block 1003 (40) only if lower wins
        expected = sum(p * ((40 + 40 * b_share) if b == "lower" else 0) for b, p in outcomes.items())
        assert per_pool_expected_utility(s, include_at_risk=True)["B"] == expected


@st.composite
def splits(draw):
    n = draw(st.integers(2, 8))
    nb = draw(st.integers(2, 4))
    branches = tuple(f"b{i}" for i in range(nb))
    pools = tuple(Pool(f"p{i}", "", Fraction(draw(st.integers(1, 50)), 100)) for i in range(n))
    alloc = {p.id: draw(st.sampled_from(branches)) for p in pools}
    helper, ben = draw(st.lists(st.sampled_from([p.id for p in pools]), min_size=2, max_size=2, unique=True))
    return SplitScenario(pools, branches, alloc, 50, 10, (TowingAgreement(helper, ben),))


@given(splits())
def test_probabilities_sum_to_one(s):
    probs = branch_win_probability(s)
    assert sum(probs.values()) == 1
    assert all(0 <= p <= 1 for p in probs.values())


@given(splits())
def test_towing_monotone_and_idempotent(s):
    a = s.agreements[0]
    target = s.allocation[a.beneficiary]
    towed = apply_towing(s)
    before = branch_win_probability(s)[target]
    after = branch_win_probability(towed)[target]
    moved = s.allocation[a.helper] != target
    assert after > before if moved else after == before
    assert apply_towing(towed) == towed


@given(splits())
def test_decomposition(s):
    assert sum(per_pool_expected_utility(s).values()) == sum(expected_branch_utility(s).values())


def test_n_branch_enumeration():
    pools = tuple(Pool(x, x, h) for x, h in zip("PQRS", (Fraction(1, 10), Fraction(2, 10), Fraction(3, 10), Fraction(4, 10))))
    for alloc in product("xyz", repeat=4):
        s = SplitScenario(pools, ("x", "y", "z"), dict(zip("PQRS", alloc)), 50, 10)
        probs = branch_win_probability(s)
        for b in "xyz":
            assert probs[b] == sum(p.base_hash for p, a in zip(pools, alloc) if a == b)
