import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from minetactics.difficulty import DomainError
from minetactics.model import DegenerateNetworkError, EconomicParams, HashSchedule, Pool
from minetactics.periods import (
    deu,
    improvement_value,
    run_scenario,
    simple_mean_deu,
    simulate,
    sweep_shutdown_fraction,
    window_average_deu,
)


def float_oracle(base, rows, R, Cr):
    """Independent float re-derivation of the period kinematics.

    D_next = D * 14 / t with t = 14 * D / H, written out directly.
    """
    D, out = 1.0, []
    for row in rows:
        H = sum(b * m for b, m in zip(base, row))
        t = 2016 * 10 * D / H / 1440
        C = Cr * D
        out.append((D, t, C, [b * m / H * (R - C) * 2016 / t for b, m in zip(base, row)]))
        D = D * 14 / t
    return out


def test_deu_examples():
    assert deu(Fraction(1, 5), Fraction("12.5"), Fraction("11.5"), 14) == Fraction("28.8")
    assert deu(0, 12.5, 11.5, 14) == 0
    assert deu(Fraction(1, 5), Fraction("12.5"), Fraction("10.35"), Fraction("12.6")) == Fraction("68.8")
    assert deu(0.5, 10, 12, 14) < 0
    with pytest.raises(DomainError):
        deu(0.2, 12.5, 11.5, 0)


def test_simulate_fig2(fig2_schedule, params):
    res = simulate(fig2_schedule, params, 1, 4)
    assert [r.j for r in res] == [301, 302, 303, 304]
    assert [r.duration_days for r in res] == [14, Fraction(140, 9), Fraction(63, 5), 14]
    assert [r.difficulty for r in res] == [1, 1, Fraction(9, 10), 1]
    assert res[2].cost_per_block == Fraction("10.35")
    assert float(res[1].block_minutes) == pytest.approx(11.111, abs=1e-3)


def test_simulate_matches_float_oracle(fig2_schedule, params):
    base = [0.2] * 5
    rows = [[float(fig2_schedule.row(j)[pid]) for pid in "ABCDE"] for j in range(301, 305)]
    oracle = float_oracle(base, rows, 12.5, 11.5)
    for r, (D, t, C, deus) in zip(simulate(fig2_schedule, params), oracle):
        assert float(r.difficulty) == pytest.approx(D, rel=1e-12)
        assert float(r.duration_days) == pytest.approx(t, rel=1e-12)
        assert float(r.cost_per_block) == pytest.approx(C, rel=1e-12)
        for pid, d in zip("ABCDE", deus):
            assert float(r.per_pool[pid].deu) == pytest.approx(d, rel=1e-12)


def test_steady_state(pools, params):
    res = simulate(HashSchedule.constant(pools, 5), params)
    first = res[0]
    for r in res[1:]:
        assert (r.difficulty, r.duration_days, r.cost_per_block, r.per_pool) == (
            first.difficulty, first.duration_days, first.cost_per_block, first.per_pool)
    assert first.duration_days == 14


def test_full_shutdown_period(pools, params):
    s = HashSchedule.constant(pools, 3).with_multiplier(2, "A", 0)
    res = simulate(s, params)
    assert res[1].total_hash == Fraction(4, 5)
    assert res[1].duration_days == Fraction(35, 2)  # 14 / 0.8
    assert res[2].difficulty == Fraction(4, 5)
    assert res[1].per_pool["A"].deu == 0


def test_zero_hash_names_period(pools, params):
    s = HashSchedule.constant(pools, 3)
    for p in pools:
        s = s.with_multiplier(3, p.id, 0)
    with pytest.raises(DegenerateNetworkError) as info:
        simulate(s, params)
    assert info.value.period == 3


def test_window_average_examples(fig2_schedule, params):
    res = simulate(fig2_schedule, params)
    a = window_average_deu(res, "A", [302, 303])
    # (224 + 866.88) BTC over (140/9 + 63/5) days
    assert a == Fraction("1090.88") / Fraction(1267, 45)
    assert float(a) == pytest.approx(38.745, abs=1e-3)
    assert float(window_average_deu(res, "B", [302, 303])) == pytest.approx(46.700, abs=1e-3)
    assert window_average_deu(res, "C", [301]) == Fraction("28.8")
    with pytest.raises(DomainError):
        window_average_deu(res, "A", [])


def test_simple_mean_differs(fig2_schedule, params):
    res = simulate(fig2_schedule, params)
    assert simple_mean_deu(res, "A", [302, 303]) == Fraction("41.6")


def test_improvement_value_examples():
    assert improvement_value(38.745, 28.80) == pytest.approx(34.53, abs=0.01)
    assert improvement_value(28.8, 28.8) == 0
    assert improvement_value(46.7, 28.8) == pytest.approx(62.15, abs=0.01)
    with pytest.raises(DomainError):
        improvement_value(1, 0)


def test_run_scenario_report(fig2_schedule, params):
    rep = run_scenario(fig2_schedule, params, [302, 303])
    assert rep.baseline_deu == {pid: Fraction("28.8") for pid in "ABCDE"}
    assert rep.capacity_share["A"] == Fraction(1, 10)
    for pid, wa in rep.window_averages.items():
        assert wa.improvement_pct == 100 * (wa.avg_deu / rep.baseline_deu[pid] - 1)


def test_sweep_examples(pools, params):
    base = HashSchedule.constant(pools, 4, first_period=301)
    res = sweep_shutdown_fraction(base, params, "A", [0, Fraction(1, 2), 1], 302, [302, 303])
    zero, half, full = res.points
    assert all(v == Fraction("28.8") for v in zero.avg_deu.values())
    assert all(v == 0 for v in zero.improvement_pct.values())
    assert float(half.avg_deu["A"]) == pytest.approx(38.745, abs=1e-3)
    # hand computation: t302 = 17.5, D303 = 0.8, C303 = 9.2, t303 = 11.2
    expected_a = (0 + Fraction(1, 5) * (Fraction("12.5") - Fraction("9.2")) * 2016) / (Fraction(35, 2) + Fraction("11.2"))
    assert full.avg_deu["A"] == expected_a
    expected_b = (Fraction(1, 4) * 1 * 2016 + Fraction(1, 5) * Fraction("3.3") * 2016) / Fraction("28.7")
    assert full.avg_deu["B"] == expected_b
    assert res.best_fraction == 1


def test_sweep_is_deterministic(pools, params):
    base = HashSchedule.constant(pools, 4, first_period=301)
    grid = [Fraction(k, 10) for k in range(11)]
    assert sweep_shutdown_fraction(base, params, "A", grid, 302, [302, 303]) == \
        sweep_shutdown_fraction(base, params, "A", grid, 302, [302, 303])


def test_sweep_others_gain_more(pools, params):
    base = HashSchedule.constant(pools, 4, first_period=301)
    res = sweep_shutdown_fraction(base, params, "A", [Fraction(k, 20) for k in range(21)], 302, [302, 303])
    for pt in res.points:
        for pid in "BCDE":
            assert pt.improvement_pct[pid] >= pt.improvement_pct["A"]


@st.composite
def random_schedules(draw):
    n = draw(st.integers(1, 8))
    hs = draw(st.lists(st.integers(1, 100), min_size=n, max_size=n))
    pools = tuple(Pool(f"p{i}", f"p{i}", Fraction(h, 100)) for i, h in enumerate(hs))
    m = st.fractions(min_value=Fraction(1, 50), max_value=1, max_denominator=1000)
    rows = tuple({p.id: draw(m) for p in pools} for _ in range(draw(st.integers(1, 5))))
    return HashSchedule(pools, rows)


@settings(max_examples=60, deadline=None)
@given(random_schedules())
def test_conservation(s):
    p = EconomicParams(Fraction("12.5"), Fraction("11.5"))
    for r in simulate(s, p):
        total = sum(pp.deu * r.duration_days for pp in r.per_pool.values())
        assert total == (p.reward_R - r.cost_per_block) * 2016
        for pp in r.per_pool.values():
            assert pp.period_total == pp.deu * r.duration_days


@settings(max_examples=40, deadline=None)
@given(random_schedules(), st.fractions(min_value=0, max_value=1), st.fractions(min_value=-5, max_value=5))
def test_deu_linearity(s, a, net):
    t = Fraction(14)
    assert deu(a, net, 0, t) == a * deu(1, net, 0, t)
    assert deu(a, 2 * net, 0, t) == 2 * deu(a, net, 0, t)


def test_equal_multipliers_equal_deu(params):
    rng = random.Random(5)
    pools = tuple(Pool(f"p{i}", "", Fraction(1, 6)) for i in range(6))
    rows = tuple({p.id: Fraction(rng.choice([1, 3, 5]), 5) for p in pools} for _ in range(4))
    for r in simulate(HashSchedule(pools, rows), params):
        by_mult = {}
        for pp in r.per_pool.values():
            by_mult.setdefault(pp.multiplier, set()).add(pp.deu)
        assert all(len(v) == 1 for v in by_mult.values())


def test_clamp_changes_extreme_dips(pools, params):
    s = HashSchedule.constant(pools, 3)
    for pid in "ABCD":
        s = s.with_multiplier(2, pid, Fraction(1, 100))
    free = simulate(s, params)
    clamped = simulate(s, params, clamp=True)
    assert free[2].difficulty < Fraction(1, 4)
    assert clamped[2].difficulty == Fraction(1, 4)
