"""Multi-period shutdown scenarios: difficulty, duration, cost and daily utility.

Every quantity is carried as an exact rational, so conservation checks hold
to the last satoshi and reruns are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .difficulty import DomainError, ReferenceFrame, mining_cost, period_duration, retarget
from .model import (
    Btc,
    DegenerateNetworkError,
    EconomicParams,
    HashSchedule,
    ModelError,
    Number,
    exact,
    total_hash,
)


@dataclass(frozen=True)
class PoolPeriod:
    multiplier: Fraction  # fraction of base capacity running
    hash: Fraction  # multiple of H_r
    share: Fraction
    deu: Btc  # BTC per day
    period_total: Btc


@dataclass(frozen=True)
class PeriodResult:
    j: int
    difficulty: Fraction
    total_hash: Fraction
    duration_days: Fraction
    block_minutes: Fraction
    cost_per_block: Btc
    per_pool: Mapping[str, PoolPeriod]


@dataclass(frozen=True)
class WindowAverage:
    avg_deu: Btc
    improvement_pct: Fraction


@dataclass(frozen=True)
class ScenarioReport:
    periods: tuple[PeriodResult, ...]
    window: tuple[int, ...]
    window_averages: Mapping[str, WindowAverage]
    baseline_deu: Mapping[str, Btc]
    capacity_share: Mapping[str, Fraction] = field(default_factory=dict)

    def period(self, j: int) -> PeriodResult:
        for p in self.periods:
            if p.j == j:
                return p
        raise KeyError(j)


def deu(share, R, C, t, blocks_per_period: int = 2016):
    """Daily expected utility: a pool's expected net reward per day."""
    if t <= 0:
        raise DomainError(f"period duration must be positive, got {t}")
    if not 0 <= share <= 1:
        raise DomainError(f"share must be in [0, 1], got {share}")
    return share * (R - C) * blocks_per_period / t


def simulate(schedule: HashSchedule, params: EconomicParams, D_initial: Number = 1,
             n_periods: int | None = None, clamp: bool = False) -> list[PeriodResult]:
    """Run the schedule period by period, retargeting between periods."""
    n = schedule.n_periods if n_periods is None else n_periods
    if n < 1 or n > schedule.n_periods:
        raise ModelError(f"schedule covers {schedule.n_periods} periods, asked for {n}")
    D = exact(D_initial)
    if D <= 0:
        raise ModelError("initial difficulty must be positive")
    frame = ReferenceFrame.from_params(params)
    R = params.reward_R
    results: list[PeriodResult] = []
    for j in schedule.periods[:n]:
        if results:
            prev = results[-1]
            D = retarget(prev.difficulty, prev.duration_days, params.target_period_days, clamp)
        H = total_hash(schedule, j)
        if H == 0:
            raise DegenerateNetworkError(f"period {j} has zero total hash rate", period=j)
        t = period_duration(D, H, params)
        C = mining_cost(D, frame)
        per_pool = {}
        for pool in schedule.pools:
            m = schedule.row(j)[pool.id]
            h = m * pool.base_hash
            share = h / H
            d = deu(share, R, C, t, params.blocks_per_period)
            per_pool[pool.id] = PoolPeriod(m, h, share, d, d * t)
        results.append(PeriodResult(j, D, H, t, t * 1440 / params.blocks_per_period, C, per_pool))
    return results


def window_average_deu(results: Sequence[PeriodResult], pool_id: str, window: Iterable[int]) -> Btc:
    """Time-weighted DEU over *window*: total utility divided by total days."""
    js = list(window)
    if not js:
        raise DomainError("empty averaging window")
    by_j = {r.j: r for r in results}
    missing = [j for j in js if j not in by_j]
    if missing:
        raise DomainError(f"window periods {missing} not in results")
    earned = sum((by_j[j].per_pool[pool_id].period_total for j in js), Fraction(0))
    days = sum((by_j[j].duration_days for j in js), Fraction(0))
    return earned / days


def simple_mean_deu(results: Sequence[PeriodResult], pool_id: str, window: Iterable[int]) -> Btc:
    """Unweighted mean of per-period DEUs; kept to contrast with the time-weighted rule."""
    js = list(window)
    if not js:
        raise DomainError("empty averaging window")
    by_j = {r.j: r for r in results}
    return sum((by_j[j].per_pool[pool_id].deu for j in js), Fraction(0)) / len(js)


def improvement_value(avg, baseline):
    """Percentage gain of *avg* over *baseline*."""
    if baseline <= 0:
        raise DomainError(f"baseline must be positive, got {baseline}")
    return 100 * (avg / baseline - 1)


def baseline_deu(schedule: HashSchedule, params: EconomicParams) -> dict[str, Btc]:
    """Each pool's DEU in the reference period: full capacity at D_r."""
    H = sum((p.base_hash for p in schedule.pools), Fraction(0))
    t = period_duration(Fraction(1), H, params)
    C = params.ref_cost_Cr
    return {p.id: deu(p.base_hash / H, params.reward_R, C, t, params.blocks_per_period)
            for p in schedule.pools}


def run_scenario(schedule: HashSchedule, params: EconomicParams, window: Iterable[int] | None = None,
                 D_initial: Number = 1, clamp: bool = False) -> ScenarioReport:
    """Simulate the whole schedule and summarise DEU and IV over *window*."""
    results = simulate(schedule, params, D_initial, clamp=clamp)
    js = tuple(window) if window is not None else tuple(schedule.periods)
    base = baseline_deu(schedule, params)
    averages = {}
    for pid in schedule.pool_ids:
        avg = window_average_deu(results, pid, js)
        iv = improvement_value(avg, base[pid]) if base[pid] > 0 else Fraction(0)
        averages[pid] = WindowAverage(avg, iv)
    # capacity share during the first window period, as a fraction of full network capacity
    capacity = sum((p.base_hash for p in schedule.pools), Fraction(0))
    first = js[0]
    cap = {p.id: schedule.pool_hash(first, p.id) / capacity for p in schedule.pools}
    return ScenarioReport(tuple(results), js, averages, base, cap)


@dataclass(frozen=True)
class SweepPoint:
    fraction: Fraction
    avg_deu: Mapping[str, Btc]
    improvement_pct: Mapping[str, Fraction]


@dataclass(frozen=True)
class SweepResult:
    pool: str
    points: tuple[SweepPoint, ...]
    best_fraction: Fraction
    best_avg_deu: Btc


def sweep_shutdown_fraction(schedule: HashSchedule, params: EconomicParams, pool: str,
                            fractions: Iterable[Number], dip_period: int | None = None,
                            window: Iterable[int] | None = None, D_initial: Number = 1,
                            clamp: bool = False) -> SweepResult:
    """Evaluate the shutdown tactic for each fraction of *pool*'s capacity idled.

    The base schedule supplies every other multiplier; only *pool*'s entry in
    *dip_period* (default: first window period) is replaced by ``1 - fraction``.
    """
    js = tuple(window) if window is not None else tuple(schedule.periods)
    dip = js[0] if dip_period is None else dip_period
    schedule.pool(pool)
    points = []
    for f in fractions:
        f = exact(f)
        if not 0 <= f <= 1:
            raise DomainError(f"shutdown fraction {float(f)} not in [0, 1]")
        report = run_scenario(schedule.with_multiplier(dip, pool, 1 - f), params, js, D_initial, clamp)
        points.append(SweepPoint(
            f,
            {pid: wa.avg_deu for pid, wa in report.window_averages.items()},
            {pid: wa.improvement_pct for pid, wa in report.window_averages.items()},
        ))
    if not points:
        raise DomainError("no shutdown fractions given")
    best = max(points, key=lambda p: p.avg_deu[pool])
    return SweepResult(pool, tuple(points), best.fraction, best.avg_deu[pool])
