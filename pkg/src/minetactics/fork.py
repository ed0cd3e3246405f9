"""Chain splits: branch-win odds, towing pacts, expected utilities, block race.

The analytic side works in exact rationals. The Monte Carlo race runs on a
compiled kernel when available, falling back to a numpy implementation that
produces the same per-trial winners.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from . import _race_py
from .difficulty import block_time
from .model import Btc, DegenerateNetworkError, ModelError, Number, Pool, exact

try:
    if os.environ.get("MINETACTICS_PURE"):
        raise ImportError("compiled kernel disabled by MINETACTICS_PURE")
    from . import _race as _race_c
except ImportError:
    _race_c = None

BACKEND = "cython" if _race_c is not None else "numpy"
DEFAULT_ROUND_CAP = 8


def _kernel(backend: str | None):
    name = backend or BACKEND
    if name == "cython":
        if _race_c is None:
            raise RuntimeError("compiled race kernel is not built")
        return _race_c.race_winners
    if name == "numpy":
        return _race_py.race_winners
    raise ValueError(f"unknown backend {name!r}")


@dataclass(frozen=True)
class TowingAgreement:
    helper: str
    beneficiary: str

    def __post_init__(self):
        if self.helper == self.beneficiary:
            raise ModelError(f"pool {self.helper!r} cannot tow itself")


@dataclass(frozen=True)
class Stake:
    """The contested block already mined on a branch."""

    proposer: str
    at_risk: Btc

    def __post_init__(self):
        object.__setattr__(self, "at_risk", exact(self.at_risk))


@dataclass(frozen=True)
class SplitScenario:
    pools: tuple[Pool, ...]
    branches: tuple[str, ...]
    allocation: Mapping[str, str]
    reward_R: Btc
    cost_C: Btc
    agreements: tuple[TowingAgreement, ...] = ()
    stakes: Mapping[str, Stake] = field(default_factory=dict)
    difficulty: Fraction = Fraction(1)
    target_block_minutes: Fraction = Fraction(10)

    def __post_init__(self):
        pools = tuple(self.pools)
        ids = [p.id for p in pools]
        if not pools:
            raise ModelError("split scenario needs at least one pool")
        if len(set(ids)) != len(ids):
            raise ModelError(f"duplicate pool ids: {ids}")
        branches = tuple(self.branches)
        if len(branches) < 2 or len(set(branches)) != len(branches):
            raise ModelError("a split needs at least two distinct branches")
        alloc = dict(self.allocation)
        if set(alloc) != set(ids):
            raise ModelError(
                f"allocation must cover every pool exactly once "
                f"(missing {sorted(set(ids) - set(alloc))}, unknown {sorted(set(alloc) - set(ids))})"
            )
        for pid, b in alloc.items():
            if b not in branches:
                raise ModelError(f"pool {pid!r} allocated to unknown branch {b!r}")
        stakes = dict(self.stakes)
        for b, st in stakes.items():
            if b not in branches:
                raise ModelError(f"stake on unknown branch {b!r}")
            if st.proposer not in alloc:
                raise ModelError(f"stake proposer {st.proposer!r} is not a pool")
            if alloc[st.proposer] != b:
                raise ModelError(f"proposer {st.proposer!r} of branch {b!r} is allocated elsewhere")
        agreements = tuple(self.agreements)
        helpers = set()
        proposers = {st.proposer for st in stakes.values()}
        for a in agreements:
            for pid in (a.helper, a.beneficiary):
                if pid not in alloc:
                    raise ModelError(f"towing agreement references unknown pool {pid!r}")
            if a.helper in helpers:
                raise ModelError(f"pool {a.helper!r} is helper in more than one agreement")
            if a.helper in proposers:
                raise ModelError(f"pool {a.helper!r} proposed a contested block and cannot tow away from it")
            helpers.add(a.helper)
        object.__setattr__(self, "pools", pools)
        object.__setattr__(self, "branches", branches)
        object.__setattr__(self, "allocation", alloc)
        object.__setattr__(self, "agreements", agreements)
        object.__setattr__(self, "stakes", stakes)
        for name in ("reward_R", "cost_C", "difficulty", "target_block_minutes"):
            object.__setattr__(self, name, exact(getattr(self, name)))
        if self.difficulty <= 0 or self.target_block_minutes <= 0:
            raise ModelError("difficulty and block time must be positive")
        _towing_targets(self)  # rejects cycles

    @property
    def total_hash(self) -> Fraction:
        return sum((p.base_hash for p in self.pools), Fraction(0))

    def branch_hash(self) -> dict[str, Fraction]:
        out = {b: Fraction(0) for b in self.branches}
        for p in self.pools:
            out[self.allocation[p.id]] += p.base_hash
        return out

    def replace_allocation(self, allocation: Mapping[str, str]) -> "SplitScenario":
        return SplitScenario(self.pools, self.branches, allocation, self.reward_R, self.cost_C,
                             self.agreements, self.stakes, self.difficulty, self.target_block_minutes)


def _towing_targets(scenario: SplitScenario) -> dict[str, str]:
    """Branch each helper ends up on, following helper-of-helper chains."""
    helped = {a.helper: a.beneficiary for a in scenario.agreements}
    targets = {}
    for helper in helped:
        seen = [helper]
        pid = helped[helper]
        while pid in helped:
            if pid in seen:
                raise ModelError(f"towing agreements form a cycle through {seen}")
            seen.append(pid)
            pid = helped[pid]
        targets[helper] = scenario.allocation[pid]
    return targets


def apply_towing(scenario: SplitScenario) -> SplitScenario:
    """Move every helper onto its beneficiary's branch."""
    targets = _towing_targets(scenario)
    if all(scenario.allocation[h] == b for h, b in targets.items()):
        return scenario
    alloc = dict(scenario.allocation)
    alloc.update(targets)
    return scenario.replace_allocation(alloc)


def branch_win_probability(scenario: SplitScenario) -> dict[str, Fraction]:
    """P_b = hash mining on branch b / total hash."""
    total = scenario.total_hash
    if total == 0:
        raise DegenerateNetworkError("split scenario has zero total hash rate")
    return {b: h / total for b, h in scenario.branch_hash().items()}


def expected_branch_utility(scenario: SplitScenario) -> dict[str, Btc]:
    net = scenario.reward_R - scenario.cost_C
    return {b: p * net for b, p in branch_win_probability(scenario).items()}


def per_pool_expected_utility(scenario: SplitScenario, include_at_risk: bool = False) -> dict[str, Btc]:
    """Next-block expectation split pro-rata by hash within each branch.

    With ``include_at_risk`` each contested-block proposer also keeps its
    block's value with its branch's win probability.
    """
    probs = branch_win_probability(scenario)
    bh = scenario.branch_hash()
    net = scenario.reward_R - scenario.cost_C
    out = {}
    for p in scenario.pools:
        b = scenario.allocation[p.id]
        out[p.id] = probs[b] * net * p.base_hash / bh[b] if bh[b] else Fraction(0)
    if include_at_risk:
        for b, st in scenario.stakes.items():
            out[st.proposer] += probs[b] * st.at_risk
    return out


def delayed_win_probability(scenario: SplitScenario, delay: float | None,
                            round_cap: int = DEFAULT_ROUND_CAP) -> dict[str, float]:
    """Closed-form branch-win odds under the re-race rule of :func:`monte_carlo_race`.

    Given branch b finds the first block, the remaining branches' first block
    lies an Exp(total - rate_b) wait behind it, so b wins a round outright with
    probability ``(rate_b / total) * exp(-(total - rate_b) * delay)``. The
    last permitted round is settled by the earliest block.
    """
    probs = {b: float(p) for b, p in branch_win_probability(scenario).items()}
    if delay is None or delay <= 0 or round_cap <= 1:
        return probs
    # network-wide blocks per minute
    scale = 1 / float(block_time(scenario.difficulty, scenario.total_hash, scenario.target_block_minutes))
    decisive = {b: p * math.exp(-(1 - p) * scale * delay) for b, p in probs.items()}
    q = 1 - sum(decisive.values())
    geo = sum(q ** k for k in range(round_cap - 1))
    return {b: decisive[b] * geo + q ** (round_cap - 1) * probs[b] for b in probs}


@dataclass(frozen=True)
class RaceOutcome:
    analytic_win_prob: Mapping[str, Fraction]
    delay_adjusted_prob: Mapping[str, float]
    empirical_win_freq: Mapping[str, Fraction]
    wins: Mapping[str, int]
    trials: int
    seed: int
    delay: float | None
    round_cap: int
    expected_branch_utility: Mapping[str, Btc]
    per_pool_expected: Mapping[str, Btc]
    backend: str

    def sigma(self, branch: str) -> float:
        """Binomial standard error of the branch's empirical frequency."""
        p = float(self.delay_adjusted_prob[branch])
        return math.sqrt(p * (1 - p) / self.trials)


def _kernel_inputs(scenario: SplitScenario):
    total = scenario.total_hash
    if total == 0:
        raise DegenerateNetworkError("split scenario has zero total hash rate")
    minutes = block_time(scenario.difficulty, total, scenario.target_block_minutes)
    # per-minute rate of each pool; the whole network averages one block per `minutes`
    rates = np.array([float(p.base_hash / total / minutes) for p in scenario.pools])
    index = {b: i for i, b in enumerate(scenario.branches)}
    branch_of = np.array([index[scenario.allocation[p.id]] for p in scenario.pools], dtype=np.int64)
    return rates, branch_of


def race_winners(scenario: SplitScenario, trials: int, seed: int, delay: float | None = None,
                 round_cap: int = DEFAULT_ROUND_CAP, start_trial: int = 0,
                 backend: str | None = None) -> np.ndarray:
    """Per-trial winning branch index (into ``scenario.branches``)."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if round_cap < 1:
        raise ValueError("round_cap must be at least 1")
    if delay is not None and delay < 0:
        raise ValueError("delay must be non-negative")
    rates, branch_of = _kernel_inputs(scenario)
    kernel = _kernel(backend)
    return kernel(rates, branch_of, len(scenario.branches), int(seed), start_trial, trials,
                  -1.0 if delay is None else float(delay), round_cap)


def monte_carlo_race(scenario: SplitScenario, trials: int, seed: int, delay: float | None = None,
                     round_cap: int = DEFAULT_ROUND_CAP, backend: str | None = None,
                     include_at_risk: bool = False) -> RaceOutcome:
    """Race the branches to the next block *trials* times.

    Each pool's first block arrives after an exponential wait proportional to
    its hash share. With a propagation *delay* (minutes), a round whose two
    earliest branches finish within *delay* of each other is re-raced, up to
    *round_cap* rounds, after which the earliest block wins.
    """
    winners = race_winners(scenario, trials, seed, delay, round_cap, backend=backend)
    counts = np.bincount(winners, minlength=len(scenario.branches))
    wins = {b: int(counts[i]) for i, b in enumerate(scenario.branches)}
    return RaceOutcome(
        analytic_win_prob=branch_win_probability(scenario),
        delay_adjusted_prob=delayed_win_probability(scenario, delay, round_cap),
        empirical_win_freq={b: Fraction(n, trials) for b, n in wins.items()},
        wins=wins,
        trials=trials,
        seed=seed,
        delay=delay,
        round_cap=round_cap,
        expected_branch_utility=expected_branch_utility(scenario),
        per_pool_expected=per_pool_expected_utility(scenario, include_at_risk),
        backend=backend or BACKEND,
    )


def fig1_split(towing: bool = False, reward: Number = 50, cost: Number = 10) -> SplitScenario:
    """The five-pool split at height 1002: A proposes upper, B proposes lower."""
    pools = tuple(Pool(i, f"Pool {i}", Fraction(1, 5)) for i in "ABCDE")
    alloc = {"A": "upper", "B": "lower", "C": "upper", "D": "upper", "E": "upper"}
    net = exact(reward) - exact(cost)
    return SplitScenario(
        pools, ("upper", "lower"), alloc, reward, cost,
        agreements=(TowingAgreement("C", "B"),) if towing else (),
        stakes={"upper": Stake("A", net), "lower": Stake("B", net)},
    )
