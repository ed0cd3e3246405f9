"""Domain types shared by the difficulty, period and fork modules.

Hash rates and difficulties are dimensionless multiples of a reference
network (H_r = 1, D_r = 1). Quantities handed to the deterministic engines
are converted to :class:`fractions.Fraction`, so period accounting is exact
and BTC amounts never pick up binary-float drift.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from numbers import Rational
from typing import Mapping, Sequence, Union

Number = Union[int, float, str, Decimal, Fraction]

# Aliases document units; all three are exact rationals inside the engines.
Btc = Fraction
HashRate = Fraction
Difficulty = Fraction

SATOSHI = Fraction(1, 100_000_000)


class ModelError(ValueError):
    """Malformed scenario input."""


class ScheduleBoundsError(ModelError, IndexError):
    """A period index outside the schedule."""


class DegenerateNetworkError(ValueError):
    """Zero total hash rate where a positive one is required."""

    def __init__(self, message: str, period: int | None = None):
        super().__init__(message)
        self.period = period


def exact(x: Number) -> Fraction:
    """Convert *x* to an exact rational.

    Floats go through their shortest repr, so ``exact(0.2) == Fraction(1, 5)``
    rather than the binary expansion of 0.2.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        if x != x or x in (float("inf"), float("-inf")):
            raise ModelError(f"non-finite value {x!r}")
        return Fraction(repr(x))
    if isinstance(x, (Decimal, str)):
        return Fraction(x)
    raise TypeError(f"cannot convert {type(x).__name__} to an exact number")


def to_satoshi(amount: Number) -> int:
    """Round a BTC amount to whole satoshis (half away from zero)."""
    q = exact(amount) / SATOSHI
    n = abs(q.numerator) * 2 + q.denominator
    r = n // (2 * q.denominator)
    return r if q >= 0 else -r


@dataclass(frozen=True)
class Pool:
    id: str
    name: str
    base_hash: HashRate

    def __post_init__(self):
        if not isinstance(self.id, str) or not self.id:
            raise ModelError("pool id must be a non-empty string")
        object.__setattr__(self, "base_hash", exact(self.base_hash))
        if self.base_hash <= 0:
            raise ModelError(f"pool {self.id!r}: base_hash must be > 0")


@dataclass(frozen=True)
class EconomicParams:
    reward_R: Btc
    ref_cost_Cr: Btc
    blocks_per_period: int = 2016
    target_block_minutes: Fraction = Fraction(10)
    target_period_days: Fraction = Fraction(14)

    def __post_init__(self):
        for name in ("reward_R", "ref_cost_Cr", "target_block_minutes", "target_period_days"):
            object.__setattr__(self, name, exact(getattr(self, name)))
        if not isinstance(self.blocks_per_period, int) or self.blocks_per_period <= 0:
            raise ModelError("blocks_per_period must be a positive integer")
        if self.target_block_minutes <= 0 or self.target_period_days <= 0:
            raise ModelError("target block time and period length must be positive")
        if self.blocks_per_period * self.target_block_minutes != self.target_period_days * 1440:
            raise ModelError(
                "blocks_per_period * target_block_minutes must equal target_period_days * 1440"
            )

    @classmethod
    def with_period(cls, reward_R: Number, ref_cost_Cr: Number,
                    blocks_per_period: int = 2016, target_block_minutes: Number = 10) -> "EconomicParams":
        """Build params deriving the period length from the block count and block time."""
        minutes = exact(target_block_minutes)
        return cls(reward_R, ref_cost_Cr, blocks_per_period, minutes,
                   blocks_per_period * minutes / 1440)


@dataclass(frozen=True)
class HashSchedule:
    """Per-period hash multipliers for a fixed pool set.

    ``multipliers[k][pool_id]`` is the fraction of the pool's base hash that
    runs during period ``first_period + k``.
    """

    pools: tuple[Pool, ...]
    multipliers: tuple[Mapping[str, Fraction], ...]
    first_period: int = 1
    _by_id: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        pools = tuple(self.pools)
        ids = [p.id for p in pools]
        if not pools:
            raise ModelError("schedule needs at least one pool")
        if len(set(ids)) != len(ids):
            raise ModelError(f"duplicate pool ids: {ids}")
        rows = []
        for k, row in enumerate(self.multipliers):
            if set(row) != set(ids):
                missing = sorted(set(ids) - set(row))
                extra = sorted(set(row) - set(ids))
                raise ModelError(
                    f"period {self.first_period + k}: multiplier row must cover exactly "
                    f"the pool set (missing {missing}, unknown {extra})"
                )
            converted = {pid: exact(row[pid]) for pid in ids}
            for pid, m in converted.items():
                if not 0 <= m <= 1:
                    raise ModelError(
                        f"period {self.first_period + k}, pool {pid!r}: multiplier {float(m)} not in [0, 1]"
                    )
            rows.append(converted)
        if not rows:
            raise ModelError("schedule needs at least one period")
        object.__setattr__(self, "pools", pools)
        object.__setattr__(self, "multipliers", tuple(rows))
        object.__setattr__(self, "_by_id", {p.id: p for p in pools})

    @classmethod
    def constant(cls, pools: Sequence[Pool], n_periods: int, first_period: int = 1) -> "HashSchedule":
        """All pools at full capacity for *n_periods* periods."""
        return cls(tuple(pools), tuple({p.id: 1 for p in pools} for _ in range(n_periods)), first_period)

    @property
    def n_periods(self) -> int:
        return len(self.multipliers)

    @property
    def periods(self) -> range:
        return range(self.first_period, self.first_period + self.n_periods)

    @property
    def pool_ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.pools)

    def pool(self, pool_id: str) -> Pool:
        try:
            return self._by_id[pool_id]
        except KeyError:
            raise ModelError(f"unknown pool {pool_id!r}") from None

    def row(self, j: int) -> Mapping[str, Fraction]:
        k = j - self.first_period
        if not 0 <= k < self.n_periods:
            raise ScheduleBoundsError(
                f"period {j} outside schedule {self.first_period}..{self.first_period + self.n_periods - 1}"
            )
        return self.multipliers[k]

    def multiplier(self, j: int, pool_id: str) -> Fraction:
        self.pool(pool_id)
        return self.row(j)[pool_id]

    def pool_hash(self, j: int, pool_id: str) -> HashRate:
        return self.row(j)[pool_id] * self.pool(pool_id).base_hash

    def with_multiplier(self, j: int, pool_id: str, value: Number) -> "HashSchedule":
        """Copy of the schedule with one entry replaced."""
        self.row(j)
        self.pool(pool_id)
        rows = [dict(r) for r in self.multipliers]
        rows[j - self.first_period][pool_id] = exact(value)
        return HashSchedule(self.pools, tuple(rows), self.first_period)


def total_hash(schedule: HashSchedule, j: int) -> HashRate:
    """Network hash rate during period *j*."""
    row = schedule.row(j)
    return sum((row[p.id] * p.base_hash for p in schedule.pools), Fraction(0))


def hash_share(schedule: HashSchedule, j: int, pool_id: str) -> Fraction:
    """Fraction of period *j*'s network hash contributed by *pool_id*."""
    total = total_hash(schedule, j)
    if total == 0:
        raise DegenerateNetworkError(f"period {j} has zero total hash rate", period=j)
    return schedule.pool_hash(j, pool_id) / total


def five_pools(share: Number = Fraction(1, 5), ids: str = "ABCDE") -> tuple[Pool, ...]:
    """The equal-share five-pool network used throughout the worked examples."""
    return tuple(Pool(i, f"Pool {i}", share) for i in ids)
