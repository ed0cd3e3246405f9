"""Retarget rule, block-time kinematics and the difficulty-linked cost model.

All functions are generic over numeric types: pass Fractions for exact
results, floats for quick estimates.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import Btc, DegenerateNetworkError, EconomicParams, ModelError, exact

MINUTES_PER_DAY = 1440
CLAMP_FACTOR = 4

DEFAULT_PARAMS_MINUTES = Fraction(10)
DEFAULT_PERIOD_DAYS = Fraction(14)


class DomainError(ValueError):
    """Argument outside the function's domain (non-positive duration etc.)."""


@dataclass(frozen=True)
class ReferenceFrame:
    """Reference network: H_r and D_r are 1 by convention."""

    C_r: Btc
    target_period_days: Fraction = DEFAULT_PERIOD_DAYS
    H_r: Fraction = Fraction(1)
    D_r: Fraction = Fraction(1)

    def __post_init__(self):
        for name in ("C_r", "target_period_days", "H_r", "D_r"):
            object.__setattr__(self, name, exact(getattr(self, name)))
        if self.H_r <= 0 or self.D_r <= 0 or self.target_period_days <= 0:
            raise ModelError("reference hash, difficulty and period must be positive")

    @classmethod
    def from_params(cls, params: EconomicParams) -> "ReferenceFrame":
        return cls(params.ref_cost_Cr, params.target_period_days)


def retarget(D_prev, t_prev, target_period_days=DEFAULT_PERIOD_DAYS, clamp: bool = False):
    """Next period's difficulty given the previous difficulty and duration in days.

    With ``clamp`` the adjustment ratio is bounded to [1/4, 4] as on mainnet.
    """
    if t_prev <= 0:
        raise DomainError(f"period duration must be positive, got {t_prev}")
    if D_prev <= 0:
        raise DomainError(f"difficulty must be positive, got {D_prev}")
    ratio = target_period_days / t_prev
    if clamp:
        lo = Fraction(1, CLAMP_FACTOR) if isinstance(ratio, Fraction) else 1 / CLAMP_FACTOR
        ratio = min(max(ratio, lo), CLAMP_FACTOR)
    return D_prev * ratio


def block_time(D, H, target_block_minutes=DEFAULT_PARAMS_MINUTES, D_r=1, H_r=1):
    """Expected minutes per block at difficulty *D* and network hash *H*."""
    if H <= 0:
        raise DegenerateNetworkError(f"hash rate must be positive, got {H}")
    if D <= 0:
        raise DomainError(f"difficulty must be positive, got {D}")
    return target_block_minutes * (D / D_r) * (H_r / H)


def period_duration(D, H, params: EconomicParams | None = None):
    """Days needed to mine one full period at difficulty *D* and hash *H*."""
    minutes = params.target_block_minutes if params else DEFAULT_PARAMS_MINUTES
    blocks = params.blocks_per_period if params else 2016
    return blocks * block_time(D, H, minutes) / MINUTES_PER_DAY


def mining_cost(D, frame: ReferenceFrame):
    """Network-wide cost of mining one block; linear in difficulty."""
    if D <= 0:
        raise DomainError(f"difficulty must be positive, got {D}")
    return frame.C_r * (D / frame.D_r)
