"""Simulate the Shutdown and Towing mining-pool tactics.

Submodules: ``model`` (shared types), ``difficulty`` (retarget and cost),
``periods`` (multi-period shutdown scenarios), ``fork`` (chain splits and
the block race) and ``cli`` (JSON scenarios in, tables/CSV/JSON out).
"""

from .difficulty import ReferenceFrame, block_time, mining_cost, period_duration, retarget
from .fork import (
    BACKEND,
    RaceOutcome,
    SplitScenario,
    Stake,
    TowingAgreement,
    apply_towing,
    branch_win_probability,
    expected_branch_utility,
    monte_carlo_race,
    per_pool_expected_utility,
)
from .model import EconomicParams, HashSchedule, Pool, hash_share, total_hash
from .periods import (
    PeriodResult,
    ScenarioReport,
    deu,
    improvement_value,
    run_scenario,
    simulate,
    sweep_shutdown_fraction,
    window_average_deu,
)

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "EconomicParams", "HashSchedule", "PeriodResult", "Pool", "RaceOutcome",
    "ReferenceFrame", "ScenarioReport", "SplitScenario", "Stake", "TowingAgreement",
    "apply_towing", "block_time", "branch_win_probability", "deu", "expected_branch_utility",
    "hash_share", "improvement_value", "mining_cost", "monte_carlo_race", "per_pool_expected_utility",
    "period_duration", "retarget", "run_scenario", "simulate", "sweep_shutdown_fraction",
    "total_hash", "window_average_deu",
]
