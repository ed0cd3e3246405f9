"""Strict JSON scenario files: load, validate, normalise and dump back."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from decimal import Decimal
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any

import jsonschema

from .fork import DEFAULT_ROUND_CAP, SplitScenario, Stake, TowingAgreement
from .model import EconomicParams, HashSchedule, ModelError, Pool, exact



class ConfigError(ValueError):
    """Scenario file failed validation; ``field`` names the offending location."""

    def __init__(self, message: str, field: str = ""):
        super().__init__(f"{field}: {message}" if field else message)
        self.field = field


@dataclass(frozen=True)
class SweepSpec:
    pool: str
    fractions: tuple[Fraction, ...]
    dip_period: int | None = None


@dataclass(frozen=True)
class RaceSpec:
    trials: int = 100_000
    seed: int = 0
    delay: float | None = None
    round_cap: int = DEFAULT_ROUND_CAP


@dataclass(frozen=True)
class Scenario:
    mode: str
    pools: tuple[Pool, ...]
    params: EconomicParams | None = None
    schedule: HashSchedule | None = None
    initial_difficulty: Fraction = Fraction(1)
    window: tuple[int, int] | None = None
    sweep: SweepSpec | None = None
    split: SplitScenario | None = None
    race: RaceSpec | None = None
    clamp: bool = False
    include_at_risk: bool = False
    description: str = ""

    @property
    def window_periods(self) -> tuple[int, ...] | None:
        if self.window is None:
            return None
        return tuple(range(self.window[0], self.window[1] + 1))

    def with_overrides(self, seed: int | None = None, trials: int | None = None,
                       clamp: bool | None = None, include_at_risk: bool | None = None) -> "Scenario":
        race = self.race
        if race is not None or seed is not None or trials is not None:
            race = race or RaceSpec()
            if seed is not None:
                race = replace(race, seed=seed)
            if trials is not None:
                race = replace(race, trials=trials)
        return replace(
            self,
            race=race,
            clamp=self.clamp if clamp is None else clamp,
            include_at_risk=self.include_at_risk if include_at_risk is None else include_at_risk,
        )


@lru_cache(maxsize=1)
def schema() -> dict:
    return json.loads(resources.files("minetactics").joinpath("schema.json").read_text())


def _path(error: jsonschema.ValidationError) -> str:
    parts = [str(p) for p in error.absolute_path]
    return ".".join(parts) if parts else "<root>"


def _num(x) -> Fraction:
    return exact(x)


def parse_config(data: Any) -> Scenario:
    """Validate a decoded JSON document and build the scenario objects."""
    validator = jsonschema.Draft202012Validator(schema())
    errors = sorted(validator.iter_errors(data), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise ConfigError(e.message, _path(e))
    try:
        return _build(data)
    except ModelError as exc:
        raise ConfigError(str(exc)) from exc


def _build(data: dict) -> Scenario:
    mode = data["mode"]
    try:
        pools = tuple(Pool(p["id"], p.get("name", p["id"]), _num(p["base_hash"])) for p in data["pools"])
    except ModelError as exc:
        raise ConfigError(str(exc), "pools") from exc
    ids = [p.id for p in pools]
    if len(set(ids)) != len(ids):
        raise ConfigError(f"duplicate pool ids {ids}", "pools")

    params = None
    if "params" in data:
        pr = data["params"]
        try:
            params = EconomicParams.with_period(
                _num(pr["reward"]), _num(pr["ref_cost"]),
                pr.get("blocks_per_period", 2016), _num(pr.get("target_block_minutes", 10)))
        except ModelError as exc:
            raise ConfigError(str(exc), "params") from exc

    schedule = None
    init_d = Fraction(1)
    if "periods" in data:
        body = data["periods"]
        try:
            schedule = HashSchedule(pools, tuple(body["multipliers"]), body.get("first", 1))
        except ModelError as exc:
            raise ConfigError(str(exc), "periods.multipliers") from exc
        init_d = _num(body.get("initial_difficulty", 1))
        if init_d <= 0:
            raise ConfigError("must be positive", "periods.initial_difficulty")

    window = None
    if "window" in data:
        window = (data["window"]["from"], data["window"]["to"])
        if window[0] > window[1]:
            raise ConfigError("'from' is after 'to'", "window")
        if schedule is not None and (window[0] not in schedule.periods or window[1] not in schedule.periods):
            raise ConfigError(f"outside scheduled periods {schedule.periods.start}..{schedule.periods.stop - 1}",
                              "window")

    sweep = None
    if "sweep" in data:
        body = data["sweep"]
        if body["pool"] not in ids:
            raise ConfigError(f"unknown pool {body['pool']!r}", "sweep.pool")
        fractions = tuple(_num(f) for f in body["fractions"])
        for f in fractions:
            if not 0 <= f <= 1:
                raise ConfigError(f"fraction {float(f)} not in [0, 1]", "sweep.fractions")
        dip = body.get("dip_period")
        if dip is not None and schedule is not None and dip not in schedule.periods:
            raise ConfigError(f"period {dip} not scheduled", "sweep.dip_period")
        sweep = SweepSpec(body["pool"], fractions, dip)

    split = None
    if "split" in data:
        body = data["split"]
        try:
            split = SplitScenario(
                pools,
                tuple(body["branches"]),
                dict(body["allocation"]),
                _num(body["reward"]),
                _num(body["cost"]),
                tuple(TowingAgreement(a["helper"], a["beneficiary"]) for a in body.get("agreements", [])),
                {b: Stake(s["proposer"], _num(s["at_risk"])) for b, s in body.get("stakes", {}).items()},
                _num(body.get("difficulty", 1)),
                _num(body.get("target_block_minutes", 10)),
            )
        except ModelError as exc:
            raise ConfigError(str(exc), "split") from exc

    race = None
    if "race" in data:
        body = data["race"]
        delay = body.get("delay")
        race = RaceSpec(body.get("trials", RaceSpec.trials), body.get("seed", 0),
                        None if delay is None else float(delay),
                        body.get("round_cap", DEFAULT_ROUND_CAP))

    flags = data.get("flags", {})
    return Scenario(mode, pools, params, schedule, init_d, window, sweep, split, race,
                    flags.get("clamp", False), flags.get("include_at_risk", False),
                    data.get("description", ""))


def load_config(path: str | Path) -> Scenario:
    """Read and validate a scenario file. Raises OSError or ConfigError."""
    text = Path(path).read_text()
    try:
        data = json.loads(text, parse_float=Decimal)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (line {exc.lineno})", "<root>") from exc
    return parse_config(data)


def _out(x: Fraction):
    """Plain number when it prints exactly, otherwise a "p/q" string."""
    if x.denominator == 1:
        return x.numerator
    if Fraction(repr(float(x))) == x:
        return float(x)
    return f"{x.numerator}/{x.denominator}"


def dump_config(sc: Scenario) -> dict:
    """Normalised document; ``parse_config(dump_config(s)) == s``."""
    doc: dict[str, Any] = {"mode": sc.mode}
    if sc.description:
        doc["description"] = sc.description
    doc["pools"] = [{"id": p.id, "name": p.name, "base_hash": _out(p.base_hash)} for p in sc.pools]
    if sc.params is not None:
        doc["params"] = {
            "reward": _out(sc.params.reward_R),
            "ref_cost": _out(sc.params.ref_cost_Cr),
            "blocks_per_period": sc.params.blocks_per_period,
            "target_block_minutes": _out(sc.params.target_block_minutes),
        }
    if sc.schedule is not None:
        doc["periods"] = {
            "first": sc.schedule.first_period,
            "initial_difficulty": _out(sc.initial_difficulty),
            "multipliers": [{pid: _out(m) for pid, m in row.items()} for row in sc.schedule.multipliers],
        }
    if sc.window is not None:
        doc["window"] = {"from": sc.window[0], "to": sc.window[1]}
    if sc.sweep is not None:
        body = {"pool": sc.sweep.pool, "fractions": [_out(f) for f in sc.sweep.fractions]}
        if sc.sweep.dip_period is not None:
            body["dip_period"] = sc.sweep.dip_period
        doc["sweep"] = body
    if sc.split is not None:
        s = sc.split
        doc["split"] = {
            "branches": list(s.branches),
            "allocation": dict(s.allocation),
            "agreements": [{"helper": a.helper, "beneficiary": a.beneficiary} for a in s.agreements],
            "stakes": {b: {"proposer": st.proposer, "at_risk": _out(st.at_risk)} for b, st in s.stakes.items()},
            "reward": _out(s.reward_R),
            "cost": _out(s.cost_C),
            "difficulty": _out(s.difficulty),
            "target_block_minutes": _out(s.target_block_minutes),
        }
    if sc.race is not None:
        doc["race"] = {"trials": sc.race.trials, "seed": sc.race.seed,
                       "delay": sc.race.delay, "round_cap": sc.race.round_cap}
    doc["flags"] = {"clamp": sc.clamp, "include_at_risk": sc.include_at_risk}
    return doc


def bundled_scenarios() -> dict[str, Path]:
    folder = resources.files("minetactics").joinpath("scenarios")
    return {p.name: Path(str(p)) for p in folder.iterdir() if p.name.endswith(".json")}
