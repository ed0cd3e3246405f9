"""Execute a scenario and render the result as a table, CSV rows or JSON.

Tables round for display; CSV and JSON carry full float precision.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .config import Scenario
from .fork import (
    RaceOutcome,
    apply_towing,
    branch_win_probability,
    expected_branch_utility,
    monte_carlo_race,
    per_pool_expected_utility,
)
from .periods import ScenarioReport, SweepResult, run_scenario, sweep_shutdown_fraction

PERIOD_COLUMNS = ["period", "pool", "hash_multiplier", "share", "difficulty", "duration_days",
                  "cost_per_block", "deu", "period_total"]
SWEEP_COLUMNS = ["fraction", "pool", "avg_deu", "improvement_pct", "best_for_shutdown_pool"]
SPLIT_COLUMNS = ["stage", "pool", "branch", "hash", "branch_win_prob", "branch_utility",
                 "pool_expected_utility"]
RACE_COLUMNS = ["branch", "hash", "analytic_win_prob", "delay_adjusted_prob", "wins", "trials",
                "empirical_win_freq", "sigma", "z_score", "expected_utility", "seed", "delay",
                "round_cap", "backend"]


@dataclass
class SplitReport:
    stages: dict[str, Any]  # stage name -> SplitScenario
    include_at_risk: bool


@dataclass
class RunResult:
    mode: str
    scenario: Scenario
    payload: Any  # ScenarioReport | SweepResult | SplitReport | RaceOutcome


def execute(sc: Scenario) -> RunResult:
    if sc.mode == "periods":
        rep = run_scenario(sc.schedule, sc.params, sc.window_periods, sc.initial_difficulty, sc.clamp)
        return RunResult(sc.mode, sc, rep)
    if sc.mode == "sweep":
        res = sweep_shutdown_fraction(sc.schedule, sc.params, sc.sweep.pool, sc.sweep.fractions,
                                      sc.sweep.dip_period, sc.window_periods, sc.initial_difficulty,
                                      sc.clamp)
        return RunResult(sc.mode, sc, res)
    if sc.mode == "split":
        stages = {"no_towing": sc.split}
        if sc.split.agreements:
            stages["towing"] = apply_towing(sc.split)
        return RunResult(sc.mode, sc, SplitReport(stages, sc.include_at_risk))
    if sc.mode == "race":
        race = sc.race
        out = monte_carlo_race(apply_towing(sc.split), race.trials, race.seed, race.delay,
                               race.round_cap, include_at_risk=sc.include_at_risk)
        return RunResult(sc.mode, sc, out)
    raise ValueError(f"unknown mode {sc.mode!r}")


def _f(x) -> float:
    return float(x)


# -- flat rows ---------------------------------------------------------------

def rows(result: RunResult) -> tuple[list[str], list[list[Any]]]:
    p = result.payload
    if result.mode == "periods":
        out = []
        for per in p.periods:
            for pid, pp in per.per_pool.items():
                out.append([per.j, pid, _f(pp.multiplier), _f(pp.share), _f(per.difficulty),
                            _f(per.duration_days), _f(per.cost_per_block), _f(pp.deu), _f(pp.period_total)])
        return PERIOD_COLUMNS, out
    if result.mode == "sweep":
        out = []
        for pt in p.points:
            for pid in pt.avg_deu:
                best = int(pid == p.pool and pt.fraction == p.best_fraction)
                out.append([_f(pt.fraction), pid, _f(pt.avg_deu[pid]), _f(pt.improvement_pct[pid]), best])
        return SWEEP_COLUMNS, out
    if result.mode == "split":
        out = []
        for stage, s in p.stages.items():
            probs = branch_win_probability(s)
            util = expected_branch_utility(s)
            per_pool = per_pool_expected_utility(s, p.include_at_risk)
            for pool in s.pools:
                b = s.allocation[pool.id]
                out.append([stage, pool.id, b, _f(pool.base_hash), _f(probs[b]), _f(util[b]),
                            _f(per_pool[pool.id])])
        return SPLIT_COLUMNS, out
    if result.mode == "race":
        o: RaceOutcome = p
        split = apply_towing(result.scenario.split)
        bh = split.branch_hash()
        out = []
        for b in split.branches:
            sigma = o.sigma(b)
            freq = _f(o.empirical_win_freq[b])
            z = (freq - o.delay_adjusted_prob[b]) / sigma if sigma > 0 else 0.0
            out.append([b, _f(bh[b]), _f(o.analytic_win_prob[b]), o.delay_adjusted_prob[b], o.wins[b],
                        o.trials, freq, sigma, z, _f(o.expected_branch_utility[b]), o.seed,
                        "" if o.delay is None else o.delay, o.round_cap, o.backend])
        return RACE_COLUMNS, out
    raise ValueError(result.mode)


def to_csv(result: RunResult) -> str:
    header, body = rows(result)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in body:
        w.writerow([repr(x) if isinstance(x, float) else x for x in r])
    return buf.getvalue()


def emit_csv(result: RunResult, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(to_csv(result))


def to_json(result: RunResult) -> str:
    header, body = rows(result)
    doc: dict[str, Any] = {"mode": result.mode, "rows": [dict(zip(header, r)) for r in body]}
    p = result.payload
    if isinstance(p, ScenarioReport):
        doc["window"] = list(p.window)
        doc["baseline_deu"] = {k: _f(v) for k, v in p.baseline_deu.items()}
        doc["window_averages"] = {k: {"avg_deu": _f(v.avg_deu), "improvement_pct": _f(v.improvement_pct)}
                                  for k, v in p.window_averages.items()}
    elif isinstance(p, SweepResult):
        doc["pool"] = p.pool
        doc["best_fraction"] = _f(p.best_fraction)
        doc["best_avg_deu"] = _f(p.best_avg_deu)
    elif isinstance(p, RaceOutcome):
        doc["per_pool_expected"] = {k: _f(v) for k, v in p.per_pool_expected.items()}
    return json.dumps(doc, indent=2) + "\n"


# -- human tables ------------------------------------------------------------

def _grid(header: list[str], body: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in body)) if body else len(h) for i, h in enumerate(header)]
    line = "  ".join(h.rjust(w) for h, w in zip(header, widths))
    out = [line, "-" * len(line)]
    out += ["  ".join(c.rjust(w) for c, w in zip(r, widths)) for r in body]
    return "\n".join(out)


def _pct(x: Fraction | float) -> str:
    return f"{float(x):.1f}"


def to_table(result: RunResult) -> str:
    p = result.payload
    title = result.scenario.description
    parts = [title] if title else []
    if result.mode == "periods":
        rep: ScenarioReport = p
        parts.append(_grid(
            ["period", "D/D_r", "H/H_r", "block min", "days", "cost/block"],
            [[str(r.j), f"{float(r.difficulty):.4f}", f"{float(r.total_hash):.4f}",
              f"{float(r.block_minutes):.3f}", f"{float(r.duration_days):.3f}",
              f"{float(r.cost_per_block):.8f}"] for r in rep.periods]))
        parts.append(_grid(
            ["period"] + [f"DEU {pid}" for pid in rep.baseline_deu],
            [[str(r.j)] + [f"{float(pp.deu):.2f}" for pp in r.per_pool.values()] for r in rep.periods]))
        w = f"{rep.window[0]}-{rep.window[-1]}" if len(rep.window) > 1 else str(rep.window[0])
        header = ["mode"]
        for pid in rep.baseline_deu:
            header += [f"{pid} H", f"{pid} DEU", f"{pid} IV"]
        none_row, st_row = ["None"], [f"ST {w}"]
        total_cap = sum(pool.base_hash for pool in result.scenario.schedule.pools)
        for pid, base in rep.baseline_deu.items():
            full = result.scenario.schedule.pool(pid).base_hash / total_cap
            none_row += [f"{float(full) * 100:.0f}", f"{float(base):.2f}", "0.0"]
            wa = rep.window_averages[pid]
            st_row += [f"{float(rep.capacity_share[pid]) * 100:.0f}", f"{float(wa.avg_deu):.2f}",
                       _pct(wa.improvement_pct)]
        parts.append(_grid(header, [none_row, st_row]))
    elif result.mode == "sweep":
        res: SweepResult = p
        pids = list(res.points[0].avg_deu)
        header = ["fraction"] + [f"{pid} DEU" for pid in pids] + [f"{pid} IV" for pid in pids]
        body = [[f"{float(pt.fraction):.3f}"] + [f"{float(pt.avg_deu[k]):.2f}" for k in pids]
                + [_pct(pt.improvement_pct[k]) for k in pids] for pt in res.points]
        parts.append(_grid(header, body))
        parts.append(f"best shutdown fraction for {res.pool}: {float(res.best_fraction):.3f} "
                     f"(avg DEU {float(res.best_avg_deu):.2f})")
    elif result.mode == "split":
        body = []
        for stage, s in p.stages.items():
            probs = branch_win_probability(s)
            util = expected_branch_utility(s)
            for b in s.branches:
                members = ",".join(pool.id for pool in s.pools if s.allocation[pool.id] == b)
                body.append([stage, b, members, f"{float(probs[b]):.4f}", f"{float(util[b]):.4f}"])
        parts.append(_grid(["stage", "branch", "pools", "P(win)", "E[utility]"], body))
        body = []
        for stage, s in p.stages.items():
            per_pool = per_pool_expected_utility(s, p.include_at_risk)
            body.append([stage] + [f"{float(v):.4f}" for v in per_pool.values()])
        first = next(iter(p.stages.values()))
        label = "E[pool] incl. at-risk" if p.include_at_risk else "E[pool] next block"
        parts.append(label + "\n" + _grid(["stage"] + [pool.id for pool in first.pools], body))
    elif result.mode == "race":
        header, body = rows(result)
        keep = ["branch", "analytic_win_prob", "delay_adjusted_prob", "empirical_win_freq", "sigma", "z_score"]
        idx = [header.index(k) for k in keep]
        fmt = [[str(r[i]) if isinstance(r[i], str) else f"{r[i]:.6f}" for i in idx] for r in body]
        o: RaceOutcome = p
        delay = "none" if o.delay is None else f"{o.delay:g} min"
        parts.append(f"trials={o.trials} seed={o.seed} delay={delay} round_cap={o.round_cap} backend={o.backend}")
        parts.append(_grid(keep, fmt))
    return "\n\n".join(parts) + "\n"
