"""Command-line driver.

    minetactics run table1.json
    minetactics run split_fig1.json --format csv --out split.csv
    minetactics run race_fig1.json --trials 100000 --seed 7
    minetactics check my_scenario.json      # validate and print the normalised config
    minetactics list                        # bundled scenarios

A config path that does not exist is looked up among the bundled scenarios.
Exit codes: 0 ok, 2 validation error, 3 I/O error, 4 degenerate scenario.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, bundled_scenarios, dump_config, load_config
from .difficulty import DomainError
from .model import DegenerateNetworkError, ModelError
from .report import emit_csv, execute, to_csv, to_json, to_table

EXIT_OK, EXIT_VALIDATION, EXIT_IO, EXIT_DEGENERATE = 0, 2, 3, 4


def _resolve(name: str) -> Path:
    path = Path(name)
    if path.exists():
        return path
    bundled = bundled_scenarios()
    if name in bundled:
        return bundled[name]
    if name + ".json" in bundled:
        return bundled[name + ".json"]
    return path


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="minetactics", description=__doc__.split("\n\n")[0].strip(),
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario file")
    run.add_argument("config")
    run.add_argument("--format", choices=("table", "csv", "json"), default="table")
    run.add_argument("--out", metavar="PATH", help="write the csv/json report here")
    run.add_argument("--seed", type=int)
    run.add_argument("--trials", type=int)
    run.add_argument("--clamp", action="store_true", default=None,
                     help="bound each retarget to a factor of 4")
    run.add_argument("--at-risk", action="store_true", default=None, dest="at_risk",
                     help="count the contested block's value in per-pool expectations")

    chk = sub.add_parser("check", help="validate a scenario and print its normalised form")
    chk.add_argument("config")

    sub.add_parser("list", help="list bundled scenarios")
    return ap


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "list":
        for name in sorted(bundled_scenarios()):
            print(name)
        return EXIT_OK
    try:
        scenario = load_config(_resolve(args.config))
        if args.command == "check":
            print(json.dumps(dump_config(scenario), indent=2))
            return EXIT_OK
        if args.trials is not None and args.trials < 1:
            raise ConfigError("must be at least 1", "--trials")
        scenario = scenario.with_overrides(args.seed, args.trials, args.clamp, args.at_risk)
        result = execute(scenario)
        if args.format == "table":
            sys.stdout.write(to_table(result))
            return EXIT_OK
        text = to_csv(result) if args.format == "csv" else to_json(result)
        if args.out:
            if args.format == "csv":
                emit_csv(result, args.out)
            else:
                Path(args.out).write_text(text)
            sys.stdout.write(to_table(result))
        else:
            sys.stdout.write(text)
        return EXIT_OK
    except (ConfigError, ModelError) as exc:
        print(f"minetactics: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except DegenerateNetworkError as exc:
        print(f"minetactics: degenerate scenario: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except DomainError as exc:
        print(f"minetactics: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"minetactics: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
