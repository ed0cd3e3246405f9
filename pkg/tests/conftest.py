import json
from fractions import Fraction
from pathlib import Path

import pytest

from minetactics.model import EconomicParams, HashSchedule, five_pools

FIXTURES = Path(__file__).parent / "fixtures"


def load_fixture(name):
    return json.loads((FIXTURES / name).read_text())


@pytest.fixture
def params():
    return EconomicParams(Fraction("12.5"), Fraction("11.5"))


@pytest.fixture
def pools():
    return five_pools()


@pytest.fixture
def fig2_schedule(pools):
    full = {p.id: 1 for p in pools}
    dip = dict(full, A=Fraction(1, 2))
    return HashSchedule(pools, (full, dip, full, full), first_period=301)


def pytest_terminal_summary(terminalreporter, config):
    lines = getattr(config, "_acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
