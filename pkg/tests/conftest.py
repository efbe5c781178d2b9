import json
import os
import sys

import pytest

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "data")


class FakeClock:
    """Manually advanced clock for deterministic timeout behavior."""

    def __init__(self, start=0.0):
        self.t = float(start)

    def advance(self, dt):
        self.t += dt

    def __call__(self):
        return self.t


def pytest_terminal_summary(terminalreporter):
    verdicts = getattr(sys, "_acceptance_verdicts", [])
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for line in verdicts:
            terminalreporter.write_line(line)


@pytest.fixture
def clock():
    return FakeClock()


@pytest.fixture
def golden():
    with open(os.path.join(DATA_DIR, "golden.json"), encoding="utf-8") as fh:
        return json.load(fh)


@pytest.fixture
def datapath(clock):
    from ofswitch.datapath import Datapath

    dp = Datapath(datapath_id=1, clock=clock)
    for p in range(1, 5):
        dp.ports.add(p)
    return dp
