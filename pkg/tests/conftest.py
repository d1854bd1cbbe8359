import json
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from sfcplace import kariz
from sfcplace.datasets import worked_example

DATA = Path(__file__).parent / "data"

settings.register_profile("sfcplace", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("sfcplace")

# every improve() call in the session is audited against the action-count bound
ALL_TRACES: list = []
kariz.TRACE_SINK = ALL_TRACES

# one PASS/FAIL line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE: list = []


@pytest.fixture(scope="session")
def worked():
    return worked_example()


@pytest.fixture(scope="session")
def oracle_optima():
    return json.loads((DATA / "oracle_optima.json").read_text())


def pytest_collection_modifyitems(config, items):
    # the improve-bound criterion audits traces from the whole run, so it goes last
    last = [it for it in items if it.name == "test_c6_improve_bound"]
    items[:] = [it for it in items if it not in last] + last


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
    bad = [t for t in ALL_TRACES if not (t.within_bound() and t.steps_sufficient())]
    applied = sum(len(t.steps) for t in ALL_TRACES)
    terminalreporter.write_line(
        f"improve audit: {len(ALL_TRACES)} invocations, {applied} applied actions, "
        f"{len(bad)} violating the bound")


def pytest_sessionfinish(session, exitstatus):
    if any(not (t.within_bound() and t.steps_sufficient()) for t in ALL_TRACES):
        session.exitstatus = 1
