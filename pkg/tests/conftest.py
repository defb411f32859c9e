import sys

import pytest

from jitmf.report import run_pipeline
from jitmf.simdevice import SCENARIO_PRESETS, SimProcess, run_scenario


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion, when that module ran."""
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None) if module else None
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok in sorted(results):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title}")


@pytest.fixture(scope="session")
def a_run(tmp_path_factory):
    """Scenario A, seed 0, fully processed. Shared read-only across tests."""
    out = tmp_path_factory.mktemp("a_run")
    artifacts = run_scenario(SCENARIO_PRESETS["A"], seed=0, out_dir=out)
    run_pipeline(artifacts.run_dir)
    return artifacts.run_dir


@pytest.fixture(scope="session")
def d_run(tmp_path_factory):
    """Scenario D (interception), seed 0, fully processed."""
    out = tmp_path_factory.mktemp("d_run")
    artifacts = run_scenario(SCENARIO_PRESETS["D"], seed=0, out_dir=out)
    run_pipeline(artifacts.run_dir)
    return artifacts.run_dir


@pytest.fixture
def process(tmp_path):
    return SimProcess("test-run", tmp_path)
