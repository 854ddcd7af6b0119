"""Shared fixtures plus a summary block for the acceptance suite."""

import numpy as np
import pytest

from famlearn import SignalModel, build_line, uniform_problem

_acceptance_outcomes: dict[str, str] = {}


@pytest.fixture
def binary_model():
    """Two states, two signals, 0.8/0.2 confirmation structure."""
    return SignalModel.from_rows([[0.8, 0.2], [0.2, 0.8]])


@pytest.fixture
def ladder_model():
    return SignalModel.from_rows([[0.7, 0.3], [0.3, 0.7]])


@pytest.fixture
def ladder4(ladder_model):
    return build_line(ladder_model, 4)


@pytest.fixture
def ladder_problem(ladder_model):
    return uniform_problem(ladder_model)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance_outcomes[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_acceptance_outcomes):
        outcome = _acceptance_outcomes[name].upper()
        terminalreporter.write_line(f"{name:<40s} {outcome}")
