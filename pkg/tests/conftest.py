"""Shared fixtures plus a one-line-per-criterion acceptance summary."""
import re

import numpy as np
import pytest

import phasesde as ps

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    m = re.search(r"test_criterion_(\d+)_(\w+)", report.nodeid)
    if m:
        _ACCEPTANCE[int(m.group(1))] = (m.group(2), report.outcome)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        label, outcome = _ACCEPTANCE[num]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(
            f"criterion {num:2d}  {label.replace('_', ' '):<48s} {status}")


@pytest.fixture
def kerr_params():
    """The coupled-oscillator parameters used throughout: chi=g=1, omega=0."""
    return ps.SystemParams(
        omega_a=0.0, omega_b=0.0, chi_a=1.0, chi_b=1.0,
        coupling=ps.CouplingSchedule.constant(1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
