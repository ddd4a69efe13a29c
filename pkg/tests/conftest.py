"""Shared fixtures and the acceptance summary printed at the end of a run."""

from __future__ import annotations

from collections import OrderedDict

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from fluxtorque.materials import default_material_db

settings.register_profile("fluxtorque", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("fluxtorque")

_ACCEPTANCE: "OrderedDict[int, dict]" = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): end-to-end acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        number, title = marker.args
        entry = _ACCEPTANCE.setdefault(number, {"title": title, "failed": [], "passed": []})
        (entry["passed"] if report.outcome == "passed" else entry["failed"]).append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        entry = _ACCEPTANCE[number]
        status = "PASS" if not entry["failed"] else "FAIL"
        detail = "" if not entry["failed"] else f"  (failing: {', '.join(entry['failed'])})"
        terminalreporter.write_line(f"criterion {number:2d} {status}: {entry['title']}{detail}")


@pytest.fixture(scope="session")
def db():
    return default_material_db()


@pytest.fixture(scope="session")
def insb(db):
    """Default nonlocal substrate magnetized by 1 T along x."""
    return db["InSb-n-doped"].with_field([1.0, 0.0, 0.0])


@pytest.fixture(scope="session")
def insb_b0(db):
    return db["InSb-n-doped"].with_field([0.0, 0.0, 0.0])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
