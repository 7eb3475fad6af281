import os
import warnings

import pytest
from hypothesis import HealthCheck, settings

from ldma.config import NearFieldValidityWarning

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(autouse=True)
def _quiet_near_field():
    # Most scenarios deliberately start inside the Fresnel boundary.
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearFieldValidityWarning)
        yield


_ACCEPTANCE = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line; the outcome is filled in after the test runs."""
    def record(number, text):
        _ACCEPTANCE[request.node.nodeid] = [number, text, None]
    return record


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    entry = _ACCEPTANCE.get(item.nodeid)
    if entry is not None and rep.when == "call":
        entry[2] = rep.passed


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, text, ok in sorted(_ACCEPTANCE.values()):
        terminalreporter.write_line(f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {text}")
