import math

import pytest

from vlczone.channel import AccessPoint, RateModel, Receiver

D_V = 3.5


def make_ap(theta_deg=60.0, **kw):
    kw.setdefault("position", (0.0, 0.0, D_V))
    return AccessPoint(id=kw.pop("id", 1), half_angle=math.radians(theta_deg), **kw)


@pytest.fixture(scope="session")
def rx():
    return Receiver()


@pytest.fixture(scope="session")
def model():
    return RateModel()


@pytest.fixture(scope="session")
def ap60():
    return make_ap(60.0)


# One line per acceptance criterion, filled in by tests/test_acceptance.py
# and echoed at the end of the run.
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
