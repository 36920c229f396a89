from fractions import Fraction

import pytest

from tdcfie import BoundarySignal

REF_DT = Fraction(97, 6400)
REF_DT_OSC = Fraction(97, 12800)


@pytest.fixture(scope="session")
def nonosc():
    return BoundarySignal.non_oscillatory()


@pytest.fixture(scope="session")
def osc():
    return BoundarySignal.oscillatory()


# --- acceptance reporting: one line per criterion in the terminal summary ------

_ACCEPTANCE: dict[str, str] = {}


class _Criterion:
    def __init__(self, key):
        self.key = key
        self.recorded = False

    def record(self, ok: bool, detail: str) -> None:
        _ACCEPTANCE[self.key] = f"criterion {self.key}: {'PASS' if ok else 'FAIL'}  {detail}"
        self.recorded = True


@pytest.fixture
def criterion(request):
    key = request.node.get_closest_marker("criterion").args[0]
    c = _Criterion(key)
    yield c
    if not c.recorded:
        _ACCEPTANCE[key] = f"criterion {key}: FAIL  (raised before a result was recorded)"


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE, key=lambda k: int(k)):
        terminalreporter.write_line(_ACCEPTANCE[key])
