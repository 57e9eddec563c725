import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

from layouts import make  # noqa: E402

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def square4():
    return make("square4")


@pytest.fixture(scope="session")
def unit():
    return make("unit")


@pytest.fixture(scope="session")
def lshape():
    return make("lshape")


@pytest.fixture(scope="session")
def comb6():
    return make("comb6")


@pytest.fixture(scope="session")
def dumbbell():
    return make("dumbbell")


@pytest.fixture(scope="session")
def two_rooms():
    return make("two_rooms")


@pytest.fixture(scope="session")
def s_corridor():
    return make("s_corridor")


_CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture(scope="session")
def criterion():
    """Record one acceptance verdict; the summary prints them in order."""

    def record(num: int, ok: bool, detail: str) -> None:
        _CRITERIA[num] = (bool(ok), detail)
        print(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        ok, detail = _CRITERIA[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
