from importlib import resources

import pytest

from pha.bayesnet import compile_bn, parse_bn
from pha.kb import build_kb, load_kb


def data_text(name: str) -> str:
    return resources.files("pha").joinpath("data", name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def listing_text():
    return data_text("smoke_alarm.pha")


@pytest.fixture(scope="session")
def listing_kb(listing_text):
    return load_kb(listing_text)


@pytest.fixture(scope="session")
def alarm_bn():
    return parse_bn(data_text("smoke_alarm.json"))


@pytest.fixture(scope="session")
def alarm_compiled(alarm_bn):
    return compile_bn(alarm_bn)


@pytest.fixture(scope="session")
def alarm_kb(alarm_compiled):
    return build_kb(alarm_compiled.program)



_verdicts = {}


@pytest.fixture
def record(capsys):
    """Print and remember a one-line verdict for an acceptance criterion."""
    def emit(number, ok, detail):
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail})"
        _verdicts[number] = line
        with capsys.disabled():
            print(f"\n{line}")
    return emit


def pytest_terminal_summary(terminalreporter):
    if _verdicts:
        terminalreporter.section("acceptance criteria")
        for number in sorted(_verdicts):
            terminalreporter.write_line(_verdicts[number])
