import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from twoside.fileformat import load

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "twoside" / "fixtures"
CORPUS = Path(__file__).resolve().parent / "corpus"

# derandomized so repeated runs are byte-identical
settings.register_profile("repro", derandomize=True, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repro")


def fixture_path(name: str) -> Path:
    return FIXTURES / f"{name}.market"


@pytest.fixture
def market():
    return lambda name: load(fixture_path(name))


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "SUMMARY", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
