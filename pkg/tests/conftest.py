import os
import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def golden_dir():
    return GOLDEN


@pytest.fixture(scope="session")
def appendix_programs():
    return [l for l in (FIXTURES / "appendix_programs.txt").read_text().splitlines() if l.strip()]


@pytest.fixture(scope="session")
def b16():
    from battleship_lips.board import PartialBoard
    return PartialBoard.from_grid(["HPWHWH", "HHHRBH", "HWHHHH", "WHWHHW", "HHWWHH", "HWHHHH"])


@pytest.fixture(scope="session")
def b16_space(b16):
    from battleship_lips.board import enumerate_hypotheses
    return enumerate_hypotheses(b16)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
