import sys
import warnings
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from selfsim.tower import SelfSimilarParams  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running exhaustive checks")


@pytest.fixture(scope="session")
def p18():
    return SelfSimilarParams.hp(1, 8)


@pytest.fixture(scope="session")
def p38():
    return SelfSimilarParams.hp(3, 8)


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
