import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

SUCTION = [1] * 16 + [2] * 5 + [4]
CONTROL = [1] * 4 + [2] + [3] * 5 + [4] * 7 + [5] * 2
TOY_GROUP1 = [1956, 3828, 2051, 3721, 3233, 2000, 4000, 4428, 2603, 2370]
TOY_GROUP2 = [820, 3364, 1957, 1851, 2984, 744, 2044]


@pytest.fixture
def shoulder():
    return SUCTION, CONTROL


@pytest.fixture
def toy_effect_orientation():
    """The artificial 10 + 7 dataset ordered so that theta_hat = 0.8."""
    return TOY_GROUP2, TOY_GROUP1


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(module.summary_line(number))
