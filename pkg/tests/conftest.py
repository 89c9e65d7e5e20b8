import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_pd(rng, p, extra=3, ridge=0.05):
    a = rng.standard_normal((p + extra, p))
    return a.T @ a / (p + extra) + ridge * np.eye(p)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(module.RESULTS):
        terminalreporter.write_line(module.format_line(k, module.RESULTS[k]))
