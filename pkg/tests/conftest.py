import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def rel(a, b) -> float:
    a, b = np.asarray(a), np.asarray(b)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-300))


def pytest_terminal_summary(terminalreporter):
    import sys

    mods = [m for name, m in list(sys.modules.items())
            if name.split(".")[-1] == "test_acceptance" and hasattr(m, "report_lines")]
    if mods and mods[0].RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in mods[0].report_lines():
            terminalreporter.write_line(line)
