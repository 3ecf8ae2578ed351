import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def well_conditioned(rng, n):
    """Random matrix with a dominant diagonal, so LU needs no luck."""
    return rng.standard_normal((n, n)) + n * np.eye(n)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for key in sorted(lines, key=lambda k: (int(k.rstrip("abcd")), k)):
            terminalreporter.write_line(lines[key])
