import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_invertible(rng, dim, max_cond=1e4):
    """Random matrix with singular values log-spaced between 1 and 1/max_cond**0.9."""
    u, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    v, _ = np.linalg.qr(rng.standard_normal((dim, dim)))
    s = np.logspace(0, -0.9 * np.log10(max_cond), dim) if dim > 1 else np.ones(1)
    return u @ np.diag(s) @ v.T


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
