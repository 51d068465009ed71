import numpy as np
import pytest

from driveby.config import ExperimentConfig
from driveby.validation import Context


@pytest.fixture(scope="session")
def cfg():
    return ExperimentConfig()


@pytest.fixture(scope="session")
def ctx(cfg):
    """Shared nominal record (intact, zero noise) and derived problems."""
    return Context(cfg)


@pytest.fixture(scope="session")
def record(ctx):
    return ctx.record


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for res in sorted(RESULTS, key=lambda r: r.number):
        terminalreporter.write_line(res.line())
