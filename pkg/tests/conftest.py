import pytest
from hypothesis import settings

from taufay.hirota_fay import TauContext
from taufay.matrix_tau import MatrixTauContext

settings.register_profile("default", max_examples=30, deadline=None)
settings.load_profile("default")

# one line per acceptance criterion, filled by test_acceptance.py
CRITERIA_LINES: dict = {}


@pytest.fixture(scope="session")
def t1_ctx():
    """Matrix-model T_1, Gaussian base; order 13 keeps residual coefficients exact to degree 6."""
    return TauContext(MatrixTauContext(1).tau_series(13))


@pytest.fixture(scope="session")
def t2_ctx():
    return TauContext(MatrixTauContext(2).tau_series(4))


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(CRITERIA_LINES):
            terminalreporter.write_line(CRITERIA_LINES[k])
