import numpy as np
import pytest

from powheat import GridSpec, PowerLawParameter

A_VALUES = (1 / 3, 2 / 3, 1.0, 3 / 2)
MU_VALUES = (-1.0, 0.0, 2.0)
KAPPA_VALUES = (0.5, 1.0)

# results of the acceptance criteria, printed in the terminal summary
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=A_VALUES, ids=lambda a: f"a={a:.4g}")
def param(request):
    return PowerLawParameter(request.param)


@pytest.fixture
def window():
    return GridSpec(0.5, 2.0, 7, 0.5, 2.0, 7)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
