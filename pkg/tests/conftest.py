from pathlib import Path

import pytest

from patgen import _kernels
from patgen.eventlog import read_log
from patgen.petri import read_pnml

FIXTURES = Path(__file__).parent / "fixtures"

# both kernel paths when numba is available
KERNEL_PATHS = [False, True] if _kernels.USE_NUMBA else [False]


@pytest.fixture(scope="session")
def fixtures():
    return FIXTURES


@pytest.fixture(scope="session")
def running_log():
    return read_log(FIXTURES / "running.csv")


@pytest.fixture(scope="session")
def running_net():
    return read_pnml(FIXTURES / "running.pnml")


@pytest.fixture(scope="session")
def local_oracle_path():
    return FIXTURES / "local.json"


@pytest.fixture(params=KERNEL_PATHS, ids=lambda j: "numba" if j else "numpy")
def jit(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
