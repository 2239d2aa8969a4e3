import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture(scope="session")
def material():
    from softring.design import MaterialSpec
    return MaterialSpec()


@pytest.fixture(scope="session")
def prototype():
    from softring.design import prototype_spec
    return prototype_spec()


@pytest.fixture(scope="session")
def soft_prototype():
    from softring.design import soft_prototype_spec
    return soft_prototype_spec()


@pytest.fixture(scope="session")
def rigid_prototype(prototype):
    from softring.design import RIGID_K, with_stiffness
    return with_stiffness(prototype, RIGID_K)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod and mod.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.RESULTS):
            terminalreporter.write_line(line)
