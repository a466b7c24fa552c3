import numpy as np
import pytest

from nlspec.discretization import DiscreteOperator, Mesh, Weight
from nlspec.kernel import Kernel


@pytest.fixture(scope="session")
def frac32():
    """Pure s = 1/4 kernel on (-1, 1) with 32 interior nodes."""
    return DiscreteOperator.from_kernel(Kernel.fractional(0.25), Mesh(-1.0, 1.0, 32))


@pytest.fixture(scope="session")
def frac64():
    return DiscreteOperator.from_kernel(Kernel.fractional(0.25), Mesh(-1.0, 1.0, 64))


def random_weight(rng, n_cells, lo=-1.0, hi=1.0):
    return Weight(rng.uniform(lo, hi, n_cells))


def half_split(mesh):
    """+1 on the left half of the cells, -1 on the right half."""
    j = np.arange(mesh.n_cells)
    return Weight(np.where(j < mesh.n_cells / 2, 1.0, -1.0))


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, title: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
