import math

import pytest

from bandedge import build_crystal, quarter_wave_stack

#: quarter-wave frequency of the canonical stack: n1*d1*omega0 = pi/2 with n1*d1 = 2/3
OMEGA0 = 3 * math.pi / 4

CRYSTAL_LAYERS = {
    "canonical": [(1.0, 2 / 3), (2.0, 1 / 3)],
    "asymmetric": [(1.0, 0.3), (3.0, 0.2), (1.5, 0.5)],
    "high_contrast": [(1.0, 0.7), (3.5, 0.3)],
}

_ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, name: str, passed: bool, detail: str) -> None:
    _ACCEPTANCE_LINES.append(f"criterion {number:>2} [{'PASS' if passed else 'FAIL'}] {name}: {detail}")


@pytest.fixture(scope="session")
def canonical():
    return quarter_wave_stack()


@pytest.fixture(scope="session")
def uniform():
    return build_crystal([(1.5, 1.0)])


@pytest.fixture(scope="session", params=sorted(CRYSTAL_LAYERS))
def any_crystal(request):
    return build_crystal(CRYSTAL_LAYERS[request.param])


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
