import functools

import pytest

from divfield.ecurve import Curve, enumerate_torsion
from divfield.towergen import CurveInput, build_tower

ACCEPTANCE_LINES: list[str] = []

FLAGSHIPS = {
    "x(x-1)(x-10)": ("degree3", (0, 1, 10)),
    "x(x-1)(x-2)": ("degree3", (0, 1, 2)),
    "quartic 0,1,2,5": ("degree4", (0, 1, 2, 5)),
}
# first curve y^2 = x(x-a)(x-b), b <= 10, whose <sigma, tau, mu> has order 64
GALOIS_FIXTURE = ("degree3", (0, 3, 10))


@functools.lru_cache(maxsize=None)
def generators(mode, roots):
    return build_tower(CurveInput(mode, roots))


@functools.lru_cache(maxsize=None)
def torsion(mode, roots):
    g = generators(mode, roots)
    return enumerate_torsion(Curve(g.alpha), g)


@pytest.fixture
def record():
    def _record(criterion, passed, detail=""):
        line = f"criterion {criterion}: {'PASS' if passed else 'FAIL'}"
        if detail:
            line += f" ({detail})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
