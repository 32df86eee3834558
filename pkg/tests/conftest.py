import pytest

from limcycles.cycles import scan_cycles
from limcycles.gallery import cubic, harmonic, system8, system11, vdp


def _scan(sysm, lo=None, hi=None, n=None):
    a, b = sysm.seed_range
    return scan_cycles(sysm.field, lo or a, hi or b, n or sysm.n_seeds)


@pytest.fixture(scope="session")
def vdp_scan():
    return _scan(vdp(1.0), 0.1, 8.0, 20)


@pytest.fixture(scope="session")
def system8_scan():
    return _scan(system8(), 0.1, 3.0, 40)


@pytest.fixture(scope="session")
def system11_scan():
    return _scan(system11())


@pytest.fixture(scope="session")
def harmonic_scan():
    return _scan(harmonic())


@pytest.fixture(scope="session")
def cubic_scan():
    return _scan(cubic(1.0, 0.0, -1.0, 0.0))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.__dict__.get("_acceptance_lines")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
