import time
from fractions import Fraction

import pytest

from shiftarc.arc import Bernoulli, arc_sweep, sample_generic
from shiftarc.sequence import FixedFraction

N = 10 ** 6
SEED = 7
GRID = [Fraction(i, 20) for i in range(21)]


@pytest.fixture(scope="session")
def golden_alpha():
    return FixedFraction.golden()


@pytest.fixture(scope="session")
def fair_coin():
    return sample_generic(Bernoulli((Fraction(1, 2), Fraction(1, 2))), N, SEED)


@pytest.fixture(scope="session")
def fair_sweep(fair_coin, golden_alpha):
    """21-point arc over the fair-coin window, with its wall time."""
    t0 = time.perf_counter()
    samples = arc_sweep(fair_coin, golden_alpha, GRID, k=8)
    return samples, time.perf_counter() - t0


# one pass/fail line per acceptance criterion at the end of the run

_criteria = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1].split("[")[0]
    if "test_acceptance" not in report.nodeid or not name.startswith("test_criterion_"):
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        if _criteria.get(name, "passed") == "passed":
            _criteria[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria):
        status = "PASS" if _criteria[name] == "passed" else "FAIL"
        number, _, label = name[len("test_criterion_"):].partition("_")
        terminalreporter.write_line(f"criterion {int(number):2d} {status}  {label.replace('_', ' ')}")
