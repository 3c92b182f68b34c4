import mpmath
import pytest

from groupweights.numstats import make_rng

mpmath.mp.dps = 40


def mp_upper_tail(t):
    """High-precision oracle for the standard normal upper tail."""
    return float(mpmath.erfc(mpmath.mpf(t) / mpmath.sqrt(2)) / 2)


@pytest.fixture
def rng():
    return make_rng(12345, 0)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(RESULTS):
        title, passed, detail = RESULTS[number]
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number:2d}. {title}: {detail}")
