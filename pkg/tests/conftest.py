import numpy as np
import pytest

from conekrylov.generate import random_dense_spd

# Two diagonal instances with closed-form answers.
#   D1: M = I, q = (-1, -2). h(s) = 1/(1-s)^2 - 4/(1+s)^2 has zeros 1/3 and 3;
#       only x(1/3) = (1.5, 1.5) lies in the cone.
#   D2: M = diag(1, 4), q = (1, -2). h(0) = 3/4 > 0 and the solution is
#       x(6) = (0.2, 0.2).
D1 = (np.eye(2), np.array([-1.0, -2.0]))
D2 = (np.diag([1.0, 4.0]), np.array([1.0, -2.0]))


@pytest.fixture
def d1():
    return D1


@pytest.fixture
def d2():
    return D2


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def spd30(rng):
    return random_dense_spd(30, 1e3, rng)


_CRITERIA = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    for key, value in report.user_properties:
        if key == "criterion":
            number, detail = value
            _CRITERIA[number] = ("PASS" if report.passed else "FAIL", detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        status, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {detail}")
