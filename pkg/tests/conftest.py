import pytest

from entropy_cascade import EntropySchedule, build_from_schedule, materialize


@pytest.fixture(scope="session")
def order2():
    """Ten symbols, 2.5 bits at order one, 3.2 bits jointly at order two."""
    return build_from_schedule(EntropySchedule(10, (2.5, 3.2)))


@pytest.fixture(scope="session")
def order3():
    return build_from_schedule(EntropySchedule(10, (2.5, 3.2, 3.8)))


@pytest.fixture(scope="session")
def order2_dense(order2):
    return materialize(order2)


_acceptance = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py::test_criterion_" in report.nodeid:
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}")
