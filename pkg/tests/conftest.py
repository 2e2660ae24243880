import pytest

from cacit import bundled, load_fixture


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config._acceptance = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    results = item.config._acceptance
    prev = results.get(number, (title, "PASS"))
    failed = rep.failed or (rep.when == "call" and rep.skipped)
    results[number] = (title, "FAIL" if failed or prev[1] == "FAIL" else "PASS")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config._acceptance
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, status = results[number]
        terminalreporter.write_line(f"criterion {number}: {status}  {title}")


@pytest.fixture
def overlap():
    return load_fixture(bundled("overlap.yaml"))


@pytest.fixture
def interaction():
    return load_fixture(bundled("interaction.yaml"))


@pytest.fixture
def dontcare():
    return load_fixture(bundled("dontcare.yaml"))
