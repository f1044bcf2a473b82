"""Collects the acceptance outcomes and prints one line per criterion at the end of the run."""

import pytest

_outcomes: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    props = dict(report.user_properties)
    n = props.get("criterion")
    if n is None:
        return
    ok, notes = _outcomes.setdefault(n, [True, []])
    _outcomes[n][0] = ok and report.passed
    notes.extend(v for k, v in report.user_properties if k == "detail")


@pytest.fixture(autouse=True)
def _tag_criterion(request):
    m = request.node.get_closest_marker("criterion")
    if m is not None:
        request.node.user_properties.append(("criterion", m.args[0]))


@pytest.fixture
def detail(request):
    """Attach a short measurement summary to the criterion line."""
    def add(text):
        request.node.user_properties.append(("detail", text))
    return add


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        ok, notes = _outcomes[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {'; '.join(notes)}")
