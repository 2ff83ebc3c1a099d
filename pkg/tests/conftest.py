from __future__ import annotations

import pytest

_CRITERIA: dict[int, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or not (rep.when == "call" or rep.failed or rep.skipped):
        return
    n, title = marker.args[0], marker.args[1]
    entry = _CRITERIA.setdefault(n, {"title": title, "failed": [], "passed": [], "skipped": []})
    key = "failed" if rep.failed else ("skipped" if rep.skipped else "passed")
    entry[key].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(_CRITERIA):
        e = _CRITERIA[n]
        if e["failed"]:
            status = "FAIL"
        elif e["passed"]:
            status = "PASS"
        else:
            status = "SKIP"
        line = f"criterion {n:2d}: {status}  {e['title']}"
        if e["failed"]:
            line += "  [failing: " + ", ".join(e["failed"]) + "]"
        terminalreporter.write_line(line)
