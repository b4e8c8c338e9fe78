"""Collects acceptance-criterion outcomes and prints one line per criterion."""

import pytest

_RESULTS: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion this test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    m = item.get_closest_marker("criterion")
    if m is None or call.when not in ("setup", "call"):
        return
    rep = outcome.get_result()
    n, title = m.args
    r = _RESULTS.setdefault(n, {"title": title, "passed": 0, "failed": 0, "skipped": 0, "seconds": 0.0})
    if call.when == "call":
        r["seconds"] += rep.duration
    if rep.skipped:
        r["skipped"] += 1
    elif rep.failed:
        r["failed"] += 1
    elif call.when == "call":
        r["passed"] += 1


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        r = _RESULTS[n]
        status = "FAIL" if r["failed"] else ("PASS" if r["passed"] else "SKIP")
        note = f", {r['skipped']} skipped" if r["skipped"] else ""
        terminalreporter.write_line(
            f"criterion {n}: {status}  {r['title']}  ({r['passed']} passed{note}, {r['seconds']:.1f} s)"
        )
