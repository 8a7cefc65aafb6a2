import os
import re
import sys

from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.register_profile(
    "thorough", max_examples=500, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_AC = re.compile(r"test_ac(\d+)_(\w+)")
_results: dict = {}


def pytest_runtest_logreport(report):
    m = _AC.search(report.nodeid)
    if not m or "test_acceptance.py" not in report.nodeid:
        return
    n = int(m.group(1))
    if report.when == "call" or report.outcome != "passed":
        prev = _results.get(n, (True, m.group(2)))
        _results[n] = (prev[0] and report.outcome == "passed", prev[1])


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        ok, name = _results[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] AC{n} {name.replace('_', ' ')}")
