import re

import pytest

from guide import default_registry

_ACCEPTANCE = []


@pytest.fixture(scope="session")
def registry():
    return default_registry()


@pytest.fixture(scope="session")
def profiled(registry):
    return registry.profiled()


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        measured = dict(report.user_properties).get("measured", "")
        _ACCEPTANCE.append((report.nodeid.split("::")[-1], report.outcome, measured))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    groups: dict[str, list] = {}
    for name, outcome, measured in _ACCEPTANCE:
        m = re.match(r"test_ac(\d+)", name)
        groups.setdefault(f"AC{m.group(1)}" if m else name, []).append((name, outcome, measured))
    for crit, items in groups.items():
        ok = sum(1 for _, o, _ in items if o == "passed")
        verdict = "PASS" if ok == len(items) else "FAIL"
        terminalreporter.write_line(f"{verdict}  {crit}  ({ok}/{len(items)} checks)")
        for name, outcome, measured in items:
            mark = "ok  " if outcome == "passed" else "FAIL"
            suffix = f"  [{measured}]" if measured else ""
            terminalreporter.write_line(f"        {mark} {name}{suffix}")
