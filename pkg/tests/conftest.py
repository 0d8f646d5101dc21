"""Shared fixtures plus the acceptance-criteria reporting hook.

Tests marked ``acceptance(criterion=..., title=...)`` get one PASS/FAIL line
each in the terminal summary so a reviewer can read the acceptance status
without digging through pytest output.
"""

import pytest

_RESULTS = {}


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance(criterion, title): marks a test as one acceptance criterion",
    )


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    marker = _marker_from_keywords(report)
    if marker is None:
        return
    criterion, title = marker
    if hasattr(report, "wasxfail"):
        outcome = "FAIL (expected, documented defect)" if report.skipped else "UNEXPECTED PASS"
    else:
        outcome = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIPPED"}[report.outcome]
    _RESULTS.setdefault((criterion, title), []).append(outcome)


def _marker_from_keywords(report):
    # the registry keeps this hook independent of live item objects
    name = report.nodeid.split("::")[-1].split("[")[0]
    return _REGISTRY.get(name)


_REGISTRY = {}


def register_acceptance(criterion, title):
    """Decorator: tag a test function as (part of) one acceptance criterion."""

    def deco(fn):
        _REGISTRY[fn.__name__] = (criterion, title)
        return fn

    return deco


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for (criterion, title), outcomes in sorted(_RESULTS.items()):
        for level in ("FAIL", "UNEXPECTED PASS", "SKIPPED",
                      "FAIL (expected, documented defect)", "PASS"):
            if any(o == level for o in outcomes):
                worst = level
                break
        terminalreporter.write_line(f"criterion {criterion}: {worst} - {title}")
