import sys

import pytest

from belinkit.corpus import NewsRecord


@pytest.fixture
def record():
    return NewsRecord(
        article="মসজিদে আজ সভা হয়েছে।",
        headline="মসজিদে সভা",
        category="Islam",
        aspect="Report",
        sentiment="Positive",
    )


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
