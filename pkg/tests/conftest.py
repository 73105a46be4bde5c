import re
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))

CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_")


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: one of the ten acceptance criteria")


def pytest_terminal_summary(terminalreporter):
    outcomes: dict[int, bool] = {}
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            m = CRITERION.search(getattr(rep, "nodeid", ""))
            if m is None or (key == "passed" and rep.when != "call"):
                continue
            c = int(m.group(1))
            outcomes[c] = outcomes.get(c, True) and key == "passed"
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(outcomes):
        terminalreporter.write_line(f"criterion {c:2d}: {'PASS' if outcomes[c] else 'FAIL'}")
