import sys
from pathlib import Path

# make helpers/oracles importable regardless of pytest's import mode
_HERE = str(Path(__file__).parent)
if _HERE not in sys.path:
    sys.path.insert(0, _HERE)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """Print one pass/fail line per acceptance criterion after the run."""
    outcomes = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            if getattr(rep, "when", "call") != "call" and status == "passed":
                continue
            name = nodeid.split("::")[-1]
            # a failed setup/teardown still fails the criterion
            if name not in outcomes or status != "passed":
                outcomes[name] = "PASS" if status == "passed" else "FAIL"
    if not outcomes:
        return
    try:
        import test_acceptance
        labels = test_acceptance.CRITERIA
    except Exception:
        labels = {}
    terminalreporter.section("acceptance criteria")
    for name, label in labels.items():
        verdict = outcomes.get(name, "SKIP")
        terminalreporter.write_line(f"{verdict}  {label}")
    for name in outcomes:
        if name not in labels:
            terminalreporter.write_line(f"{outcomes[name]}  {name}")
