"""Collector for acceptance-criterion pass/fail lines.

The acceptance tests record one line per criterion; conftest prints them in
the terminal summary so the verdicts are visible in any pytest run.
"""

LINES = []


def record(criterion: str, passed: bool, detail: str) -> None:
    line = f"[{criterion}] {'PASS' if passed else 'FAIL'} — {detail}"
    LINES.append(line)
    print(line, flush=True)
