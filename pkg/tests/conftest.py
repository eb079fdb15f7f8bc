"""Collects acceptance sub-check outcomes and prints one line per criterion."""

from collections import defaultdict

ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = defaultdict(list)
TITLES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[n]
        status = "PASS" if all(ok for _, ok, _ in checks) else "FAIL"
        tr.write_line(f"{status}  criterion {n}: {TITLES.get(n, '')}")
        for name, ok, detail in checks:
            tr.write_line(f"        [{'ok' if ok else 'FAILED'}] {name}: {detail}")
