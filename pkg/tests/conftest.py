import sys


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.TITLES):
        if n in mod.RESULTS:
            ok, detail = mod.RESULTS[n]
            line = f"criterion {n:>2} [{'PASS' if ok else 'FAIL'}] {mod.TITLES[n]}"
            terminalreporter.write_line(f"{line}: {detail}" if detail else line)
        else:
            terminalreporter.write_line(f"criterion {n:>2} [NOT RUN] {mod.TITLES[n]}")
