"""Collects the acceptance verdicts and prints one line per criterion after the run."""

ACCEPTANCE = {}


def record(number: int, title: str, ok: bool, detail: str) -> None:
    ACCEPTANCE[number] = (title, bool(ok), detail)
    print(f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(
            f"criterion {number} [{'PASS' if ok else 'FAIL'}] {title}: {detail}")
