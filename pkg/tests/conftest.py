from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

# acceptance tests append (label, ok, detail) here; printed at the end of the run
ACCEPTANCE_LINES: list = []
# free-form report lines (e.g. the range-code adjudication), printed after them
ACCEPTANCE_NOTES: list = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
    for line in ACCEPTANCE_NOTES:
        terminalreporter.write_line(line)
