import time

SUITE_BUDGET = 120.0
# criterion number -> (passed, detail), filled by test_acceptance
ACCEPTANCE: dict = {}
_start = [0.0]


def pytest_sessionstart(session):
    _start[0] = time.perf_counter()


def _elapsed() -> float:
    return time.perf_counter() - _start[0]


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    total = _elapsed()
    tr.write_line(f"suite runtime: {total:.1f} s (budget {SUITE_BUDGET:.0f} s) {'PASS' if total < SUITE_BUDGET else 'FAIL'}")


def pytest_sessionfinish(session, exitstatus):
    if ACCEPTANCE and _elapsed() >= SUITE_BUDGET and exitstatus == 0:
        session.exitstatus = 1
