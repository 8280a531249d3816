import pytest

from registry import ACCEPTANCE


@pytest.hookimpl(trylast=True)
def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        claims = ACCEPTANCE[n]
        ok = all(p for _, p, _ in claims)
        failed = [c for c, p, _ in claims if not p]
        tail = "" if ok else f" (failing: {'; '.join(failed)})"
        tr.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}{tail}")
        for claim, p, detail in claims:
            tr.write_line(f"    [{'pass' if p else 'FAIL'}] {claim}: {detail}")
