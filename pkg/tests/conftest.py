import pytest

ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture
def record(request):
    """Log one acceptance check; returns ``ok`` so the test can assert on it."""
    log = request.config.stash[ACCEPTANCE_KEY]

    def _record(criterion: int, label: str, ok: bool, detail: str = "", known: bool = False):
        log.append((criterion, label, bool(ok), detail, known))
        tag = "PASS" if ok else "FAIL"
        print(f"[{tag}] C{criterion} {label}: {detail}")
        return ok

    return _record


def pytest_terminal_summary(terminalreporter, config):
    log = config.stash.get(ACCEPTANCE_KEY, [])
    if not log:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for c in sorted({entry[0] for entry in log}):
        checks = [e for e in log if e[0] == c]
        passed = sum(e[2] for e in checks)
        verdict = "PASS" if passed == len(checks) else "FAIL"
        tr.write_line(f"criterion {c}: {verdict} ({passed}/{len(checks)} checks)")
        for _, label, ok, detail, known in checks:
            note = " [known, see decisions ledger]" if known and not ok else ""
            tr.write_line(f"    {'pass' if ok else 'FAIL'}  {label}: {detail}{note}")
