import pytest

_ACCEPTANCE: dict[str, str] = {}


@pytest.fixture
def acceptance(request):
    """Record one pass/fail line for an acceptance criterion."""
    name = request.node.name
    _ACCEPTANCE[name] = "FAIL"
    notes = []
    yield notes.append
    if request.node.rep_call.passed:
        _ACCEPTANCE[name] = "PASS"
    if notes:
        _ACCEPTANCE[name] += "  " + "; ".join(notes)


@pytest.hookimpl(wrapper=True, tryfirst=True)
def pytest_runtest_makereport(item, call):
    rep = yield
    setattr(item, f"rep_{rep.when}", rep)
    return rep


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, line in _ACCEPTANCE.items():
        terminalreporter.write_line(f"{name}: {line}")
