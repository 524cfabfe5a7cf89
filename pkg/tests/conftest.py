import pytest

from toricvol import _backend, _core_py

_CRITERIA = []


@pytest.fixture(params=["compiled", "python"])
def backend(request, monkeypatch):
    """Run a test against each kernel backend."""
    if request.param == "compiled":
        try:
            from toricvol import _core as impl
        except ImportError:
            pytest.skip("compiled kernel not built")
    else:
        impl = _core_py
    monkeypatch.setattr(_backend, "divdiff", impl.divdiff)
    monkeypatch.setattr(_backend, "simplex_moments", impl.simplex_moments)
    return request.param


@pytest.fixture
def criterion():
    """Record an acceptance criterion outcome for the terminal summary."""

    def record(number, title, ok, detail=""):
        _CRITERIA.append((number, title, bool(ok), detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, title, ok, detail in sorted(_CRITERIA, key=lambda c: c[0]):
        terminalreporter.write_line(
            "criterion %d %-38s %s  %s" % (number, title, "PASS" if ok else "FAIL", detail)
        )
