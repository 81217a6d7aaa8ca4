import numpy as np
import pytest

from hybrid_dof.cxmat import Rng

_CRITERIA = {}
_NOTES = []


def note(number, text):
    """Attach a measured value to a criterion's summary line."""
    _NOTES.append((number, text))


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(number, text): acceptance criterion test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker('criterion')
    if marker is None or report.when not in ('setup', 'call'):
        return
    number, text = marker.args
    key = (number, text)
    ok = report.passed
    if report.when == 'setup' and ok:
        return
    prev = _CRITERIA.get(key, True)
    _CRITERIA[key] = prev and ok


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    grouped = {}
    for (number, text), ok in _CRITERIA.items():
        grouped.setdefault(number, []).append((text, ok))
    terminalreporter.section('acceptance criteria')
    for number in sorted(grouped):
        parts = grouped[number]
        verdict = 'PASS' if all(ok for _, ok in parts) else 'FAIL'
        detail = '; '.join(text if ok else f'{text} [FAILED]'
                           for text, ok in parts)
        terminalreporter.write_line(f"criterion {number}: {verdict}  {detail}")
        for n, text in _NOTES:
            if n == number:
                terminalreporter.write_line(f"    {text}")


@pytest.fixture
def rng():
    return Rng(12345)


@pytest.fixture
def np_rng():
    return np.random.default_rng(2024)


def crandn(gen, rows, cols):
    return (gen.standard_normal((rows, cols))
            + 1j * gen.standard_normal((rows, cols))) / np.sqrt(2)
