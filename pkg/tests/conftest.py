import contextlib
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

_RESULTS = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_RESULTS] = {}


class _Record:
    def __init__(self):
        self.detail = ""


@pytest.fixture
def criterion(request):
    """Context manager recording pass/fail of one acceptance criterion."""
    results = request.config.stash[_RESULTS]

    @contextlib.contextmanager
    def run(number, title):
        rec = _Record()
        try:
            yield rec
        except BaseException as exc:
            results[number] = ("FAIL", title, rec.detail or f"{type(exc).__name__}: {exc}")
            raise
        results[number] = ("PASS", title, rec.detail)

    return run


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_RESULTS, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        status, title, detail = results[number]
        line = f"criterion {number:2d} {status}  {title}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
