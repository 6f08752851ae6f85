import pytest

ACCEPTANCE_LINES: list[str] = []


class ScriptedRng:
    """Stand-in for ``numpy.random.Generator`` that replays fixed draws."""

    def __init__(self, integers=(), randoms=()):
        self._ints = list(integers)
        self._rands = list(randoms)

    def integers(self, low, high=None, size=None):
        if size is None:
            return self._ints.pop(0)
        return [self._ints.pop(0) for _ in range(size)]

    def random(self, size=None):
        if size is None:
            return self._rands.pop(0)
        return [self._rands.pop(0) for _ in range(size)]


@pytest.fixture
def scripted_rng():
    return ScriptedRng


@pytest.fixture
def acceptance():
    """Record one pass/fail line per criterion; printed in the terminal summary."""

    def record(criterion: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}")
        print(ACCEPTANCE_LINES[-1])
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
