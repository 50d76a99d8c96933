import time

import pytest

CRITERIA = {
    1: "exact steady states (lind1101, lindsphsx h=1)",
    2: "two-level verdict table, both Davies routes agreeing",
    3: "two-site ferromagnet counter-example",
    4: "classical Markov chains of channels",
    5: "loss/gain spectrum and Frigerio-2",
    6: "spin chains N=3 and N=4 irreducible",
    7: "cross-oracle suite, 500 random systems",
    8: "Kraus round trip, 100 random systems",
    9: "Evans theorem, both directions",
    10: "dark states",
}

_results: dict[int, list[tuple[str, str, float]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _results.setdefault(marker.args[0], []).append((item.name, rep.outcome, rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        runs = _results.get(n)
        if not runs:
            continue
        ok = all(outcome == "passed" for _, outcome, _ in runs)
        secs = sum(d for _, _, d in runs)
        terminalreporter.write_line(
            f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  ({secs:.3f} s)  {CRITERIA[n]}")


@pytest.fixture
def stopwatch():
    """Context-free timer: ``with stopwatch(limit): ...`` asserts the wall time."""
    class _Watch:
        def __init__(self, limit):
            self.limit = limit

        def __enter__(self):
            self.t0 = time.perf_counter()
            return self

        def __exit__(self, *exc):
            self.elapsed = time.perf_counter() - self.t0
            if exc[0] is None:
                assert self.elapsed < self.limit, f"took {self.elapsed:.2f} s, limit {self.limit} s"
    return _Watch
