"""Collects acceptance-criterion outcomes and prints one line per criterion at the end of the run."""

from collections import defaultdict

import pytest

_RESULTS: dict[int, list[tuple[str, bool, str]]] = defaultdict(list)


class CriterionRecorder:
    def __init__(self, number: int):
        self.number = number

    def __call__(self, part: str, ok: bool, detail: str = "") -> bool:
        _RESULTS[self.number].append((part, bool(ok), detail))
        return bool(ok)


@pytest.fixture
def criterion(request):
    marker = request.node.get_closest_marker("criterion")
    if marker is None:
        raise RuntimeError("acceptance tests need @pytest.mark.criterion(n)")
    return CriterionRecorder(marker.args[0])


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(_RESULTS):
        parts = _RESULTS[n]
        verdict = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        detail = "; ".join(f"{name}: {'ok' if ok else 'FAIL'}{(' (' + d + ')') if d else ''}"
                           for name, ok, d in parts)
        tr.write_line(f"criterion {n}: {verdict} -- {detail}")
