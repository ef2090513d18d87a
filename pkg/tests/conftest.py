import numpy as np
import pytest

from sepnode.graph import Graph, Partition


def random_graph(rng, n, p):
    edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
    return Graph.from_edges(n, edges)


def planted_graph(rng, n, k, p_in=0.8, p_out=0.15):
    labels = [int(c) for c in rng.integers(0, k, size=n)]
    part = Partition.from_labels(labels)
    edges = [
        (u, v)
        for u in range(n)
        for v in range(u + 1, n)
        if rng.random() < (p_in if part[u] == part[v] else p_out)
    ]
    return Graph.from_edges(n, edges), part


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def triangle():
    return Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])


@pytest.fixture
def two_triangles():
    g = Graph.from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])
    return g, Partition((0, 0, 0, 1, 1, 1))


# -- acceptance reporting -----------------------------------------------------

_criteria: dict[int, dict] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    number, title = marker.args
    entry = _criteria.setdefault(number, {"title": title, "ok": True, "notes": [], "seconds": 0.0})
    entry["ok"] &= rep.passed
    entry["seconds"] += rep.duration
    notes = [v for k, v in item.user_properties if k == "detail"]
    if rep.failed:
        msg = str(rep.longrepr.reprcrash.message) if hasattr(rep.longrepr, "reprcrash") else "failed"
        notes.append(msg.splitlines()[0][:160])
    entry["notes"].extend(notes)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        e = _criteria[number]
        status = "PASS" if e["ok"] else "FAIL"
        detail = "; ".join(e["notes"])
        terminalreporter.write_line(
            f"criterion {number:>2} {status}  {e['title']} ({e['seconds']:.1f}s){'  ' + detail if detail else ''}"
        )
