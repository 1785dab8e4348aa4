import numpy as np
import pytest

from hopdiff.graph import Graph


def random_graph(n: int, p: float, seed: int) -> Graph:
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((n, n)) < p, k=1)
    src, dst = np.nonzero(upper)
    return Graph.from_edges(src, dst, n)


def floyd_warshall(graph: Graph) -> np.ndarray:
    n = graph.num_nodes
    d = np.full((n, n), np.inf)
    np.fill_diagonal(d, 0.0)
    for u, v in graph.edge_array():
        d[u, v] = d[v, u] = 1.0
    for m in range(n):
        d = np.minimum(d, d[:, m, None] + d[None, m, :])
    return d


@pytest.fixture
def tree4():
    """Edges (v,a), (v,b), (a,c) with v=0, a=1, b=2, c=3."""
    return Graph.from_edges([0, 0, 1], [1, 2, 3], 4)


_ACCEPTANCE: list[tuple[str, str, str]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None or rep.when != "call" and not (rep.when == "setup" and rep.failed):
        return
    detail = "; ".join(f"{k}={v}" for k, v in item.user_properties)
    if rep.failed:
        msg = str(rep.longrepr.reprcrash.message) if hasattr(rep.longrepr, "reprcrash") else str(rep.longrepr)
        detail = (detail + "; " if detail else "") + msg.splitlines()[0][:200]
    status = "PASS" if rep.passed else "FAIL"
    _ACCEPTANCE.append((status, marker.args[0], detail))
    tr = item.config.pluginmanager.get_plugin("terminalreporter")
    if tr is not None:
        tr.write_line(f"\n[{status}] {marker.args[0]}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for status, name, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{status}  {name}: {detail}")
