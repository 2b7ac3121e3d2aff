from collections import deque
from fractions import Fraction
from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

from qstree.csst import build_jn

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


@lru_cache(maxsize=None)
def jn(n):
    return build_jn(n)


@pytest.fixture
def jn_model():
    return jn


def bfs_distances(tree, source):
    """Independent oracle: path lengths from ``source`` by breadth-first search over the edge list."""
    adj = {v: [] for v in tree.ids}
    for e in tree.edges:
        adj[e.u].append((e.v, e.length))
        adj[e.v].append((e.u, e.length))
    dist = {source: Fraction(0)}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for v, ln in adj[u]:
            if v not in dist:
                dist[v] = dist[u] + ln
                queue.append(v)
    return dist


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
