import random

import numpy as np
import pytest

from richardson.graph import Graph, GraphBuilder


def random_graph(rng: random.Random, n_max: int = 12, p: float = 0.35, connected: bool = False) -> Graph:
    n = rng.randint(2, n_max)
    b = GraphBuilder()
    for _ in range(n):
        b.add_vertex()
    pairs = set()
    if connected:
        for v in range(1, n):
            u = rng.randrange(v)
            pairs.add((u, v))
    for u in range(n):
        for v in range(u + 1, n):
            if rng.random() < p:
                pairs.add((u, v))
    for u, v in sorted(pairs, key=lambda _: rng.random()):
        b.add_edge(u, v)
    return b.freeze()


def path_graph(n: int) -> Graph:
    b = GraphBuilder()
    v0 = b.add_vertex()
    if n > 1:
        b.add_path(v0, n - 1)
    return b.freeze()


@pytest.fixture
def rng():
    return random.Random(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "CRITERIA_LOG", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
