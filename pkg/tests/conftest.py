from __future__ import annotations

import pytest

from ne_forge import Digraph, Game


def g1_graph() -> Digraph:
    # u=0, v=1, a_1=2, a_2=3
    return Digraph.from_edges([(0, 1), (0, 2), (1, 0), (1, 3)])


def make_g1() -> Game:
    return Game.build(g1_graph(), {0: 1, 1: 2}, [["a:2", "a:1", "c"], ["a:1", "a:2", "c"]])


@pytest.fixture
def g1() -> Game:
    return make_g1()


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
