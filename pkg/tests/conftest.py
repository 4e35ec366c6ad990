from __future__ import annotations

import pytest

from tree2ring.topology import Tree, ten_node as _ten_node

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def ten_node() -> Tree:
    return _ten_node()


@pytest.fixture(scope="session")
def chain2() -> Tree:
    return Tree.from_children("P0", {"P0": ["P1"], "P1": []})


def star(k: int) -> Tree:
    return Tree.from_parents([0] * k)


def path(n: int) -> Tree:
    return Tree.from_parents(list(range(n - 1)))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
