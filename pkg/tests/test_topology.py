import itertools
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import path, star
from tree2ring.topology import (
    FAKE,
    TEN_NODE_TEXT,
    Tree,
    TreeParseError,
    TreeValidationError,
    dfs_ring_oracle,
    depth,
    enumerate_topologies,
    is_single_cycle,
    leaf_count,
    parse_tree,
    validate,
)


def _brute_force_topologies(n):
    """All parent arrays whose label order is the DFS preorder, by exhaustive search."""
    out = []
    for parents in itertools.product(*[range(i) for i in range(1, n)]):
        kids = {i: [] for i in range(n)}
        for i, p in enumerate(parents, start=1):
            kids[p].append(i)
        order, stack = [], [0]
        while stack:
            v = stack.pop()
            order.append(v)
            stack.extend(sorted(kids[v], reverse=True))
        if order == list(range(n)):
            out.append(parents)
    return out


def _preorder(tree):
    order = []

    def walk(v):
        order.append(v)
        for c in tree.children(v):
            walk(c)

    walk(tree.root)
    return order


def test_parse_ten_node(ten_node):
    assert ten_node.root == "P0"
    assert len(ten_node) == 10
    assert len(ten_node.triples) == 21
    assert ten_node.children("P3") == ("P6", "P7", "P8")
    assert ten_node.parent("P9") == "P4"
    assert validate(ten_node) == []


def test_parse_is_whitespace_insensitive():
    spaced = TEN_NODE_TEXT.replace(",", " ,\n  ").replace("(", "( ")
    assert parse_tree(spaced) == parse_tree(TEN_NODE_TEXT)
    assert parse_tree(TEN_NODE_TEXT.strip("{}")) == parse_tree(TEN_NODE_TEXT)


def test_single_node_tree():
    t = parse_tree("(fake,P0,1),(fake,fake,2),(P0,fake,1)")
    assert t.root == "P0"
    assert t.nodes == ("P0",)
    assert t.is_leaf("P0")
    assert leaf_count(t) == 1


def test_adjacency_json_matches_triples():
    doc = json.dumps({"root": "P0", "children": {"P0": ["P1"], "P1": []}})
    a = parse_tree(doc, "adjacency-json")
    b = parse_tree("(fake,P0,1),(fake,fake,2),(P0,P1,1),(P0,fake,2),(P1,fake,1)")
    assert a == b


def test_adjacency_roundtrip(ten_node):
    assert parse_tree(json.dumps(ten_node.to_adjacency()), "adjacency-json") == ten_node
    assert parse_tree(ten_node.to_text()) == ten_node


@pytest.mark.parametrize("text, line, col", [
    ("(fake,P0,1),(fake,fake,2),(P0,fake,1", 1, 37),
    ("(fake,P0,1),\n(fake,fake,2),\n(P0,fake,x)", 3, 10),
    ("(fake,P0,1) (fake,fake,2)", 1, 13),
])
def test_parse_errors_carry_position(text, line, col):
    with pytest.raises(TreeParseError) as exc:
        parse_tree(text)
    assert (exc.value.line, exc.value.column) == (line, col)


def test_gap_in_child_indices():
    t = Tree(frozenset({("fake", "P0", 1), ("fake", "fake", 2), ("P0", "P1", 1), ("P0", "P2", 3),
                        ("P0", "fake", 4), ("P1", "fake", 1), ("P2", "fake", 1)}))
    problems = validate(t)
    assert any("non-contiguous child indices for P0" in p and "(P0,P2,3)" in p for p in problems)


def test_missing_terminator():
    t = Tree(frozenset({("fake", "P0", 1), ("fake", "fake", 2), ("P0", "P1", 1), ("P0", "fake", 2)}))
    assert "missing fake terminator for P1" in validate(t)


@pytest.mark.parametrize("triples, fragment", [
    ({("fake", "P0", 1), ("fake", "fake", 2), ("P0", "fake", 1), ("P0", "P1", 2), ("P1", "fake", 1)},
     "not the last child of P0"),
    ({("fake", "P0", 1), ("fake", "fake", 2), ("P0", "P1", 1), ("P0", "fake", 2),
      ("P1", "P0", 1), ("P1", "fake", 2)}, "root P0 has a parent triple"),
    ({("fake", "P0", 1), ("fake", "fake", 2), ("P0", "fake", 1), ("P1", "P2", 1), ("P1", "fake", 2),
      ("P2", "P1", 1), ("P2", "fake", 2)}, "not reachable"),
    ({("fake", "P0", 1), ("fake", "fake", 2), ("P0", "Q1", 1), ("P0", "fake", 2), ("Q1", "fake", 1)},
     "bad process label 'Q1'"),
    ({("fake", "P0", 1), ("P0", "fake", 1)}, "root must be encoded"),
    ({("fake", "P0", 1), ("fake", "fake", 2), ("P0", "P1", 1), ("P0", "P2", 2), ("P0", "fake", 3),
      ("P1", "P3", 1), ("P1", "fake", 2), ("P2", "P3", 1), ("P2", "fake", 2), ("P3", "fake", 1)},
     "exactly one parent triple"),
])
def test_validation_violations(triples, fragment):
    problems = validate(Tree(frozenset(triples)))
    assert any(fragment in p for p in problems), problems


def test_parse_tree_raises_on_invalid():
    with pytest.raises(TreeValidationError) as exc:
        parse_tree("(fake,P0,1),(fake,fake,2),(P0,P1,1),(P0,fake,2)")
    assert "missing fake terminator for P1" in exc.value.violations


def test_fake_is_reserved():
    with pytest.raises(TreeValidationError):
        parse_tree(json.dumps({"root": "fake", "children": {}}), "adjacency-json")


@pytest.mark.parametrize("n, count", [(1, 1), (2, 1), (3, 2), (4, 5), (5, 14), (6, 42), (7, 132),
                                      (8, 429), (9, 1430), (10, 4862)])
def test_enumeration_counts(n, count):
    assert count == math.comb(2 * (n - 1), n - 1) // n
    assert sum(1 for _ in enumerate_topologies(n)) == count


@pytest.mark.parametrize("n", range(1, 8))
def test_enumeration_matches_brute_force(n):
    ours = [tuple(int(t.parent(f"P{i}")[1:]) for i in range(1, n)) for t in enumerate_topologies(n)]
    assert len(set(ours)) == len(ours)
    assert set(ours) == set(_brute_force_topologies(n))


def test_enumeration_order_is_path_first_star_last():
    trees = list(enumerate_topologies(4))
    assert trees[0] == path(4)
    assert trees[-1] == star(3)
    assert trees == list(enumerate_topologies(4))


def test_enumerate_rejects_zero():
    with pytest.raises(ValueError):
        list(enumerate_topologies(0))


@pytest.mark.parametrize("n", range(1, 7))
def test_enumerated_trees_are_valid_and_preorder_labelled(n):
    for t in enumerate_topologies(n):
        assert validate(t) == []
        assert _preorder(t) == [f"P{i}" for i in range(n)]


def test_ring_oracle_ten_node(ten_node):
    assert dfs_ring_oracle(ten_node) == {
        "P0": "P1", "P1": "P3", "P3": "P6", "P6": "P7", "P7": "P8",
        "P8": "P4", "P4": "P9", "P9": "P2", "P2": "P5", "P5": "P0",
    }


def test_ring_oracle_single_node():
    assert dfs_ring_oracle(Tree.from_parents([])) == {"P0": "P0"}


@pytest.mark.parametrize("n", range(1, 7))
def test_ring_oracle_on_enumerated_trees(n):
    for t in enumerate_topologies(n):
        ring = dfs_ring_oracle(t)
        assert ring == {f"P{i}": f"P{(i + 1) % n}" for i in range(n)}
        order = _preorder(t)
        assert ring == {v: order[(k + 1) % n] for k, v in enumerate(order)}
        assert is_single_cycle(ring, t.nodes)


def test_is_single_cycle_rejects_two_cycles():
    assert not is_single_cycle({"P0": "P1", "P1": "P0", "P2": "P3", "P3": "P2"}, ["P0", "P1", "P2", "P3"])
    assert not is_single_cycle({"P0": "P1", "P1": "P1"}, ["P0", "P1"])


@pytest.mark.parametrize("node, d", [("P0", 0), ("P6", 3), ("P5", 2), ("P9", 3), ("P2", 1)])
def test_depth(ten_node, node, d):
    assert depth(ten_node, node) == d


def test_depth_unknown_node(ten_node):
    with pytest.raises(KeyError):
        depth(ten_node, "P42")
    with pytest.raises(KeyError):
        depth(ten_node, FAKE)


def test_leaf_count(ten_node, chain2):
    assert leaf_count(ten_node) == 5
    assert leaf_count(chain2) == 1
    assert leaf_count(Tree.from_parents([])) == 1


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_random_trees_invariants(data):
    n = data.draw(st.integers(1, 25))
    parents = [data.draw(st.integers(0, i - 1)) for i in range(1, n)]
    t = Tree.from_parents(parents)
    assert validate(t) == []
    for p in t.nodes:
        for c in t.children(p):
            assert t.depth(c) == t.depth(p) + 1
    assert is_single_cycle(dfs_ring_oracle(t), t.nodes)
    assert parse_tree(t.to_text()) == t
