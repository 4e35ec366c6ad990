"""Rooted ordered trees encoded as (parent, child, index) triples.

A tree over processes ``P0..Pk`` is stored exactly as the protocol reads it:
every real node lists its children with consecutive indices starting at 1,
followed by a ``fake`` terminator, and the root hangs below ``fake``::

    (fake,P0,1),(fake,fake,2),(P0,P1,1),(P0,fake,2),(P1,fake,1)
"""

from __future__ import annotations

import json
import re
from collections import defaultdict
from dataclasses import dataclass
from functools import cached_property
from typing import Iterator, Mapping, Sequence

FAKE = "fake"

_LABEL = re.compile(r"P(0|[1-9][0-9]*)\Z")

Triple = tuple[str, str, int]


class TreeParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class TreeValidationError(ValueError):
    def __init__(self, violations: Sequence[str]):
        super().__init__("invalid tree: " + "; ".join(violations))
        self.violations = list(violations)


def proc_key(name: str) -> tuple[int, int, str]:
    """Sort key ordering ``P2`` before ``P10`` and ``fake`` last."""
    m = _LABEL.match(name)
    if m:
        return (0, int(m.group(1)), "")
    if name == FAKE:
        return (2, 0, "")
    return (1, 0, name)


def is_label(name: str) -> bool:
    return bool(_LABEL.match(name))


def _fmt(t: Triple) -> str:
    return f"({t[0]},{t[1]},{t[2]})"


@dataclass(frozen=True)
class Tree:
    """Immutable set of tree triples.

    The derived lookups tolerate malformed triple sets so that a broken tree
    can still be handed to :func:`validate`; everything else assumes the tree
    validated.
    """

    triples: frozenset[Triple]

    @classmethod
    def from_children(cls, root: str, children: Mapping[str, Sequence[str]]) -> Tree:
        triples = {(FAKE, root, 1), (FAKE, FAKE, 2)}
        nodes = {root} | {c for cs in children.values() for c in cs} | set(children)
        for p in nodes:
            cs = list(children.get(p, ()))
            for i, c in enumerate(cs, start=1):
                triples.add((p, c, i))
            triples.add((p, FAKE, len(cs) + 1))
        return cls(frozenset(triples))

    @classmethod
    def from_parents(cls, parents: Sequence[int]) -> Tree:
        """Build ``P0..Pn-1`` from ``parents[i-1]`` = parent index of node ``i``."""
        children: dict[str, list[str]] = {f"P{i}": [] for i in range(len(parents) + 1)}
        for i, par in enumerate(parents, start=1):
            children[f"P{par}"].append(f"P{i}")
        return cls.from_children("P0", children)

    @cached_property
    def _by_parent(self) -> dict[str, dict[int, str]]:
        out: dict[str, dict[int, str]] = defaultdict(dict)
        for p, c, i in self.triples:
            out[p][i] = c
        return dict(out)

    @cached_property
    def _parent_of(self) -> dict[str, tuple[str, int]]:
        return {c: (p, i) for p, c, i in self.triples if c != FAKE}

    @property
    def root(self) -> str:
        return self._by_parent.get(FAKE, {}).get(1, FAKE)

    @cached_property
    def nodes(self) -> tuple[str, ...]:
        """Real nodes in DFS preorder."""
        order: list[str] = []
        seen: set[str] = set()
        stack = [self.root] if self.root != FAKE else []
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            order.append(v)
            stack.extend(reversed(self.children(v)))
        return tuple(order)

    def child_at(self, p: str, index: int) -> str | None:
        """Child number ``index`` of ``p`` (``fake`` for the terminator), or None."""
        return self._by_parent.get(p, {}).get(index)

    def children(self, p: str) -> tuple[str, ...]:
        kids = self._by_parent.get(p, {})
        return tuple(kids[i] for i in sorted(kids) if kids[i] != FAKE)

    def parent(self, p: str) -> str:
        return self._parent_of[p][0]

    def index(self, p: str) -> int:
        return self._parent_of[p][1]

    def is_leaf(self, p: str) -> bool:
        return self.child_at(p, 1) == FAKE

    @cached_property
    def _depths(self) -> dict[str, int]:
        d = {self.root: 0}
        for v in self.nodes:
            for c in self.children(v):
                d[c] = d[v] + 1
        return d

    def depth(self, p: str) -> int:
        try:
            return self._depths[p]
        except KeyError:
            raise KeyError(f"unknown node {p!r}") from None

    def __len__(self) -> int:
        return len(self.nodes)

    def to_text(self) -> str:
        return ",".join(_fmt(t) for t in sorted(self.triples, key=_triple_key))

    def to_adjacency(self) -> dict:
        return {"root": self.root, "children": {p: list(self.children(p)) for p in self.nodes}}

    def __repr__(self) -> str:
        return f"Tree({self.to_text()})"


def _triple_key(t: Triple):
    return (0 if t[0] == FAKE else 1, proc_key(t[0]), t[2])


_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<int>-?[0-9]+)|(?P<punct>[(),{}]))")


def _tokens(text: str):
    pos = 0
    while True:
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            rest = text[pos:]
            if rest.strip():
                offset = pos + len(rest) - len(rest.lstrip())
                yield "error", text[offset], offset
            return
        start = m.end() - len(m.group(m.lastgroup))
        yield m.lastgroup, m.group(m.lastgroup), start
        pos = m.end()


def _line_col(text: str, offset: int) -> tuple[int, int]:
    line = text.count("\n", 0, offset) + 1
    col = offset - (text.rfind("\n", 0, offset) + 1) + 1
    return line, col


def _parse_triples(text: str) -> frozenset[Triple]:
    toks = list(_tokens(text))
    toks.append(("eof", "", len(text)))
    pos = 0

    def expect(kind: str, value: str | None = None):
        nonlocal pos
        k, v, off = toks[pos]
        if k != kind or (value is not None and v != value):
            want = repr(value) if value is not None else kind
            got = "end of input" if k == "eof" else repr(v)
            raise TreeParseError(f"expected {want}, got {got}", *_line_col(text, off))
        pos += 1
        return v

    braced = toks[0][:2] == ("punct", "{")
    if braced:
        pos += 1
    triples: list[Triple] = []
    while True:
        expect("punct", "(")
        parent = expect("name")
        expect("punct", ",")
        child = expect("name")
        expect("punct", ",")
        off = toks[pos][2]
        index = int(expect("int"))
        if index < 1:
            raise TreeParseError("child index must be positive", *_line_col(text, off))
        expect("punct", ")")
        triples.append((parent, child, index))
        if toks[pos][:2] == ("punct", ","):
            pos += 1
            continue
        break
    if braced:
        expect("punct", "}")
    expect("eof")
    dup = len(triples) - len(set(triples))
    if dup:
        raise TreeParseError(f"{dup} duplicated triple(s)", 1, 1)
    return frozenset(triples)


def _parse_adjacency(text: str) -> Tree:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise TreeParseError(e.msg, e.lineno, e.colno) from None
    if not isinstance(doc, dict) or not isinstance(doc.get("root"), str):
        raise TreeParseError('expected an object with a "root" string', 1, 1)
    children = doc.get("children", {})
    if not isinstance(children, dict) or not all(
        isinstance(v, list) and all(isinstance(c, str) for c in v) for v in children.values()
    ):
        raise TreeParseError('"children" must map node names to arrays of names', 1, 1)
    return Tree.from_children(doc["root"], children)


def parse_tree(text: str, format: str = "triples") -> Tree:
    """Parse and validate a tree given as triple text or adjacency JSON."""
    if format == "triples":
        tree = Tree(_parse_triples(text))
    elif format in ("adjacency-json", "json"):
        tree = _parse_adjacency(text)
    else:
        raise ValueError(f"unknown tree format {format!r}")
    problems = validate(tree)
    if problems:
        raise TreeValidationError(problems)
    return tree


def validate(tree: Tree) -> list[str]:
    """Return every encoding violation found in ``tree``; empty means valid."""
    out: list[str] = []
    by_parent: dict[str, list[Triple]] = defaultdict(list)
    parent_triples: dict[str, list[Triple]] = defaultdict(list)
    for t in sorted(tree.triples, key=_triple_key):
        p, c, i = t
        for name in (p, c):
            if name != FAKE and not is_label(name):
                out.append(f"bad process label {name!r} in {_fmt(t)}")
        if not isinstance(i, int) or isinstance(i, bool) or i < 1:
            out.append(f"child index must be a positive integer in {_fmt(t)}")
            continue
        by_parent[p].append(t)
        if c != FAKE:
            parent_triples[c].append(t)
    if out:
        return out

    top = sorted(by_parent.get(FAKE, []), key=lambda t: t[2])
    roots = [t for t in top if t[1] != FAKE]
    if [t[2] for t in roots] != [1] or [t for t in top if t[1] == FAKE] != [(FAKE, FAKE, 2)]:
        out.append("root must be encoded as (fake,<root>,1),(fake,fake,2), found "
                   + (",".join(_fmt(t) for t in top) or "nothing"))
    root = roots[0][1] if roots else None

    nodes = {p for p in by_parent if p != FAKE} | set(parent_triples)
    for p in sorted(nodes, key=proc_key):
        ts = sorted(by_parent.get(p, []), key=lambda t: t[2])
        if not ts:
            out.append(f"missing fake terminator for {p}")
            continue
        idx = [t[2] for t in ts]
        if len(set(idx)) != len(idx):
            out.append(f"duplicate child index for {p}: "
                       + ",".join(_fmt(t) for t in ts if idx.count(t[2]) > 1))
        elif idx != list(range(1, len(idx) + 1)):
            gap = next(t for k, t in enumerate(ts, start=1) if t[2] != k)
            out.append(f"non-contiguous child indices for {p}: {_fmt(gap)}")
        fakes = [t for t in ts if t[1] == FAKE]
        if not fakes:
            out.append(f"missing fake terminator for {p}")
        elif len(fakes) > 1:
            out.append(f"several fake terminators for {p}: " + ",".join(map(_fmt, fakes)))
        elif fakes[0] is not ts[-1]:
            out.append(f"fake terminator is not the last child of {p}: {_fmt(fakes[0])}")
        if p == root:
            extra = [t for t in parent_triples.get(p, []) if t[0] != FAKE]
            if extra:
                out.append(f"root {p} has a parent triple {_fmt(extra[0])}")
        else:
            ps = parent_triples.get(p, [])
            if len(ps) != 1:
                out.append(f"node {p} must have exactly one parent triple, found "
                           + (",".join(map(_fmt, ps)) or "none"))
    if out or root is None:
        return out

    reached = set(tree.nodes)
    missing = nodes - reached
    if missing:
        out.append("nodes not reachable from the root (cycle or disconnected): "
                   + ",".join(sorted(missing, key=proc_key)))
    return out


def enumerate_topologies(n: int) -> Iterator[Tree]:
    """Yield every ordered rooted tree on ``n`` nodes, labelled in preorder.

    Node ``i`` is attached to a node on the rightmost path of the tree built
    from ``P0..P(i-1)``, which is exactly what keeps labels in DFS preorder.
    Candidates are tried from the deepest one (the last node added) up to the
    root, so the first tree is the path ``P0-P1-...`` and the last one is the
    star rooted at ``P0``. There are Catalan(n-1) trees.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    parents: list[int] = []

    def extend(path: list[int]) -> Iterator[Tree]:
        i = len(parents) + 1
        if i == n:
            yield Tree.from_parents(parents)
            return
        for k in range(len(path) - 1, -1, -1):
            parents.append(path[k])
            yield from extend(path[: k + 1] + [i])
            parents.pop()

    yield from extend([0])


def dfs_ring_oracle(tree: Tree) -> dict[str, str]:
    """Successor map of the ring visiting nodes in DFS preorder."""
    order = tree.nodes
    return {v: order[(k + 1) % len(order)] for k, v in enumerate(order)}


def is_single_cycle(succ: Mapping[str, str], nodes) -> bool:
    nodes = set(nodes)
    if set(succ) != nodes or set(succ.values()) != nodes:
        return False
    if not nodes:
        return True
    start = next(iter(nodes))
    v, steps = succ[start], 1
    while v != start:
        v = succ[v]
        steps += 1
        if steps > len(nodes):
            return False
    return steps == len(nodes)


def depth(tree: Tree, p: str) -> int:
    return tree.depth(p)


def leaf_count(tree: Tree) -> int:
    return sum(1 for p in tree.nodes if tree.is_leaf(p))


TEN_NODE_TEXT = (
    "{(fake,P0,1),(fake,fake,2),(P0,P1,1),(P0,P2,2),(P0,fake,3),"
    "(P1,P3,1),(P1,P4,2),(P1,fake,3),(P2,P5,1),(P2,fake,2),(P3,P6,1),"
    "(P3,P7,2),(P3,P8,3),(P3,fake,4),(P4,P9,1),(P4,fake,2),(P5,fake,1),"
    "(P6,fake,1),(P7,fake,1),(P8,fake,1),(P9,fake,1)}"
)


def ten_node() -> Tree:
    """The ten-process example tree used throughout the tests and docs."""
    return parse_tree(TEN_NODE_TEXT)
