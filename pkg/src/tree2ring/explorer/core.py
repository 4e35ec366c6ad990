from __future__ import annotations

import hashlib
import time
from collections import Counter, deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from ..protocol import Configuration, Event, Variant, initial_config, successors
from ..topology import Tree
from ..verify import (
    check_invariant_A,
    check_invariant_B,
    check_terminal,
    check_weight_decrease,
    weight,
)
from . import kernels
from .unfold import NotSafeError, unfold

CHECKS = ("A", "B", "weight", "terminal")
MAX_RECORDED_VIOLATIONS = 100
DOT_STATE_LIMIT = 10_000


def tree_digest(tree: Tree) -> str:
    return hashlib.sha256(tree.to_text().encode()).hexdigest()[:16]


def state_key(config: Configuration) -> bytes:
    return config.key()


def applicable_checks(variant: Variant | str, seeded: bool = False) -> set[str]:
    variant = Variant(variant)
    out = {"weight", "terminal"}
    if variant in (Variant.SIMPLIFIED, Variant.SUCC):
        out.add("A")
    if variant is Variant.SIMPLIFIED or (variant is Variant.ORIGINAL and not seeded):
        out.add("B")
    return out


def resolve_checks(checks: Iterable[str], variant: Variant | str, seeded: bool = False) -> set[str]:
    """Expand ``all`` and reject names that do not apply to ``variant``."""
    checks = set(checks)
    if "all" in checks:
        checks = (checks - {"all"}) | applicable_checks(variant, seeded)
    unknown = checks - set(CHECKS)
    if unknown:
        raise ValueError(f"unknown check(s): {', '.join(sorted(unknown))}")
    bad = checks - applicable_checks(variant, seeded)
    if bad:
        raise ValueError(f"check(s) {', '.join(sorted(bad))} do not apply to variant {Variant(variant)}")
    return checks


@dataclass
class Violation:
    state_digest: str
    check: str
    detail: str
    trace: list[Event] = field(default_factory=list)

    def to_json(self) -> dict:
        return {"check": self.check, "state_digest": self.state_digest, "detail": self.detail,
                "trace": [e.to_json() for e in self.trace]}


@dataclass
class ExplorationReport:
    tree_digest: str
    variant: Variant
    states: int
    arcs: int
    terminals: list[Configuration]
    max_frontier: int
    elapsed: float
    violations: list[Violation] = field(default_factory=list)
    violation_count: int = 0
    complete: bool = True
    engine: str = "reference"
    reduced: bool = False
    edges: list[tuple[int, int, Event]] | None = None
    configs: list[Configuration] | None = None

    @property
    def bound_exceeded(self) -> bool:
        return not self.complete

    def to_json(self, include_terminals: bool = True) -> dict:
        doc = {
            "tree_digest": self.tree_digest,
            "variant": str(self.variant),
            "engine": self.engine,
            "reduced": self.reduced,
            "complete": self.complete,
            "states": self.states,
            "arcs": self.arcs,
            "terminal_count": len(self.terminals),
            "max_frontier": self.max_frontier,
            "elapsed_seconds": round(self.elapsed, 6),
            "violation_count": self.violation_count,
            "violations": [v.to_json() for v in self.violations],
        }
        if include_terminals:
            doc["terminals"] = [c.to_json() for c in self.terminals]
        return doc


def _sorted_terminals(configs: Iterable[Configuration]) -> list[Configuration]:
    return sorted(configs, key=lambda c: c.key())


def explore(tree: Tree, variant: Variant | str, checks: Iterable[str] = (), bound: int | None = None,
            *, seed_state: tuple[Mapping[str, str], Mapping[str, str]] | None = None,
            engine: str = "auto", frontier: str = "bfs", keep_graph: bool = False) -> ExplorationReport:
    """Visit every configuration reachable from the initial one.

    ``engine`` is ``reference`` (configuration objects, runs state and arc
    checks, keeps counterexample traces), ``packed`` (bit-vector kernel,
    terminal checks only) or ``auto``, which picks ``packed`` unless per-state
    checks, depth-first order or the graph itself are requested. ``bound``
    caps the number of stored states; hitting it yields a partial report with
    ``complete=False``.
    """
    variant = Variant(variant)
    checks = resolve_checks(checks, variant, seed_state is not None)
    if engine == "auto":
        heavy = checks & {"A", "B", "weight"}
        engine = "reference" if heavy or frontier != "bfs" or keep_graph else "packed"
    if engine == "packed":
        if checks & {"A", "B", "weight"} or frontier != "bfs" or keep_graph:
            raise ValueError("the packed engine only supports breadth-first search with terminal checks")
        try:
            return _explore_packed(tree, variant, checks, bound, seed_state)
        except NotSafeError:
            engine = "reference"
    if engine != "reference":
        raise ValueError(f"unknown engine {engine!r}")
    return _explore_reference(tree, variant, checks, bound, seed_state, frontier, keep_graph)


def _terminal_violations(tree, variant, terminals, report: ExplorationReport, trace_of=None):
    for i, cfg in enumerate(terminals):
        rr = check_terminal(cfg, tree, variant)
        if not rr.all_ok:
            report.violation_count += 1
            if len(report.violations) < MAX_RECORDED_VIOLATIONS:
                tr = trace_of(cfg) if trace_of else []
                report.violations.append(Violation(cfg.digest(), "terminal", "; ".join(rr.details), tr))


def _explore_packed(tree, variant, checks, bound, seed_state) -> ExplorationReport:
    t0 = time.perf_counter()
    net = unfold(tree, variant, seed_state)
    init = net.encode(net.initial)
    pre, post = net.masks()
    res = kernels.bfs(init, pre, post, bound)
    if res.status == kernels.NOT_SAFE:
        raise NotSafeError("a firing would duplicate a token")
    terminals = _sorted_terminals(net.decode(row) for row in res.states[res.terminal])
    report = ExplorationReport(
        tree_digest=tree_digest(tree),
        variant=variant,
        states=int(len(res.states)),
        arcs=res.arcs,
        terminals=terminals,
        max_frontier=res.max_frontier,
        elapsed=0.0,
        complete=res.status == kernels.OK,
        engine="packed-numba" if kernels.USE_NUMBA else "packed-numpy",
    )
    if "terminal" in checks:
        _terminal_violations(tree, variant, terminals, report)
    report.elapsed = time.perf_counter() - t0
    return report


def _explore_reference(tree, variant, checks, bound, seed_state, frontier, keep_graph) -> ExplorationReport:
    t0 = time.perf_counter()
    init = initial_config(tree, variant, seed_state)
    ids = {init: 0}
    configs = [init]
    parent = [-1]
    via: list[Event | None] = [None]
    depth = [0]
    width: Counter = Counter({0: 1})
    edges: list[tuple[int, int, Event]] | None = [] if keep_graph else None
    terminals: list[int] = []
    report = ExplorationReport(tree_digest(tree), variant, 0, 0, [], 0, 0.0, engine="reference")

    def trace_to(i: int) -> list[Event]:
        path = []
        while parent[i] >= 0:
            path.append(via[i])
            i = parent[i]
        return path[::-1]

    def record(i: int, check: str, detail: str):
        report.violation_count += 1
        if len(report.violations) < MAX_RECORDED_VIOLATIONS:
            report.violations.append(Violation(configs[i].digest(), check, detail, trace_to(i)))

    def check_state(i: int):
        cfg = configs[i]
        if "A" in checks:
            v = check_invariant_A(cfg, tree, variant)
            if not v:
                record(i, "A", v.detail)
        if "B" in checks:
            v = check_invariant_B(cfg, tree, variant)
            if not v:
                record(i, "B", v.detail)

    check_state(0)
    todo = deque([0])
    max_stack = 1
    arcs = 0
    truncated = False
    while todo and not truncated:
        i = todo.popleft() if frontier == "bfs" else todo.pop()
        cfg = configs[i]
        succ = list(successors(cfg, tree, variant))
        if not succ:
            terminals.append(i)
        if "weight" in checks and len(tree) > 1:
            w = weight(cfg, tree, variant).total
            if (w == 0) != (not succ):
                record(i, "weight", f"weight {w} with {len(succ)} enabled events")
        for ev, nxt in succ:
            arcs += 1
            if "weight" in checks:
                v = check_weight_decrease(cfg, ev, nxt, tree, variant)
                if not v:
                    record(i, "weight", v.detail)
            j = ids.get(nxt)
            if j is None:
                if bound is not None and len(configs) >= bound:
                    truncated = True
                    break
                j = len(configs)
                ids[nxt] = j
                configs.append(nxt)
                parent.append(i)
                via.append(ev)
                depth.append(depth[i] + 1)
                width[depth[j]] += 1
                todo.append(j)
                check_state(j)
            if edges is not None:
                edges.append((i, j, ev))
        max_stack = max(max_stack, len(todo))

    report.states = len(configs)
    report.arcs = arcs
    report.complete = not truncated
    report.terminals = _sorted_terminals(configs[i] for i in terminals)
    report.max_frontier = max(width.values()) if frontier == "bfs" else max_stack
    if "terminal" in checks:
        term_ids = {configs[i]: i for i in terminals}
        _terminal_violations(tree, variant, report.terminals, report, lambda c: trace_to(term_ids[c]))
    if keep_graph:
        report.edges = edges
        report.configs = configs
    report.elapsed = time.perf_counter() - t0
    return report


def reachability_dot(tree: Tree, variant: Variant | str, **kwargs) -> str:
    """DOT text of the full reachability graph; refuses graphs above 10,000 states."""
    rep = explore(tree, variant, bound=DOT_STATE_LIMIT, engine="reference", keep_graph=True, **kwargs)
    if not rep.complete:
        raise ValueError(f"reachability graph has more than {DOT_STATE_LIMIT} states")
    term = {c for c in rep.terminals}
    lines = ["digraph reachability {", "  node [shape=point];"]
    for i, cfg in enumerate(rep.configs):
        attrs = 'shape=doublecircle, label="", color=forestgreen' if cfg in term else ""
        if i == 0:
            attrs = 'shape=circle, label="init"'
        if attrs:
            lines.append(f"  s{i} [{attrs}];")
    for i, j, ev in rep.edges:
        lines.append(f'  s{i} -> s{j} [label="{ev.rule}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
