"""Terminal-state preserving partial-order reduction with stubborn sets.

Stubborn sets are computed on the unfolded place/transition net. Starting
from one enabled transition, the set is closed under two rules:

* an enabled member drags in every transition that consumes one of its
  input tokens (anything that could disable it);
* a disabled member picks its first missing input token and drags in every
  transition producing that token (anything that could enable it).

Firing only the enabled members of such a set preserves every terminal
state. Each enabled transition is tried as a seed and the closure with the
fewest enabled members wins (ties go to the lowest transition index).
"""

from __future__ import annotations

import time
from collections import Counter, deque
from typing import Mapping

from ..protocol import Configuration, Variant, apply_effects
from ..topology import Tree
from .core import ExplorationReport, _sorted_terminals, tree_digest
from .unfold import PackedNet, unfold


def _closure(net: PackedNet, seed: int, marking: Counter, enabled: set[int],
             consumers, producers) -> set[int]:
    members = {seed}
    work = [seed]
    while work:
        t = work.pop()
        if t in enabled:
            drag = (u for b in net.pre[t] for u in consumers[b])
        else:
            missing = next(b for b in net.pre[t] if marking[b] == 0)
            drag = iter(producers[missing])
        for u in drag:
            if u not in members:
                members.add(u)
                work.append(u)
    return members


def stubborn_set(net: PackedNet, marking: Counter, consumers=None, producers=None) -> list[int]:
    """Enabled transitions to fire in ``marking`` (token index -> count)."""
    consumers = consumers if consumers is not None else net.consumers()
    producers = producers if producers is not None else net.producers()
    enabled = {t for t, bits in enumerate(net.pre) if all(marking[b] > 0 for b in bits)}
    best: list[int] | None = None
    for seed in sorted(enabled):
        fire = sorted(_closure(net, seed, marking, enabled, consumers, producers) & enabled)
        if best is None or len(fire) < len(best):
            best = fire
            if len(best) == 1:
                break
    return best or []


def explore_reduced(tree: Tree, variant: Variant | str, bound: int | None = None, *,
                    seed_state: tuple[Mapping[str, str], Mapping[str, str]] | None = None) -> ExplorationReport:
    variant = Variant(variant)
    t0 = time.perf_counter()
    net = unfold(tree, variant, seed_state)
    consumers, producers = net.consumers(), net.producers()
    pre_tok = [[net.tokens[b] for b in bits] for bits in net.pre]
    post_tok = [[net.tokens[b] for b in bits] for bits in net.post]

    def marking_of(cfg: Configuration) -> Counter:
        return Counter({net.index[t]: c for t, c in cfg.tokens().items()})

    init = net.initial
    seen = {init: 0}
    depth = {init: 0}
    width: Counter = Counter({0: 1})
    todo = deque([init])
    terminals = []
    arcs = 0
    complete = True
    while todo and complete:
        cfg = todo.popleft()
        chosen = stubborn_set(net, marking_of(cfg), consumers, producers)
        if not chosen:
            terminals.append(cfg)
        for t in chosen:
            arcs += 1
            nxt = apply_effects(cfg, pre_tok[t], post_tok[t])
            if nxt in seen:
                continue
            if bound is not None and len(seen) >= bound:
                complete = False
                break
            seen[nxt] = len(seen)
            depth[nxt] = depth[cfg] + 1
            width[depth[nxt]] += 1
            todo.append(nxt)
    return ExplorationReport(
        tree_digest=tree_digest(tree),
        variant=variant,
        states=len(seen),
        arcs=arcs,
        terminals=_sorted_terminals(terminals),
        max_frontier=max(width.values()),
        elapsed=time.perf_counter() - t0,
        complete=complete,
        engine="stubborn",
        reduced=True,
    )
