"""State and terminal checks: place invariants, the weight norm, ring shape."""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass, field

from .protocol import AC, BC, FC, INFO, Configuration, Event, Variant, enabled_events
from .topology import FAKE, Tree, dfs_ring_oracle, is_single_cycle, proc_key


class WrongVariantError(ValueError):
    pass


@dataclass(frozen=True)
class Verdict:
    check: str
    ok: bool
    detail: str = ""
    observed: int | None = None

    def __bool__(self) -> bool:
        return self.ok

    def to_json(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}


def _diff(lhs: Counter, rhs: Counter) -> str:
    extra = lhs - rhs
    missing = rhs - lhs
    bits = []
    if extra:
        bits.append("extra " + ",".join(f"{k}x{v}" for k, v in sorted(extra.items(), key=str)))
    if missing:
        bits.append("missing " + ",".join(f"{k}x{v}" for k, v in sorted(missing.items(), key=str)))
    return "; ".join(bits)


def check_invariant_A(config: Configuration, tree: Tree, variant: Variant | str = Variant.SIMPLIFIED) -> Verdict:
    """InitP + Succ sources + Info/AC identities + BC destinations = all processes, once each."""
    variant = Variant(variant)
    if variant not in (Variant.SIMPLIFIED, Variant.SUCC):
        raise WrongVariantError(f"invariant A does not apply to variant {variant}")
    lhs: Counter = Counter(config.initp)
    lhs.update(a for a, _ in config.succ)
    for m in config.messages:
        if m.kind in (INFO, AC):
            lhs[m.identity] += 1
        elif m.kind is BC:
            lhs[m.destination] += 1
    rhs = Counter(tree.nodes)
    return Verdict("A", lhs == rhs, _diff(lhs, rhs))


def check_invariant_B(config: Configuration, tree: Tree, variant: Variant | str = Variant.SIMPLIFIED) -> Verdict:
    """Succ + BC (destination, identity) = FC (source, destination) + reversed Pred."""
    variant = Variant(variant)
    if variant not in (Variant.SIMPLIFIED, Variant.ORIGINAL):
        raise WrongVariantError(f"invariant B does not apply to variant {variant}")
    lhs: Counter = Counter(config.succ)
    rhs: Counter = Counter((b, a) for a, b in config.pred)
    for m in config.messages:
        if m.kind is BC:
            lhs[(m.destination, m.identity)] += 1
        elif m.kind is FC:
            rhs[(m.source, m.destination)] += 1
    if variant is Variant.ORIGINAL:
        lhs = Counter({k: v for k, v in lhs.items() if FAKE not in k})
        rhs = Counter({k: v for k, v in rhs.items() if FAKE not in k})
    return Verdict("B", lhs == rhs, _diff(lhs, rhs))


@dataclass(frozen=True)
class WeightBreakdown:
    node_term: int
    fc_term: int
    bc_term: int
    ac_term: int
    info_term: int

    @property
    def total(self) -> int:
        return self.node_term + self.fc_term + self.bc_term + self.ac_term + self.info_term


def weight(config: Configuration, tree: Tree, variant: Variant | str = Variant.SIMPLIFIED) -> WeightBreakdown:
    """Termination norm: 3+depth per unstarted node, 1 per FC/BC, 2 per AC, 3+depth(target) per Info.

    In the ``succ`` and ``pred`` variants the missing message kind simply
    contributes nothing.
    """
    variant = Variant(variant)
    kinds = Counter(m.kind for m in config.messages)
    return WeightBreakdown(
        node_term=sum(3 + tree.depth(p) for p in config.initp),
        fc_term=0 if variant is Variant.SUCC else kinds[FC],
        bc_term=0 if variant is Variant.PRED else kinds[BC],
        ac_term=2 * kinds[AC],
        info_term=sum(3 + tree.depth(m.destination) for m in config.messages if m.kind is INFO),
    )


def expected_decrement(event: Event, tree: Tree, variant: Variant | str) -> int:
    """Exact weight drop of one firing of ``event``."""
    variant = Variant(variant)
    rule = event.rule
    if rule == "T1":
        d = tree.depth(event["p"])
        return 3 + d if variant is Variant.SUCC else 2 + d
    if rule == "T4a":
        return 1 + tree.depth(event["r"])
    if rule == "T4c":
        return 3 if variant is Variant.PRED else 2
    if rule == "T5":
        return 2 if variant is Variant.PRED else 1
    return 1


def check_weight_decrease(pre_config: Configuration, event: Event, post_config: Configuration,
                          tree: Tree, variant: Variant | str = Variant.SIMPLIFIED) -> Verdict:
    drop = weight(pre_config, tree, variant).total - weight(post_config, tree, variant).total
    want = expected_decrement(event, tree, variant)
    if drop <= 0:
        return Verdict("weight", False, f"{event} does not decrease the weight (delta {-drop})", drop)
    if drop != want:
        return Verdict("weight", False, f"{event} decreased the weight by {drop}, expected {want}", drop)
    return Verdict("weight", True, "", drop)


@dataclass
class RingReport:
    is_ring: bool
    succ_matches_oracle: bool
    mirror_ok: bool
    pred_cases_ok: bool
    silent: bool
    details: list[str] = field(default_factory=list)

    @property
    def all_ok(self) -> bool:
        return self.is_ring and self.succ_matches_oracle and self.mirror_ok and self.pred_cases_ok and self.silent

    def to_json(self) -> dict:
        return {**asdict(self), "all_ok": self.all_ok}


def _last_leaf(tree: Tree, v: str) -> str:
    while tree.children(v):
        v = tree.children(v)[-1]
    return v


def expected_predecessors(tree: Tree) -> dict[str, tuple[str, str]]:
    """Predecessor of each node by case, independent of the preorder oracle.

    Returns ``node -> (case, predecessor)`` with case ``parent`` (oldest
    child), ``preceding-leaf`` (younger sibling: rightmost leaf below the
    elder sibling) or ``last-leaf`` (the root).
    """
    out = {}
    for v in tree.nodes:
        if v == tree.root:
            out[v] = ("last-leaf", _last_leaf(tree, v))
        elif tree.index(v) == 1:
            out[v] = ("parent", tree.parent(v))
        else:
            elder = tree.child_at(tree.parent(v), tree.index(v) - 1)
            out[v] = ("preceding-leaf", _last_leaf(tree, elder))
    return out


def check_terminal(config: Configuration, tree: Tree, variant: Variant | str) -> RingReport:
    """Judge a quiescent configuration: silence, ring shape, mirroring, predecessor cases."""
    variant = Variant(variant)
    if enabled_events(config, tree, variant):
        raise ValueError("check_terminal needs a quiescent configuration")
    details: list[str] = []
    nodes = tree.nodes
    silent = not config.initp and not config.messages
    if not silent:
        details.append(f"not silent: {len(config.initp)} unstarted processes, {len(config.messages)} messages")

    def real(pairs):
        kept = [(a, b) for a, b in pairs if FAKE not in (a, b)]
        if variant is Variant.ORIGINAL and len(nodes) >= 2 and len(kept) != len(pairs):
            details.append(f"{len(pairs) - len(kept)} bogus entries left")
        return kept

    succ_pairs = real(config.succ)
    pred_pairs = real(config.pred)

    if len(nodes) == 1:
        return RingReport(True, True, True, True, True, ["single node: vacuously correct"])

    if variant is Variant.PRED:
        ring_pairs = [(b, a) for a, b in pred_pairs]
    else:
        ring_pairs = succ_pairs
    ring = dict(ring_pairs)
    functional = len(ring) == len(ring_pairs)
    if not functional:
        details.append("a process has several successors")
    is_ring = functional and is_single_cycle(ring, nodes) and len(succ_pairs + pred_pairs) > 0
    if variant is Variant.ORIGINAL and len(succ_pairs) != len(config.succ):
        is_ring = False
    oracle = dfs_ring_oracle(tree)
    matches = functional and ring == oracle
    if not matches:
        wrong = [v for v in nodes if ring.get(v) != oracle[v]]
        details.append("succ differs from DFS order at " + ",".join(wrong))

    if variant in (Variant.SIMPLIFIED, Variant.ORIGINAL):
        mirror_ok = Counter(succ_pairs) == Counter((b, a) for a, b in pred_pairs)
        if not mirror_ok:
            details.append("Succ and Pred are not mirror images")
    else:
        mirror_ok = True

    if variant is Variant.SUCC:
        preds = {b: a for a, b in succ_pairs}
    else:
        preds = dict(pred_pairs)
    cases_ok = len(pred_pairs if variant is not Variant.SUCC else succ_pairs) == len(nodes)
    for v, (case, want) in expected_predecessors(tree).items():
        if preds.get(v) != want:
            cases_ok = False
            details.append(f"pred({v}) = {preds.get(v)}, expected {want} ({case})")
    return RingReport(is_ring, matches, mirror_ok, cases_ok, silent, details)


def ring_to_dot(tree: Tree) -> str:
    """DOT drawing of the tree plus the DFS ring, ring edges coloured by predecessor case."""
    colour = {"parent": "red", "preceding-leaf": "forestgreen", "last-leaf": "blue"}
    lines = ["digraph ring {", "  node [shape=circle];"]
    for v in sorted(tree.nodes, key=proc_key):
        for c in tree.children(v):
            lines.append(f'  "{v}" -> "{c}" [style=dashed, arrowhead=none, color=gray];')
    for v, (case, p) in sorted(expected_predecessors(tree).items(), key=lambda kv: proc_key(kv[0])):
        lines.append(f'  "{p}" -> "{v}" [color={colour[case]}, label="{case}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
