"""Single-run execution: drive one configuration to quiescence under a scheduler."""

from __future__ import annotations

import json
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import IO, Mapping

from .protocol import (
    Configuration,
    Event,
    MessageKind,
    Variant,
    apply_effects,
    enabled_events,
    event_effects,
    initial_config,
)
from .topology import FAKE, Tree, proc_key
from .verify import weight

POLICIES = ("random", "fifo", "lifo", "lexicographic")


@dataclass(frozen=True)
class SchedulerPolicy:
    """Which enabled event to fire next.

    ``fifo``/``lifo`` order events by the age of the token they consume:
    InitP tokens are the oldest (in label order), then messages in the order
    they were sent.
    """

    kind: str = "lexicographic"
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in POLICIES:
            raise ValueError(f"unknown scheduler policy {self.kind!r}")
        if self.kind == "random" and self.seed is None:
            raise ValueError("random policy needs a seed")

    @classmethod
    def parse(cls, text: str, seed: int | None = None) -> SchedulerPolicy:
        kind, _, s = text.partition(":")
        return cls(kind, int(s) if s else (seed if kind == "random" else None))

    def __str__(self) -> str:
        return f"random:{self.seed}" if self.kind == "random" else self.kind


@dataclass
class TraceStep:
    event: Event
    digest: str
    config: Configuration | None = None


@dataclass
class Trace:
    tree: Tree
    variant: Variant
    initial: Configuration
    steps: list[TraceStep] = field(default_factory=list)
    final: Configuration | None = None

    def __len__(self) -> int:
        return len(self.steps)

    def write_jsonl(self, fh: IO[str]) -> None:
        for step in self.steps:
            rec = {"rule": step.event.rule, "binding": dict(step.event.binding), "digest": step.digest}
            if step.config is not None:
                rec["config"] = step.config.to_json()
            fh.write(json.dumps(rec) + "\n")


def random_seed_state(tree: Tree, seed: int) -> tuple[dict[str, str], dict[str, str]]:
    """Arbitrary Succ/Pred values (``fake`` included) for every process."""
    rng = random.Random(seed)
    pool = sorted(tree.nodes, key=proc_key) + [FAKE]
    succ0 = {p: rng.choice(pool) for p in sorted(tree.nodes, key=proc_key)}
    pred0 = {p: rng.choice(pool) for p in sorted(tree.nodes, key=proc_key)}
    return succ0, pred0


def _driver_token(pre):
    for place, value in pre:
        if place in ("InitP", "Messages"):
            return (place, value)
    raise AssertionError("every rule consumes an InitP token or a message")


def run_to_quiescence(tree: Tree, variant: Variant | str,
                      policy: SchedulerPolicy = SchedulerPolicy(),
                      seed_state: tuple[Mapping[str, str], Mapping[str, str]] | None = None,
                      full_trace: bool = False) -> Trace:
    variant = Variant(variant)
    config = initial_config(tree, variant, seed_state)
    trace = Trace(tree, variant, config)
    budget = weight(config, tree, variant).total + 1
    rng = random.Random(policy.seed)

    # per token: list of send sequence numbers of its pending instances
    ages: dict[tuple, list[int]] = {}
    clock = 0
    for p in sorted(config.initp, key=proc_key):
        ages[("InitP", p)] = [clock]
        clock += 1

    while True:
        enabled = enabled_events(config, tree, variant)
        if not enabled:
            break
        if len(trace.steps) >= budget:
            raise RuntimeError(f"run exceeded the weight bound of {budget} steps; the norm must be broken")
        effects = [event_effects(e, variant) for e in enabled]
        if policy.kind == "lexicographic":
            k = 0
        elif policy.kind == "random":
            k = rng.randrange(len(enabled))
        else:
            tok_age = [ages[_driver_token(pre)] for pre, _ in effects]
            if policy.kind == "fifo":
                k = min(range(len(enabled)), key=lambda i: tok_age[i][0])
            else:
                k = max(range(len(enabled)), key=lambda i: tok_age[i][-1])
        event = enabled[k]
        pre, post = effects[k]
        tok = _driver_token(pre)
        if policy.kind == "lifo":
            ages[tok].pop()
        else:
            ages[tok].pop(0)
        for place, value in post:
            if place == "Messages":
                ages.setdefault((place, value), []).append(clock)
                clock += 1
        config = apply_effects(config, pre, post)
        trace.steps.append(TraceStep(event, config.digest(), config if full_trace else None))
    trace.final = config
    return trace


@dataclass(frozen=True)
class MessageStats:
    FC: int
    Info: int
    AC: int
    BC: int

    @property
    def total(self) -> int:
        return self.FC + self.Info + self.AC + self.BC

    def to_json(self) -> dict:
        return {"FC": self.FC, "Info": self.Info, "AC": self.AC, "BC": self.BC, "total": self.total}


def message_stats(trace: Trace) -> MessageStats:
    """Count message sends per kind along a complete trace."""
    if trace.final is None or enabled_events(trace.final, trace.tree, trace.variant):
        raise ValueError("message_stats needs a complete trace ending in a quiescent state")
    sent: Counter = Counter()
    for step in trace.steps:
        _, post = event_effects(step.event, trace.variant)
        sent.update(v.kind for place, v in post if place == "Messages")
    return MessageStats(sent[MessageKind.FC], sent[MessageKind.INFO], sent[MessageKind.AC], sent[MessageKind.BC])
