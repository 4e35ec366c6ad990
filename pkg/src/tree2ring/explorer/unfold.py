"""Unfold the coloured net of one tree into a place/transition net over token bits.

Every token that can ever appear (a process in InitP, a Succ/Pred pair, a
message) gets a bit; every event binding that can ever be enabled becomes a
transition with a pre-set and a post-set of bits. The token universe is the
least fixpoint of "fire everything enabled in the union of known tokens",
which over-approximates the reachable bindings because no rule has an
inhibitor condition.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..protocol import Configuration, Event, Variant, enabled_events, event_effects, initial_config
from ..topology import Tree, proc_key

_PLACE_ORDER = {"InitP": 0, "Succ": 1, "Pred": 2, "Messages": 3}


class NotSafeError(ValueError):
    """A token would be present twice, which a bit vector cannot hold."""


def _token_key(tok):
    place, value = tok
    if place == "InitP":
        return (_PLACE_ORDER[place], (proc_key(value),))
    if place == "Messages":
        return (3, (value.kind.value,) + tuple(proc_key(v) for v in value[1:]))
    return (_PLACE_ORDER[place], tuple(proc_key(v) for v in value))


@dataclass
class PackedNet:
    tree: Tree
    variant: Variant
    initial: Configuration
    tokens: list[tuple]
    events: list[Event]
    pre: list[tuple[int, ...]]
    post: list[tuple[int, ...]]
    index: dict[tuple, int] = field(init=False)

    def __post_init__(self):
        self.index = {t: i for i, t in enumerate(self.tokens)}

    @property
    def words(self) -> int:
        return max(1, (len(self.tokens) + 63) // 64)

    def _mask(self, bits) -> np.ndarray:
        row = np.zeros(self.words, dtype=np.uint64)
        for b in bits:
            row[b >> 6] |= np.uint64(1) << np.uint64(b & 63)
        return row

    def masks(self) -> tuple[np.ndarray, np.ndarray]:
        pre = np.stack([self._mask(p) for p in self.pre]) if self.pre else np.zeros((0, self.words), np.uint64)
        post = np.stack([self._mask(p) for p in self.post]) if self.post else np.zeros((0, self.words), np.uint64)
        return pre, post

    def encode(self, config: Configuration) -> np.ndarray:
        counts = config.tokens()
        if any(c > 1 for c in counts.values()):
            raise NotSafeError("configuration holds a token twice")
        return self._mask(self.index[t] for t in counts)

    def decode(self, row: np.ndarray) -> Configuration:
        toks = []
        for w, word in enumerate(row.tolist()):
            while word:
                low = word & -word
                toks.append(self.tokens[64 * w + low.bit_length() - 1])
                word ^= low
        return Configuration.from_tokens(toks)

    def consumers(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = defaultdict(list)
        for t, bits in enumerate(self.pre):
            for b in bits:
                out[b].append(t)
        return out

    def producers(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = defaultdict(list)
        for t, bits in enumerate(self.post):
            for b in bits:
                out[b].append(t)
        return out


def unfold(tree: Tree, variant: Variant | str,
           seed_state: tuple[Mapping[str, str], Mapping[str, str]] | None = None) -> PackedNet:
    variant = Variant(variant)
    init = initial_config(tree, variant, seed_state)
    known = set(init.tokens())
    effects: dict[Event, tuple[list, list]] = {}
    while True:
        union = Configuration.from_tokens(known)
        fresh = set()
        for ev in enabled_events(union, tree, variant):
            if ev in effects:
                continue
            pre, post = event_effects(ev, variant)
            effects[ev] = (pre, post)
            fresh.update(t for t in post if t not in known)
        if not fresh:
            break
        known |= fresh
    tokens = sorted(known, key=_token_key)
    index = {t: i for i, t in enumerate(tokens)}
    events = sorted(effects, key=lambda e: (e.rule, str(e)))
    return PackedNet(
        tree=tree,
        variant=variant,
        initial=init,
        tokens=tokens,
        events=events,
        pre=[tuple(sorted(index[t] for t in effects[e][0])) for e in events],
        post=[tuple(sorted(index[t] for t in effects[e][1])) for e in events],
    )
