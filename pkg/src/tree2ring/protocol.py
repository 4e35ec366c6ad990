"""Guarded transition rules of the tree-to-ring protocol.

A configuration holds four places: ``InitP`` (processes that have not yet
taken their initial step), ``Succ`` and ``Pred`` (pairs ``(p, x)`` meaning
"x is the successor/predecessor of p") and ``Messages``. Rules T1..T6 (with
T4 split into T4a/T4b/T4c) are pure functions from one configuration to the
next. Four variants differ only in which places and message kinds exist:

``original``
    Succ/Pred start as total maps holding bogus values; rules overwrite them.
``simplified``
    Succ/Pred start empty and entries are only ever added.
``succ``
    No Pred place, no FC messages, no T3.
``pred``
    No Succ place, no BC messages, no T6.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, NamedTuple

from .topology import FAKE, Tree, proc_key


class MessageKind(str, Enum):
    FC = "FC"
    AC = "AC"
    BC = "BC"
    INFO = "Info"

    def __str__(self) -> str:
        return self.value


class Variant(str, Enum):
    ORIGINAL = "original"
    SIMPLIFIED = "simplified"
    SUCC = "succ"
    PRED = "pred"

    def __str__(self) -> str:
        return self.value

    @property
    def has_succ(self) -> bool:
        return self is not Variant.PRED

    @property
    def has_pred(self) -> bool:
        return self is not Variant.SUCC


class Message(NamedTuple):
    kind: MessageKind
    identity: str
    source: str
    destination: str

    def __str__(self) -> str:
        return f"({self.kind},{self.identity},{self.source},{self.destination})"


FC, AC, BC, INFO = MessageKind.FC, MessageKind.AC, MessageKind.BC, MessageKind.INFO

RULES = ("T1", "T2", "T3", "T4a", "T4b", "T4c", "T5", "T6")

# Tokens are (place, value) pairs; values are a process, a pair or a Message.
Token = tuple


def _msort(items: Iterable) -> tuple:
    return tuple(sorted(items))


@dataclass(frozen=True)
class Configuration:
    initp: frozenset[str]
    succ: tuple[tuple[str, str], ...] = ()
    pred: tuple[tuple[str, str], ...] = ()
    messages: tuple[Message, ...] = ()

    def key(self) -> bytes:
        """Canonical, injective byte encoding of the configuration."""
        parts = [
            ",".join(sorted(self.initp, key=proc_key)),
            ",".join(f"{a}>{b}" for a, b in self.succ),
            ",".join(f"{a}>{b}" for a, b in self.pred),
            ",".join(f"{m.kind.value}:{m.identity}:{m.source}:{m.destination}" for m in self.messages),
        ]
        return "|".join(parts).encode()

    def digest(self) -> str:
        return hashlib.sha256(self.key()).hexdigest()[:16]

    def tokens(self) -> Counter:
        c: Counter = Counter(("InitP", p) for p in self.initp)
        c.update(("Succ", e) for e in self.succ)
        c.update(("Pred", e) for e in self.pred)
        c.update(("Messages", m) for m in self.messages)
        return c

    @classmethod
    def from_tokens(cls, tokens: Iterable[Token]) -> Configuration:
        initp, succ, pred, msgs = [], [], [], []
        sink = {"InitP": initp, "Succ": succ, "Pred": pred, "Messages": msgs}
        for place, value in tokens:
            sink[place].append(value)
        if len(set(initp)) != len(initp):
            raise ValueError("InitP is a set; duplicate process")
        return cls(frozenset(initp), _msort(succ), _msort(pred), _msort(msgs))

    def succ_map(self) -> dict[str, str]:
        return dict(self.succ)

    def pred_map(self) -> dict[str, str]:
        return dict(self.pred)

    def to_json(self) -> dict:
        return {
            "initp": sorted(self.initp, key=proc_key),
            "succ": [list(e) for e in self.succ],
            "pred": [list(e) for e in self.pred],
            "messages": [[m.kind.value, m.identity, m.source, m.destination] for m in self.messages],
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> Configuration:
        return cls(
            frozenset(doc["initp"]),
            _msort(tuple(e) for e in doc["succ"]),
            _msort(tuple(e) for e in doc["pred"]),
            _msort(Message(MessageKind(k), i, s, d) for k, i, s, d in doc["messages"]),
        )


_VARS = ("p", "c", "f", "q", "r", "I", "m", "n")


@dataclass(frozen=True, order=True)
class Event:
    rule: str
    binding: tuple[tuple[str, object], ...]

    @classmethod
    def make(cls, rule: str, **values) -> Event:
        unknown = set(values) - set(_VARS)
        if unknown or rule not in RULES:
            raise ValueError(f"bad event {rule} {values}")
        return cls(rule, tuple((v, values[v]) for v in _VARS if v in values))

    def __getitem__(self, var: str):
        for k, v in self.binding:
            if k == var:
                return v
        raise KeyError(var)

    def get(self, var: str, default=None):
        try:
            return self[var]
        except KeyError:
            return default

    @property
    def process(self) -> str:
        """The process this event fires for."""
        return self["p"] if self.rule in ("T1", "T2") else self["r"]

    def to_json(self) -> dict:
        return {"rule": self.rule, "binding": dict(self.binding)}

    def __str__(self) -> str:
        return self.rule + "(" + ",".join(f"{k}={v}" for k, v in self.binding) + ")"


def initial_config(tree: Tree, variant: Variant | str,
                   seed_state: tuple[Mapping[str, str], Mapping[str, str]] | None = None) -> Configuration:
    """Initial marking: every real process in InitP, no messages.

    ``original`` starts with Succ = Pred = {(p, fake)} unless ``seed_state``
    supplies arbitrary ``(succ0, pred0)`` maps; the other variants start with
    empty Succ/Pred and reject a seed state.
    """
    variant = Variant(variant)
    procs = frozenset(tree.nodes)
    if variant is not Variant.ORIGINAL:
        if seed_state is not None:
            raise ValueError(f"seed_state is only meaningful for variant original, not {variant}")
        return Configuration(procs)
    if seed_state is None:
        bogus = _msort((p, FAKE) for p in procs)
        return Configuration(procs, bogus, bogus)
    succ0, pred0 = (dict(m) for m in seed_state)
    for name, m in (("succ", succ0), ("pred", pred0)):
        if set(m) != procs:
            raise ValueError(f"seed {name} map must cover exactly the real processes")
    return Configuration(procs, _msort(succ0.items()), _msort(pred0.items()))


def _distinct(seq):
    seen = set()
    for x in seq:
        if x not in seen:
            seen.add(x)
            yield x


def _local_values(pairs, owner: str) -> list[str]:
    return sorted({b for a, b in pairs if a == owner}, key=proc_key)


def enabled_events(config: Configuration, tree: Tree, variant: Variant | str) -> list[Event]:
    """All enabled bindings, in rule order T1..T6 and then by process label."""
    variant = Variant(variant)
    orig = variant is Variant.ORIGINAL
    by_rule: dict[str, list[Event]] = {r: [] for r in RULES}

    for p in sorted(config.initp, key=proc_key):
        c = tree.child_at(p, 1)
        if c is None:
            continue
        if c != FAKE:
            if orig:
                for q in _local_values(config.succ, p):
                    by_rule["T1"].append(Event.make("T1", p=p, c=c, q=q))
            else:
                by_rule["T1"].append(Event.make("T1", p=p, c=c))
        else:
            f, n = tree.parent(p), tree.index(p)
            if f != FAKE:
                by_rule["T2"].append(Event.make("T2", p=p, f=f, n=n))

    for msg in _distinct(config.messages):
        kind, ident, p, r = msg
        if kind is FC:
            if variant is Variant.SUCC:
                continue
            if orig:
                assert tree.parent(r) == p, f"FC message {msg} not sent by the parent of {r}"
                for q in _local_values(config.pred, r):
                    by_rule["T3"].append(Event.make("T3", p=p, q=q, r=r, I=ident))
            elif ident == p:
                by_rule["T3"].append(Event.make("T3", p=p, r=r))
        elif kind is INFO:
            if tree.child_at(r, tree.index(p)) != p or tree.parent(p) != r:
                continue
            n = tree.index(p)
            nxt = tree.child_at(r, n + 1)
            if nxt is None:
                continue
            if nxt != FAKE:
                by_rule["T4a"].append(Event.make("T4a", p=p, q=nxt, r=r, I=ident, n=n))
                continue
            up = tree.parent(r)
            if up != FAKE:
                by_rule["T4b"].append(Event.make("T4b", p=p, q=up, r=r, I=ident, m=tree.index(r), n=n))
            elif orig:
                for q in _local_values(config.pred, r):
                    by_rule["T4c"].append(Event.make("T4c", p=p, q=q, r=r, I=ident, n=n))
            else:
                by_rule["T4c"].append(Event.make("T4c", p=p, r=r, I=ident, n=n))
        elif kind is AC:
            if orig:
                for q in _local_values(config.pred, r):
                    by_rule["T5"].append(Event.make("T5", p=p, q=q, r=r, I=ident))
            else:
                by_rule["T5"].append(Event.make("T5", p=p, r=r, I=ident))
        elif kind is BC:
            if variant is Variant.PRED:
                continue
            if orig:
                for q in _local_values(config.succ, r):
                    by_rule["T6"].append(Event.make("T6", p=p, q=q, r=r, I=ident))
            else:
                by_rule["T6"].append(Event.make("T6", p=p, r=r, I=ident))

    out: list[Event] = []
    for rule in RULES:
        out.extend(sorted(by_rule[rule], key=_event_key))
    return out


def _event_key(e: Event):
    return tuple((k, proc_key(v) if isinstance(v, str) else (0, v, "")) for k, v in e.binding)


def event_effects(event: Event, variant: Variant | str) -> tuple[list[Token], list[Token]]:
    """Tokens consumed and produced by ``event`` (enabledness not checked)."""
    variant = Variant(variant)
    orig = variant is Variant.ORIGINAL
    has_succ, has_pred = variant.has_succ, variant.has_pred
    b = dict(event.binding)
    rule = event.rule
    pre: list[Token] = []
    post: list[Token] = []

    if rule == "T1":
        p, c = b["p"], b["c"]
        pre.append(("InitP", p))
        if orig:
            pre.append(("Succ", (p, b["q"])))
        if has_succ:
            post.append(("Succ", (p, c)))
        if variant is not Variant.SUCC:
            post.append(("Messages", Message(FC, p, p, c)))
    elif rule == "T2":
        p = b["p"]
        pre.append(("InitP", p))
        post.append(("Messages", Message(INFO, p, p, b["f"])))
    elif rule == "T3":
        p, r = b["p"], b["r"]
        ident = b.get("I", p)
        pre.append(("Messages", Message(FC, ident, p, r)))
        if orig:
            pre.append(("Pred", (r, b["q"])))
        post.append(("Pred", (r, ident)))
    elif rule in ("T4a", "T4b", "T4c"):
        ident, p, r = b["I"], b["p"], b["r"]
        pre.append(("Messages", Message(INFO, ident, p, r)))
        if rule == "T4a":
            post.append(("Messages", Message(AC, ident, r, b["q"])))
        elif rule == "T4b":
            post.append(("Messages", Message(INFO, ident, r, b["q"])))
        else:
            if orig:
                pre.append(("Pred", (r, b["q"])))
            if has_pred:
                post.append(("Pred", (r, ident)))
            if has_succ:
                post.append(("Messages", Message(BC, r, r, ident)))
    elif rule == "T5":
        ident, p, r = b["I"], b["p"], b["r"]
        pre.append(("Messages", Message(AC, ident, p, r)))
        if orig:
            pre.append(("Pred", (r, b["q"])))
        if has_pred:
            post.append(("Pred", (r, ident)))
        if has_succ:
            post.append(("Messages", Message(BC, r, r, ident)))
    elif rule == "T6":
        ident, p, r = b["I"], b["p"], b["r"]
        pre.append(("Messages", Message(BC, ident, p, r)))
        if orig:
            pre.append(("Succ", (r, b["q"])))
        post.append(("Succ", (r, ident)))
    else:
        raise ValueError(f"unknown rule {rule}")
    return pre, post


def apply_effects(config: Configuration, pre: Iterable[Token], post: Iterable[Token]) -> Configuration:
    initp = set(config.initp)
    bags = {"Succ": list(config.succ), "Pred": list(config.pred), "Messages": list(config.messages)}
    for place, value in pre:
        if place == "InitP":
            initp.remove(value)
        else:
            bags[place].remove(value)
    for place, value in post:
        if place == "InitP":
            initp.add(value)
        else:
            bags[place].append(value)
    return Configuration(frozenset(initp), _msort(bags["Succ"]), _msort(bags["Pred"]),
                         _msort(bags["Messages"]))


class NotEnabledError(ValueError):
    pass


def fire(config: Configuration, event: Event, tree: Tree, variant: Variant | str) -> Configuration:
    """Successor configuration after ``event``; raises if it is not enabled."""
    if event not in enabled_events(config, tree, variant):
        raise NotEnabledError(f"{event} is not enabled")
    return apply_effects(config, *event_effects(event, variant))


def successors(config: Configuration, tree: Tree, variant: Variant | str):
    """Yield ``(event, next_config)`` for every enabled event."""
    for ev in enabled_events(config, tree, variant):
        yield ev, apply_effects(config, *event_effects(ev, variant))
