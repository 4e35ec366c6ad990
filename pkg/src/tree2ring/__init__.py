"""Simulator, exhaustive explorer and checker for the self-stabilising tree-to-ring protocol."""

__version__ = "0.1.0"

from .protocol import Configuration, Event, Message, MessageKind, Variant, enabled_events, fire, initial_config
from .topology import FAKE, Tree, dfs_ring_oracle, enumerate_topologies, parse_tree, validate

__all__ = [
    "FAKE",
    "Configuration",
    "Event",
    "Message",
    "MessageKind",
    "Tree",
    "Variant",
    "dfs_ring_oracle",
    "enabled_events",
    "enumerate_topologies",
    "fire",
    "initial_config",
    "parse_tree",
    "validate",
]
