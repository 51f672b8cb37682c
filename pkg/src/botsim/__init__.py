"""Seedable simulation of LLM-driven social bots on a Reddit-like platform."""

from botsim.env import (
    Account,
    AccountKind,
    Environment,
    EventKind,
    InteractionEvent,
    KnowledgeItem,
    RoleSpec,
    apply_event,
    generate_unique_id,
    ingest_human_corpus,
)

__version__ = "0.1.0"

__all__ = [
    "Account",
    "AccountKind",
    "Environment",
    "EventKind",
    "InteractionEvent",
    "KnowledgeItem",
    "RoleSpec",
    "apply_event",
    "generate_unique_id",
    "ingest_human_corpus",
]
