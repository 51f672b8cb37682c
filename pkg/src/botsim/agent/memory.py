"""Agent memory: the agent's own past posts and comments on a topic."""

from __future__ import annotations

from dataclasses import dataclass, field

from botsim.env import Environment, EventKind, InteractionEvent
from botsim.text import overlap, topic_keywords


@dataclass
class Memory:
    history_posts: list[tuple[str, str]] = field(default_factory=list)
    history_comments: list[tuple[str, str]] = field(default_factory=list)

    def __bool__(self) -> bool:
        return bool(self.history_posts or self.history_comments)


def _select(events: list[InteractionEvent], topic: str, n: int) -> list[InteractionEvent]:
    newest = sorted(events, key=lambda e: e.sort_key, reverse=True)
    exact = [e for e in newest if e.topic == topic]
    if exact:
        return exact[:n]
    keys = topic_keywords(topic)
    return [e for e in newest if overlap(keys, e.content or "")][:n]


def retrieve_memory(env: Environment, agent: str, topic: str, n: int) -> Memory:
    """Up to ``n`` newest posts and ``n`` newest comments by ``agent`` on ``topic``.

    Exact topic-tag matches win; when the agent has none, content sharing a
    keyword with the topic is used instead.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    own = env.events_by(agent)
    posts = [e for e in own if e.kind is EventKind.POST]
    comments = [e for e in own if e.kind in (EventKind.COMMENT1, EventKind.COMMENT2)]
    return Memory(
        [(e.topic or "", e.content or "") for e in _select(posts, topic, n)],
        [(e.topic or "", e.content or "") for e in _select(comments, topic, n)],
    )
