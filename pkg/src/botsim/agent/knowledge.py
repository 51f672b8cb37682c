"""Background-knowledge lookup and falsification."""

from __future__ import annotations

from dataclasses import replace

from botsim.agent.backend import Backend, DecisionRequest
from botsim.agent.prompts import render_prompt
from botsim.env import Environment, KnowledgeItem
from botsim.text import overlap, topic_keywords


def retrieve_knowledge(env: Environment, topic: str, day: str, n: int = 3) -> list[KnowledgeItem]:
    """Top-``n`` items for ``topic``: tag matches first, then keyword hits; newest first.

    Items dated after ``day`` are skipped unless nothing earlier exists.
    """
    tagged = [k for k in env.knowledge if k.topic == topic]
    if not tagged:
        keys = topic_keywords(topic)
        tagged = [k for k in env.knowledge if overlap(keys, k.text)]
    past = [k for k in tagged if k.date <= day] or tagged
    return sorted(past, key=lambda k: (k.date, k.text), reverse=True)[:n]


def rewrite_knowledge(backend: Backend, item: KnowledgeItem, seed: int) -> KnowledgeItem:
    if item.falsified:
        raise ValueError("item is already falsified")
    prompt = render_prompt("rewrite", {"Knowledge": item.text})
    text = backend.complete(
        DecisionRequest(prompt, {"News": "str"}, seed, task="rewrite", bindings={"text": item.text})
    ).strip()
    return replace(item, text=text, falsified=True)
