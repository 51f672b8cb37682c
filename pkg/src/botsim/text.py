"""Tokenization and topic keyword tables used by the stub backend and scorers."""

from __future__ import annotations

import re

_TOKEN = re.compile(r"[a-z0-9]+")

STOPWORDS = frozenset(
    """a an and are as at be but by for from has have he her his i if in into is it its
    of on or our she so than that the their them there these they this to was we were
    what when which who will with you your not no do does did just about more new""".split()
)

# event topic -> keywords; also accepts the short tags used in goal tasks
TOPIC_KEYWORDS: dict[str, tuple[str, ...]] = {
    "russia-ukraine": ("russia", "ukraine", "russian", "ukrainian", "kyiv", "moscow", "putin", "zelensky", "war"),
    "israel-palestine": ("israel", "palestine", "israeli", "palestinian", "gaza", "hamas", "conflict", "ceasefire"),
    "us-politics": ("biden", "trump", "congress", "senate", "election", "republican", "democrat", "politics", "president"),
    "international": ("world", "international", "global", "summit", "nations", "un"),
}


def tokenize(text: str) -> list[str]:
    return [t for t in _TOKEN.findall(text.lower()) if t not in STOPWORDS]


def token_set(text: str) -> set[str]:
    return set(tokenize(text))


def topic_keywords(topic: str) -> set[str]:
    """Keywords for a topic tag; unknown tags fall back to their own tokens."""
    if topic in TOPIC_KEYWORDS:
        return set(TOPIC_KEYWORDS[topic])
    return token_set(topic.replace("-", " "))


def overlap(a: set[str], text: str) -> int:
    return len(a & token_set(text))
