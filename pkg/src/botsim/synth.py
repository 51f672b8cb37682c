"""Seeded synthetic corpora for demos, tests and dry runs.

``make_corpus`` writes a human corpus in the ingestion schema. The bundled
toy corpus under ``botsim/data/toy_corpus`` is ``make_corpus(30, seed=0)``.
``structure_only_graph`` builds a labelled graph whose only signal is edge
direction, used to exercise the perturbation experiment.
"""

from __future__ import annotations

import json
import random
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from botsim.env import ID_ALPHABET, SUBREDDITS, day_of, day_start

TOY_SEED = 0
TOY_ACCOUNTS = 30
CORPUS_FIRST_DAY = "2023-06-20"
CORPUS_DAYS = 120

_SUB_DESCRIPTIONS = {
    "worldnews": "Major news from around the world",
    "politics": "News and discussion about US politics",
    "news": "Real news articles, primarily but not exclusively US",
    "InternationalNews": "International news and global affairs",
    "UpliftingNews": "Positive and heartwarming news stories",
    "GlobalTalk": "Discussion of global events and world politics",
}

_SUBJECTS = {
    "russia-ukraine": ["Ukraine", "Russia", "Kyiv", "Moscow", "the Russian army", "Ukrainian drones"],
    "israel-palestine": ["Israel", "Gaza", "the ceasefire talks", "Hamas", "Palestinian civilians", "Israeli officials"],
    "us-politics": ["Biden", "Trump", "the Senate", "Congress", "the election", "Republican leaders"],
    "international": ["the UN summit", "global markets", "world leaders", "the climate talks", "the G20"],
    "uplifting": ["a local library", "volunteers", "a rescue dog", "a small town", "a new clinic"],
}
_VERBS = ["announced", "rejected", "expanded", "questioned", "delayed", "approved", "criticized", "backed"]
_OBJECTS = [
    "a new aid package", "the latest proposal", "sanctions on exports", "a border agreement",
    "the funding bill", "a prisoner exchange", "new security guarantees", "the investigation",
]
_COMMENT_OPENERS = [
    "I doubt", "Interesting that", "Not sure why", "Honestly", "Good to see", "Can't believe",
    "Makes sense that", "Wait,", "So",
]
_COMMENT_TAILS = ["?", ".", "!", " again.", " at all.", ", right?", " this time."]
_FIRST = ["alex", "sam", "jordan", "casey", "riley", "morgan", "taylor", "jamie", "drew", "quinn", "avery", "blake"]
_SECOND = ["river", "stone", "hawk", "maple", "north", "lake", "fox", "pine", "cedar", "moon", "field", "ash"]

_SUB_TOPICS = {
    "worldnews": ["russia-ukraine", "israel-palestine", "international"],
    "politics": ["us-politics"],
    "news": ["us-politics", "international"],
    "InternationalNews": ["international", "russia-ukraine", "israel-palestine"],
    "UpliftingNews": ["uplifting"],
    "GlobalTalk": ["international", "israel-palestine", "russia-ukraine"],
}


def _id(rng: random.Random, used: set[str]) -> str:
    while True:
        s = "".join(rng.choice(ID_ALPHABET) for _ in range(6))
        if s not in used:
            used.add(s)
            return s


def _sentence(rng: random.Random, topic: str) -> str:
    subj = rng.choice(_SUBJECTS[topic])
    return f"{subj[0].upper()}{subj[1:]} {rng.choice(_VERBS)} {rng.choice(_OBJECTS)}."


def _comment(rng: random.Random, topic: str) -> str:
    subj = rng.choice(_SUBJECTS[topic])
    return f"{rng.choice(_COMMENT_OPENERS)} {subj} {rng.choice(_VERBS)} that{rng.choice(_COMMENT_TAILS)}"


def _heavy_tail(rng: random.Random, p_zero: float, scale: float) -> int:
    if rng.random() < p_zero:
        return 0
    return 1 + int(rng.paretovariate(1.6) * scale) - int(scale)


def make_corpus_records(n_accounts: int, seed: int = 0, days: int = CORPUS_DAYS) -> dict[str, list[dict[str, Any]]]:
    """Records for a long-tailed human corpus of ``n_accounts`` users."""
    rng = random.Random(seed)
    used: set[str] = set()
    start = day_start(CORPUS_FIRST_DAY)
    span = days * 86400
    accounts = []
    for i in range(n_accounts):
        name = f"{rng.choice(_FIRST)}_{rng.choice(_SECOND)}{rng.randrange(100)}"
        accounts.append({
            "id": _id(rng, used), "kind": "human", "screen_name": name,
            "created_at": start - rng.randrange(1, 2000) * 86400,
        })
    ids = [a["id"] for a in accounts]
    # each user sticks to a few subreddits
    homes = {u: rng.sample(SUBREDDITS, rng.choice([1, 1, 2, 2, 3, 4])) for u in ids}

    events: list[dict[str, Any]] = []
    posts: list[dict[str, Any]] = []
    for u in ids:
        for _ in range(_heavy_tail(rng, 0.3, 2.0)):
            sub = rng.choice(homes[u])
            topic = rng.choice(_SUB_TOPICS[sub])
            body = " ".join(_sentence(rng, topic) for _ in range(rng.randint(1, 3)))
            ev = {"event_id": _id(rng, used), "kind": "post", "actor": u, "subreddit": sub,
                  "timestamp": start + rng.randrange(span - 86400), "content": body, "_topic": topic}
            posts.append(ev)
    events.extend(posts)
    if posts:
        c1s = []
        for u in ids:
            for _ in range(_heavy_tail(rng, 0.25, 3.0)):
                p = rng.choice(posts)
                ts = p["timestamp"] + rng.randint(30, 6 * 3600)
                ev = {"event_id": _id(rng, used), "kind": "comment1", "actor": u, "subreddit": p["subreddit"],
                      "timestamp": ts, "parent": p["event_id"], "content": _comment(rng, p["_topic"]),
                      "_topic": p["_topic"]}
                c1s.append(ev)
        events.extend(c1s)
        if c1s:
            for u in ids:
                for _ in range(_heavy_tail(rng, 0.5, 1.5)):
                    c = rng.choice(c1s)
                    ts = c["timestamp"] + rng.randint(30, 3 * 3600)
                    events.append({"event_id": _id(rng, used), "kind": "comment2", "actor": u,
                                   "subreddit": c["subreddit"], "timestamp": ts, "parent": c["event_id"],
                                   "content": _comment(rng, c["_topic"])})
        for u in ids:
            liked: set[str] = set()
            for _ in range(rng.randint(0, 6)):
                p = rng.choice(posts)
                if p["event_id"] in liked:
                    continue
                liked.add(p["event_id"])
                events.append({"event_id": _id(rng, used), "kind": "like", "actor": u, "subreddit": p["subreddit"],
                               "timestamp": p["timestamp"] + rng.randint(10, 12 * 3600), "parent": p["event_id"]})
            if rng.random() < 0.2:
                p = rng.choice(posts)
                events.append({"event_id": _id(rng, used), "kind": "repost", "actor": u,
                               "subreddit": p["subreddit"], "timestamp": p["timestamp"] + rng.randint(60, 3600),
                               "parent": p["event_id"]})
    for e in events:
        e.pop("_topic", None)
    events.sort(key=lambda e: (e["timestamp"], e["event_id"]))

    knowledge = []
    for topic in ("russia-ukraine", "israel-palestine", "us-politics", "international"):
        for k in range(4):
            day = start + (k * days // 4 + rng.randrange(max(days // 4, 1))) * 86400
            text = " ".join(_sentence(rng, topic) for _ in range(2))
            knowledge.append({"topic": topic, "source": f"wire-{k + 1}",
                              "date": day_of(day), "text": f"Reports say {text[0].lower()}{text[1:]}",
                              "falsified": False})
    subreddits = [{"name": s, "description": _SUB_DESCRIPTIONS[s]} for s in SUBREDDITS]
    return {"accounts": accounts, "subreddits": subreddits, "knowledge": knowledge, "events": events}


def write_records(records: dict[str, list[dict[str, Any]]], directory: str | Path) -> Path:
    out = Path(directory)
    out.mkdir(parents=True, exist_ok=True)
    for name, rows in records.items():
        with open(out / f"{name}.jsonl", "w", encoding="utf-8", newline="\n") as fh:
            for row in rows:
                fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")
    return out


def make_corpus(n_accounts: int, directory: str | Path, seed: int = 0) -> Path:
    return write_records(make_corpus_records(n_accounts, seed), directory)


def toy_corpus_dir() -> Path:
    """Path of the bundled 30-account corpus."""
    return Path(str(resources.files("botsim") / "data" / "toy_corpus"))


def toy_goal() -> dict[str, Any]:
    """A small goal that fits the toy corpus window (2 bots, 11 contents)."""
    return {
        "n_agents": 2,
        "topic_quotas": {"russia-ukraine": 5},
        "preference_quota": 6,
        "window": ["2023-07-01", "2023-08-31"],
    }


# structure-only graph -------------------------------------------------------


def structure_only_graph(
    n: int = 300, bot_share: float = 0.4, n_features: int = 16, seed: int = 0,
    silent_share: float = 0.5, bot_to_bot: float = 0.1, comments_per_user: int = 3,
) -> dict[str, Any]:
    """A labelled graph whose only class signal is edge direction.

    Features are standard normal noise for everyone. Humans comment only on
    humans and about half never comment, bots always comment, mostly on
    humans. Nothing ever points from a human to a bot, so in-degree from
    bots vs. humans separates the classes until directions are shuffled.
    """
    # a stream distinct from the one split_users draws for the same seed
    rng = np.random.default_rng([seed, 1])
    n_bots = int(round(n * bot_share))
    labels = np.zeros(n, dtype=np.int64)
    labels[rng.permutation(n)[:n_bots]] = 1
    humans = np.flatnonzero(labels == 0)
    bots = np.flatnonzero(labels == 1)
    X = rng.standard_normal((n, n_features))
    pairs: dict[tuple[int, int, int], int] = {}
    for u in range(n):
        if labels[u] == 0:
            if rng.random() < silent_share:
                continue
            pool = humans
        k = int(rng.integers(1, 2 * comments_per_user))
        for _ in range(k):
            if labels[u] == 1:
                pool = bots if rng.random() < bot_to_bot else humans
            v = int(rng.choice(pool))
            if v == u:
                continue
            rel = int(rng.choice(3, p=[0.8, 0.08, 0.12]))
            pairs[(u, v, rel)] = pairs.get((u, v, rel), 0) + 1
    edges = [(u, v, rel, w) for (u, v, rel), w in sorted(pairs.items())]
    return {"X": X, "y": labels, "edges": edges}
