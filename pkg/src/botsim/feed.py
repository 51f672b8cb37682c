"""Dual-filter message feed: timeline cut-off, then hot-score ranking."""

from __future__ import annotations

import heapq
import math
from collections.abc import Collection, Sequence
from dataclasses import dataclass, field

from botsim.env import CORPUS_START, Environment, EventKind, InteractionEvent

HOT_EPOCH = CORPUS_START
HOT_SECONDS = 45000
DEFAULT_K = 2


def hot_score(post: InteractionEvent, like_count: int, epoch: int = HOT_EPOCH) -> float:
    """``log10(max(likes, 1)) + (timestamp - epoch) / 45000``.

    Likes are the only popularity signal, so the archival formula's sign
    term is always +1.
    """
    if post.kind is not EventKind.POST:
        raise ValueError(f"hot_score needs a post, got {post.kind.value}")
    return math.log10(max(like_count, 1)) + (post.timestamp - epoch) / HOT_SECONDS


@dataclass
class TimelineCursor:
    agent: str
    now: int
    plan_dates: list[str] = field(default_factory=list)

    def advance(self, to: int) -> None:
        # never moves backwards
        self.now = max(self.now, int(to))


@dataclass(frozen=True)
class FeedComment:
    comment: InteractionEvent
    replies: tuple[InteractionEvent, ...] = ()


@dataclass(frozen=True)
class FeedPost:
    post: InteractionEvent
    like_count: int
    repost_count: int
    reposters: tuple[str, ...]
    comments: tuple[FeedComment, ...]
    score: float


@dataclass(frozen=True)
class MessageStream:
    posts: tuple[FeedPost, ...]
    generated_at: int

    def __bool__(self) -> bool:
        return bool(self.posts)

    def __len__(self) -> int:
        return len(self.posts)

    def events(self) -> list[InteractionEvent]:
        out = []
        for fp in self.posts:
            out.append(fp.post)
            for fc in fp.comments:
                out.append(fc.comment)
                out.extend(fc.replies)
        return out

    def ids(self) -> set[str]:
        return {e.event_id for e in self.events()}


def rank_posts(
    env: Environment, now: int, subreddits: Sequence[str], k: int,
    exclude_actor: str | None = None, epoch: int = HOT_EPOCH, skip: Collection[str] = (),
) -> list[tuple[float, str]]:
    """Top-``k`` ``(score, post id)`` among posts visible at ``now``, ignoring ``skip``.

    Posts are scanned newest first; the scan stops once even the most-liked
    post in the environment could not beat the current k-th score.
    """
    bound_pop = math.log10(max(env.max_like_count, 1))
    streams = [env.iter_posts_desc(sub, at=now) for sub in sorted(set(subreddits))]
    merged = heapq.merge(*streams, reverse=True)
    best: list[tuple[float, str]] = []
    for ts, pid in merged:
        if len(best) >= k:
            kth = best[-1][0]
            if bound_pop + (ts - epoch) / HOT_SECONDS < kth:
                break
        if pid in skip:
            continue
        post = env.get(pid)
        if exclude_actor is not None and post.actor == exclude_actor:
            continue
        score = hot_score(post, env.like_count(pid, at=now), epoch)
        best.append((score, pid))
        best.sort(key=lambda item: (-item[0], item[1]))
        del best[k:]
    return best


def build_feed(
    env: Environment,
    cursor: TimelineCursor,
    subreddits: Sequence[str],
    k: int = DEFAULT_K,
    include_own: bool = True,
    epoch: int = HOT_EPOCH,
    skip: Collection[str] = (),
) -> MessageStream:
    """The top-``k`` hot posts at ``cursor.now`` with their visible replies.

    ``skip`` holds post ids already shown in this browsing session, so a
    "Continue browsing" verdict pages further down the ranking.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not subreddits:
        raise ValueError("subreddits must be non-empty")
    now = cursor.now
    ranked = rank_posts(env, now, subreddits, k, None if include_own else cursor.agent, epoch, skip)
    posts = []
    for score, pid in ranked:
        post = env.get(pid)
        comments = tuple(
            FeedComment(c, tuple(env.replies(c.event_id, at=now)))
            for c in env.replies(pid, at=now)
        )
        reposters = tuple(env.accounts[a].screen_name for a in env.reposters(pid, at=now))
        posts.append(
            FeedPost(
                post=post,
                like_count=env.like_count(pid, at=now),
                repost_count=env.repost_count(pid, at=now),
                reposters=reposters,
                comments=comments,
                score=score,
            )
        )
    return MessageStream(tuple(posts), now)
