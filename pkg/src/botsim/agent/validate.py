"""Turn an accepted backend action into a checked :class:`InteractionEvent`."""

from __future__ import annotations

import random

from botsim.agent.action_list import Action
from botsim.agent.backend import DecisionResponse, Verdict
from botsim.env import (
    Environment,
    EventKind,
    InteractionEvent,
    generate_unique_id,
    parse_time,
)
from botsim.errors import ChronologyError, ReferentialError, RejectedEvent, TimeFormatError
from botsim.feed import TimelineCursor

DEFAULT_STEP_WINDOW = 86400

_TIME_FIELD = {
    Action.POST: "PostTime",
    Action.COMMENT: "CommentTime",
    Action.LIKE: "LikeTime",
    Action.REPOST: "RepostTime",
}
_KIND = {Action.LIKE: EventKind.LIKE, Action.REPOST: EventKind.REPOST}


def _timestamp(params: dict, key: str) -> int:
    value = params.get(key)
    if not isinstance(value, str):
        raise TimeFormatError(f"{key} must be a '%Y-%m-%d %H:%M:%S' string, got {value!r}")
    try:
        return parse_time(value.strip())
    except ValueError:
        raise TimeFormatError(f"{key}={value!r} does not match '%Y-%m-%d %H:%M:%S'") from None


def parse_and_validate(
    resp: DecisionResponse,
    env: Environment,
    cursor: TimelineCursor,
    action: Action,
    rng: random.Random,
    subreddit: str | None = None,
    level: int | None = None,
    topic: str | None = None,
    step_window: int = DEFAULT_STEP_WINDOW,
) -> InteractionEvent:
    """Check ids, time format and chronology; the event is *not* applied.

    The actor is always ``cursor.agent``. Posts go to ``subreddit``; replies,
    likes and reposts inherit the parent's subreddit.
    """
    if resp.verdict is not Verdict.ACTION:
        raise ValueError(f"cannot validate a {resp.verdict.value} verdict")
    if action not in _TIME_FIELD:
        raise ValueError(f"{action.value} does not produce an event")
    params = resp.params
    ts = _timestamp(params, _TIME_FIELD[action])
    agent = cursor.agent

    parent = None
    if action is Action.POST:
        if subreddit is None:
            raise ValueError("posts need a target subreddit")
        kind = EventKind.POST
        content = str(params.get("PostContent", "")).strip()
        if not content:
            raise ReferentialError("empty PostContent")
    else:
        pid = str(params.get("ID", "")).strip()
        parent = env.get(pid)
        if parent is None:
            raise ReferentialError(f"id {pid!r} does not exist")
        if parent.timestamp > cursor.now:
            raise ReferentialError(f"id {pid!r} was not visible at {cursor.now}")
        content = None
        if action is Action.COMMENT:
            if parent.kind is EventKind.POST:
                kind = EventKind.COMMENT1
            elif parent.kind is EventKind.COMMENT1:
                kind = EventKind.COMMENT2
            else:
                raise ReferentialError(f"cannot comment on {parent.kind.value} {pid!r}")
            if level is not None and kind is not (EventKind.COMMENT1 if level == 1 else EventKind.COMMENT2):
                raise ReferentialError(f"plan wants a level-{level} comment, {pid!r} is a {parent.kind.value}")
            content = str(params.get("CommentContent", "")).strip()
            if not content:
                raise ReferentialError("empty CommentContent")
        else:
            kind = _KIND[action]
            if parent.kind is not EventKind.POST:
                raise ReferentialError(f"{action.value} needs a post id, {pid!r} is a {parent.kind.value}")
        subreddit = parent.subreddit
        if ts <= parent.timestamp:
            raise ChronologyError(f"{_TIME_FIELD[action]} is not later than {pid!r}")

    if ts < cursor.now - step_window:
        raise ChronologyError(f"{_TIME_FIELD[action]} precedes the browsing time by more than {step_window}s")
    lo, hi = env.time_window
    if not lo <= ts <= hi:
        raise ChronologyError(f"{_TIME_FIELD[action]} outside the environment window")
    if ts < env.accounts[agent].created_at:
        raise ChronologyError(f"{_TIME_FIELD[action]} precedes creation of {agent}")

    event = InteractionEvent(
        event_id=generate_unique_id("event", env.id_space(), rng),
        kind=kind,
        actor=agent,
        subreddit=subreddit,
        timestamp=ts,
        parent=parent.event_id if parent else None,
        content=content,
        topic=topic if kind in (EventKind.POST, EventKind.COMMENT1, EventKind.COMMENT2) else None,
    )
    try:
        env.check(event)
    except RejectedEvent as exc:
        if exc.reason == "chronology":
            raise ChronologyError(str(exc)) from None
        raise ReferentialError(str(exc)) from None
    return event
