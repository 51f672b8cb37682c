"""Deterministic goal-task planner.

Splits each bot's quota into dated plan items. 30% of every bot's content
(rounded up) goes to its event topic; the rest is tagged ``Preferences``.
"""

from __future__ import annotations

import math
import random
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

from botsim.agent.action_list import Action
from botsim.camouflage import BotQuota, _shift_day, window_days
from botsim.env import day_start
from botsim.errors import PlanningError

PREFERENCES = "Preferences"


@dataclass
class GoalTask:
    n_agents: int
    topic_quotas: dict[str, int]
    preference_quota: int
    window: tuple[str, str]
    total_actions: int = -1

    def __post_init__(self) -> None:
        expected = sum(self.topic_quotas.values()) + self.preference_quota
        if self.total_actions < 0:
            self.total_actions = expected
        elif self.total_actions != expected:
            raise PlanningError(
                f"total_actions={self.total_actions} but topic + preference quotas sum to {expected}"
            )
        if day_start(self.window[0]) > day_start(self.window[1]):
            raise PlanningError(f"goal window {self.window} is reversed")

    @classmethod
    def from_dict(cls, d: Mapping) -> GoalTask:
        return cls(
            n_agents=int(d["n_agents"]),
            topic_quotas={k: int(v) for k, v in d.get("topic_quotas", {}).items()},
            preference_quota=int(d.get("preference_quota", 0)),
            window=(d["window"][0], d["window"][1]),
            total_actions=int(d.get("total_actions", -1)),
        )

    def to_dict(self) -> dict:
        return {
            "n_agents": self.n_agents,
            "topic_quotas": dict(self.topic_quotas),
            "preference_quota": self.preference_quota,
            "window": list(self.window),
            "total_actions": self.total_actions,
        }


@dataclass
class PlanItem:
    seq: int
    agent: str
    action: Action
    date: str
    topic: str
    # 1 or 2 for comments
    level: int | None = None
    subreddits: list[str] = field(default_factory=list)

    def as_row(self) -> list[str]:
        return [str(self.seq), self.agent, self.action.value, self.date, self.topic]


def event_share(n_contents: int) -> int:
    """ceil(0.3 * n) in exact integer arithmetic."""
    return (3 * n_contents + 9) // 10


def plan_goal(goal: GoalTask, quotas: Sequence[BotQuota], seed: int = 0) -> list[PlanItem]:
    if len(quotas) != goal.n_agents:
        raise PlanningError(f"{len(quotas)} quotas for {goal.n_agents} agents")
    total = sum(q.total for q in quotas)
    if total != goal.total_actions:
        raise PlanningError(f"quotas add up to {total} actions, goal asks for {goal.total_actions}")
    g_lo, g_hi = day_start(goal.window[0]), day_start(goal.window[1])

    staged: list[tuple[str, int, int, PlanItem]] = []
    for a_idx, q in enumerate(quotas):
        lo, hi = day_start(q.active_window[0]), day_start(q.active_window[1])
        if lo < g_lo or hi > g_hi:
            raise PlanningError(f"agent {q.agent}: active window {q.active_window} outside goal window {goal.window}")
        if q.total and window_days(q.active_window) / q.interval_days < q.total - 1e-9:
            raise PlanningError(
                f"agent {q.agent}: {q.total} actions every {q.interval_days:g} days "
                f"do not fit in {window_days(q.active_window)} days"
            )
        actions: list[tuple[Action, int | None]] = (
            [(Action.POST, None)] * q.n_posts
            + [(Action.COMMENT, 1)] * q.n_c1
            + [(Action.COMMENT, 2)] * q.n_c2
            + [(Action.LIKE, None)] * q.n_likes
            + [(Action.REPOST, None)] * q.n_reposts
        )
        rng = random.Random(f"{seed}:{a_idx}")
        rng.shuffle(actions)
        on_event = set(rng.sample(range(len(actions)), event_share(len(actions))))
        for j, (action, level) in enumerate(actions):
            offset = min(math.floor(j * q.interval_days + 1e-9), window_days(q.active_window) - 1)
            date = _shift_day(q.active_window[0], offset)
            topic = q.event_topic if j in on_event else PREFERENCES
            item = PlanItem(0, q.agent, action, date, topic, level, list(q.subreddits))
            staged.append((date, a_idx, j, item))

    staged.sort(key=lambda row: row[:3])
    plan = []
    for seq, (_, _, _, item) in enumerate(staged, 1):
        item.seq = seq
        plan.append(item)
    return plan
