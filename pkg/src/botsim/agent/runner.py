"""The execution loop: create bots, plan, then perceive/decide/act per plan item."""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from botsim.agent.action_list import ACTIONS, Action
from botsim.agent.backend import Backend, DecisionRequest, DecisionResponse, Verdict, decide
from botsim.agent.knowledge import retrieve_knowledge, rewrite_knowledge
from botsim.agent.memory import retrieve_memory
from botsim.agent.planner import PREFERENCES, GoalTask, PlanItem, plan_goal
from botsim.agent.prompts import action_bindings, knowledge_text, numbered, profile_text, render_prompt, render_stream
from botsim.agent.roles import sample_role
from botsim.camouflage import (
    BotQuota,
    allocate_topics,
    compute_corpus_stats,
    fit_quotas_to_total,
    sample_bot_quotas,
    select_subreddits,
)
from botsim.env import (
    SECONDS_PER_DAY,
    Account,
    AccountKind,
    Environment,
    EventKind,
    InteractionEvent,
    KnowledgeItem,
    day_start,
    generate_unique_id,
)
from botsim.errors import ResponseParseError, ValidationError
from botsim.feed import DEFAULT_K, HOT_EPOCH, MessageStream, TimelineCursor, build_feed
from botsim.seeding import derive_seed
from botsim.text import token_set, topic_keywords
from botsim.agent.validate import DEFAULT_STEP_WINDOW, parse_and_validate

log = logging.getLogger(__name__)

TOPIC_DISPLAY = {
    "russia-ukraine": "the Russia-Ukraine war",
    "israel-palestine": "the Israeli-Palestinian conflict",
    "us-politics": "US politics",
    "international": "international news",
}


@dataclass
class SimConfig:
    feed_k: int = DEFAULT_K
    feed_epoch: int = HOT_EPOCH
    max_browse_retries: int = 5
    browse_step: int = 3600
    step_window: int = DEFAULT_STEP_WINDOW
    reasks: int = 1
    memory_n: int = 2
    knowledge_n: int = 3
    include_own: bool = True
    falsify_knowledge: bool = True
    demographics: dict[str, dict[str, float]] | None = None

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> SimConfig:
        known = {k: v for k, v in d.items() if k in cls.__dataclass_fields__}
        return cls(**known)


@dataclass
class RunResult:
    env: Environment
    log: list[dict[str, Any]]
    bots: list[str]
    plan: list[PlanItem]
    quotas: list[BotQuota] = field(default_factory=list)

    def log_text(self) -> str:
        return "".join(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n" for row in self.log)

    def write_log(self, path: str | Path) -> None:
        Path(path).write_text(self.log_text(), encoding="utf-8")

    def __iter__(self):
        # allows ``env, log = run_simulation(...)``
        return iter((self.env, self.log))


def _create_bots(env: Environment, goal: GoalTask, seed: int, config: SimConfig) -> list[str]:
    rng = random.Random(derive_seed("accounts", seed))
    created = day_start(goal.window[0])
    bots = []
    for j in range(goal.n_agents):
        role = sample_role(derive_seed("role", seed, j), config.demographics)
        bot_id = generate_unique_id("account", env.id_space(), rng)
        env.add_account(Account(bot_id, AccountKind.BOT, role.name, created, role))
        bots.append(bot_id)
    return bots


def _assign_topics(goal: GoalTask, n: int) -> list[str]:
    topics = [t for t in goal.topic_quotas if t != "international"]
    if not topics:
        return ["international"] * n
    weights = {t: goal.topic_quotas[t] for t in topics}
    if sum(weights.values()) == 0:
        weights = {t: 1 for t in topics}
    alloc = allocate_topics(n, weights)
    out = []
    for t in topics:
        out.extend([t] * alloc[t])
    return out


def prepare_quotas(
    env: Environment, goal: GoalTask, bots: list[str], seed: int, quotas: list[BotQuota] | None = None,
) -> list[BotQuota]:
    """Quotas for ``bots``: sampled from corpus statistics unless given."""
    if quotas is None:
        stats = compute_corpus_stats(env)
        quotas = sample_bot_quotas(stats, len(bots), goal.window, seed, agents=bots)
        quotas = fit_quotas_to_total(quotas, goal.total_actions)
    else:
        if len(quotas) != len(bots):
            raise ValueError("one quota per bot required")
        quotas = [BotQuota(**{**q.__dict__, "agent": b, "subreddits": list(q.subreddits)})
                  for q, b in zip(quotas, bots)]
    for q, topic in zip(quotas, _assign_topics(goal, len(bots))):
        if not q.event_topic:
            q.event_topic = topic
        if not q.subreddits:
            s = min(max(q.n_subreddits, 1), len(env.subreddits))
            q.subreddits = select_subreddits(env.accounts[q.agent], s, env)
    return quotas


def _stream_items(stream: MessageStream) -> list[dict[str, Any]]:
    items = []
    for e in stream.events():
        items.append({"id": e.event_id, "kind": e.kind.value, "time": e.timestamp, "text": e.content or ""})
    return items


def _human_comments(env: Environment, stream: MessageStream) -> list[str]:
    out = []
    for e in stream.events():
        if e.kind in (EventKind.COMMENT1, EventKind.COMMENT2) and env.accounts[e.actor].kind is AccountKind.HUMAN:
            out.append(e.content or "")
    return out


class _Runner:
    def __init__(self, env: Environment, goal: GoalTask, backend: Backend, seed: int, config: SimConfig):
        self.env = env
        self.goal = goal
        self.backend = backend
        self.seed = seed
        self.config = config
        self.log: list[dict[str, Any]] = []
        self.id_rng = random.Random(derive_seed("events", seed))
        self.cursors: dict[str, TimelineCursor] = {}
        self._falsified: dict[int, KnowledgeItem] = {}

    def knowledge_for(self, item: PlanItem, agent: Account) -> list[KnowledgeItem]:
        topic = item.topic
        if topic == PREFERENCES:
            topic = agent.profile.preference if agent.profile else "international"
        found = retrieve_knowledge(self.env, topic, item.date, self.config.knowledge_n)
        if item.topic == PREFERENCES or not self.config.falsify_knowledge:
            return found
        out = []
        for k in found:
            key = id(k)
            if key not in self._falsified:
                idx = self.env.knowledge.index(k)
                self._falsified[key] = rewrite_knowledge(self.backend, k, derive_seed("rewrite", self.seed, idx))
            out.append(self._falsified[key])
        return out

    def keywords_for(self, item: PlanItem) -> list[str]:
        # preference items cover any news in the agent's subreddits
        if item.topic == PREFERENCES:
            return []
        return sorted(topic_keywords(item.topic))

    def request(self, item: PlanItem, agent: Account, cursor: TimelineCursor, stream: MessageStream,
                attempt: int, note: str = "") -> DecisionRequest:
        env = self.env
        event_name = TOPIC_DISPLAY.get(item.topic, item.topic)
        if item.topic == PREFERENCES:
            event_name = agent.profile.preference if agent.profile else "the news"
        memory = retrieve_memory(env, agent.id, item.topic, self.config.memory_n)
        knowledge = self.knowledge_for(item, agent)
        human_comments = _human_comments(env, stream)
        rng = random.Random(derive_seed("example", self.seed, item.seq, cursor.now))
        example = rng.choice(human_comments) if human_comments else ""
        browse = render_stream(env, stream).rstrip("\n") if stream else ""
        bindings = {
            "Event": event_name,
            "UserName": json.dumps(agent.screen_name, ensure_ascii=False),
            "UserProfile": profile_text(agent),
            "BrowseContent": browse,
            "Knowledge": knowledge_text(knowledge),
            "HistoryPost": numbered("Post", [t for _, t in memory.history_posts]),
            "HistoryComment": numbered("Comment", [t for _, t in memory.history_comments]),
            **action_bindings(item.action, example),
        }
        prompt = render_prompt("decision", bindings)
        if note:
            prompt += f"\nYour previous response was rejected: {note}\n"
        schema = ACTIONS[item.action].expected_schema()
        return DecisionRequest(
            prompt=prompt,
            expected_schema=schema,
            seed=derive_seed("decide", self.seed, item.seq, attempt),
            bindings={
                "action": item.action.value,
                "level": item.level,
                "stream": _stream_items(stream),
                "keywords": self.keywords_for(item),
                "now": cursor.now,
                "window_end": env.time_window[1],
                "user": agent.screen_name,
                "knowledge": [k.text for k in knowledge],
                "comment_example": example,
                "note": note,
            },
        )

    def entry(self, item: PlanItem, cursor: TimelineCursor, **fields: Any) -> dict[str, Any]:
        row = {"seq": item.seq, "agent": item.agent, "action": item.action.value,
               "topic": item.topic, "date": item.date, "cursor": cursor.now}
        row.update(fields)
        self.log.append(row)
        return row

    def browse(self, item: PlanItem, cursor: TimelineCursor) -> bool:
        """Record a browse and advance the cursor; False when time runs out."""
        to = cursor.now + self.config.browse_step
        if to > self.env.time_window[1]:
            return False
        cursor.advance(to)
        sub = item.subreddits[0] if item.subreddits else sorted(self.env.subreddits)[0]
        e = InteractionEvent(generate_unique_id("event", self.env.id_space(), self.id_rng),
                             EventKind.BROWSE, item.agent, sub, cursor.now)
        self.env.apply(e)
        return True

    def execute(self, item: PlanItem) -> None:
        env, cfg = self.env, self.config
        agent = env.accounts[item.agent]
        cursor = self.cursors.setdefault(item.agent, TimelineCursor(item.agent, agent.created_at))
        cursor.plan_dates.append(item.date)
        t_rng = random.Random(derive_seed("time", self.seed, item.seq))
        planned = min(day_start(item.date) + t_rng.randrange(SECONDS_PER_DAY), env.time_window[1])
        cursor.advance(planned)
        subs = item.subreddits or sorted(env.subreddits)

        browses = 0
        seen: set[str] = set()
        while True:
            stream = build_feed(env, cursor, subs, cfg.feed_k, include_own=cfg.include_own,
                                epoch=cfg.feed_epoch, skip=seen)
            seen.update(p.post.event_id for p in stream.posts)
            note = ""
            for attempt in range(cfg.reasks + 1):
                req = self.request(item, agent, cursor, stream, attempt + 10 * browses, note)
                try:
                    resp = decide(self.backend, req)
                except ResponseParseError as exc:
                    note = str(exc)
                    self.entry(item, cursor, attempt=attempt, verdict="unparseable", error=note)
                    continue
                if resp.verdict is not Verdict.ACTION:
                    break
                try:
                    event = parse_and_validate(
                        resp, env, cursor, item.action, self.id_rng,
                        subreddit=self._post_subreddit(item, subs), level=item.level,
                        topic=item.topic, step_window=cfg.step_window,
                    )
                except ValidationError as exc:
                    note = f"{type(exc).__name__}: {exc}"
                    self.entry(item, cursor, attempt=attempt, verdict="invalid", error=note)
                    continue
                env.apply(event)
                self.entry(item, cursor, attempt=attempt, verdict="action",
                           event_id=event.event_id, kind=event.kind.value, parent=event.parent,
                           timestamp=event.timestamp)
                return
            else:
                self.entry(item, cursor, verdict="skipped", error=note)
                return

            if resp.verdict is Verdict.END:
                self.entry(item, cursor, verdict="end", empty=not stream)
                return
            if browses >= cfg.max_browse_retries or not self.browse(item, cursor):
                self.entry(item, cursor, verdict="end", forced=True, browses=browses)
                return
            browses += 1
            self.entry(item, cursor, verdict="continue_browsing", browses=browses)

    def _post_subreddit(self, item: PlanItem, subs: list[str]) -> str:
        rng = random.Random(derive_seed("subreddit", self.seed, item.seq))
        return rng.choice(sorted(subs))


def run_simulation(
    env: Environment,
    goal: GoalTask,
    backend: Backend,
    seed: int,
    config: SimConfig | None = None,
    quotas: list[BotQuota] | None = None,
) -> RunResult:
    """Run the full bot pipeline on a copy of ``env``.

    Creates ``goal.n_agents`` bots, derives their quotas and plan, then
    executes plan items in sequence order. Validation failures are re-asked
    once and then skipped; nothing inside the loop is fatal.
    """
    config = config or SimConfig()
    env = env.copy()
    bots = _create_bots(env, goal, seed, config)
    quotas = prepare_quotas(env, goal, bots, seed, quotas)
    plan = plan_goal(goal, quotas, seed)
    runner = _Runner(env, goal, backend, seed, config)
    for q in quotas:
        runner.entry(
            PlanItem(0, q.agent, Action.CREATE_USER, goal.window[0], q.event_topic),
            TimelineCursor(q.agent, env.accounts[q.agent].created_at),
            verdict="created", subreddits=q.subreddits, n_posts=q.n_posts, n_c1=q.n_c1, n_c2=q.n_c2,
        )
    for item in plan:
        runner.execute(item)
    return RunResult(env, runner.log, bots, plan, quotas)
