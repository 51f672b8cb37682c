from __future__ import annotations

from pathlib import Path

import pytest

from botsim.env import Account, AccountKind, Environment, EventKind, InteractionEvent, KnowledgeItem, RoleSpec, \
    Subreddit, parse_time
from botsim.feed import TimelineCursor, build_feed

GOLDEN = Path(__file__).parent / "golden"
SUB = "news"
CREATED = parse_time("2024-01-01 00:00:00")

TIME_KNOWLEDGE = (
    "In scientific theory, the concept of time dimension does not appear out of thin air, but through rigorous "
    "theoretical derivation and experimental verification. Special relativity explicitly states that time is not "
    "only a coordinate but also a dimension, with the same status as the spatial dimension."
)


def golden(name: str) -> str:
    return (GOLDEN / name).read_text(encoding="utf-8")


def human(acc_id: str, name: str, created: int = CREATED) -> Account:
    return Account(acc_id, AccountKind.HUMAN, name, created)


def ev(eid, kind, actor, ts, parent=None, content=None, sub=SUB, topic=None) -> InteractionEvent:
    t = parse_time(ts) if isinstance(ts, str) else ts
    return InteractionEvent(eid, EventKind(kind), actor, sub, t, parent, content, topic)


def emma_profile() -> RoleSpec:
    return RoleSpec(28, "female", "undergraduate", "US politics", "American, New York City",
                    "Stay informed, stay curious.", name="Emma Nguyen")


def worked_env() -> Environment:
    """Two posts with the like, repost and comment counts of the worked feed example."""
    accounts = [
        human("antoni", "Antonio Rossi"), human("nikola", "Nikolai Ivanov"), human("sean00", "Sean"),
        human("swankp", "SWANKPIE"), human("rahman", "Rahman"),
        Account("emma00", AccountKind.BOT, "Emma Nguyen", CREATED, emma_profile()),
    ]
    likers = [human(f"lk{i:04d}", f"liker{i}") for i in range(205)]
    env = Environment(accounts + likers, [Subreddit(s) for s in ("news", "worldnews")],
                      [KnowledgeItem("time", "wire", "2024-05-20", TIME_KNOWLEDGE)])
    env.apply(ev("kjlp34", "post", "antoni", "2024-05-21 06:17:05",
                 content="92 year -year-old big brother says goodbye to his younger brother"))
    env.apply(ev("kjlo90", "post", "antoni", "2024-05-21 06:21:03",
                 content="BREAKING: Marketing Consultant Refreshing Browser Every 30 Seconds To See If Someone, "
                         "Anyone Signed Up For Her Upcoming Webinar"))
    env.apply(ev("90rtyi", "comment1", "sean00", "2024-05-21 06:19:24", "kjlp34", "Time goes by so fast"))
    env.apply(ev("67hjyi", "comment1", "swankp", "2024-05-21 06:23:54", "kjlp34", "Brothers for life is very real"))
    env.apply(ev("12rtik", "comment1", "nikola", "2024-05-21 07:11:13", "kjlo90",
                 "Only every 30 seconds? She needs to level up her game..."))
    env.apply(ev("rp0001", "repost", "rahman", "2024-05-21 06:40:00", "kjlp34"))
    base = parse_time("2024-05-21 06:30:00")
    for i, acc in enumerate(likers):
        env.apply(ev(f"la{i:04d}", "like", acc.id, base + i, "kjlo90"))
        env.apply(ev(f"lb{i:04d}", "like", acc.id, base + i, "kjlp34"))
    return env


WORKED_NOW = parse_time("2024-05-21 07:30:00")


def worked_stream(env: Environment):
    return build_feed(env, TimelineCursor("emma00", WORKED_NOW), ["news"], k=2)


# labelled accounts for the text-only evaluation ------------------------------------------

def labelled_env(n_each: int = 10) -> Environment:
    accs = [Account(f"h{i:05d}", AccountKind.HUMAN, f"human{i}", CREATED) for i in range(n_each)]
    accs += [Account(f"b{i:05d}", AccountKind.BOT, f"bot{i}", CREATED) for i in range(n_each)]
    env = Environment(accs, [Subreddit("news")])
    for i, a in enumerate(accs):
        env.apply(ev(f"p{i:05d}", "post", a.id, CREATED + 10 + i, content=f"{a.screen_name} writes about item {i}"))
    return env


class OracleBackend:
    def __init__(self, env: Environment):
        self.env = env

    def complete(self, req):
        return "bot" if self.env.accounts[req.bindings["user"]].kind is AccountKind.BOT else "human"


class ConstantBackend:
    def __init__(self, answer: str):
        self.answer = answer
        self.calls = 0

    def complete(self, req):
        self.calls += 1
        return self.answer


EVAL_USERS = [f"h{i:05d}" for i in range(5)] + [f"b{i:05d}" for i in range(5)]


# acceptance reporting -------------------------------------------------------------------

_criteria: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or not (rep.when == "call" or rep.failed):
        return
    number, title = mark.args
    entry = _criteria.setdefault(number, [title, []])
    if rep.failed:
        entry[1].append(item.name)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, failed = _criteria[number]
        status = "FAIL" if failed else "PASS"
        extra = f"  ({', '.join(failed)})" if failed else ""
        terminalreporter.write_line(f"criterion {number:2d} {status}  {title}{extra}")
