"""Social-environment state: accounts, subreddits, the event log, persistence.

All mutation goes through :meth:`Environment.apply` (or the module-level
:func:`apply_event`), which enforces the interaction invariants and keeps the
per-post counters in sync with the log.
"""

from __future__ import annotations

import bisect
import copy
import json
import random
import re
from collections.abc import Iterable, Iterator
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any

from botsim.errors import IntegrityError, ParseError, RejectedEvent

SUBREDDITS = (
    "worldnews",
    "politics",
    "news",
    "InternationalNews",
    "UpliftingNews",
    "GlobalTalk",
)

# 2023-06-20T00:00:00Z .. 2024-06-19T23:59:59Z
CORPUS_START = 1687219200
CORPUS_END = 1718841599
DEFAULT_WINDOW = (CORPUS_START, CORPUS_END)

TIME_FORMAT = "%Y-%m-%d %H:%M:%S"
DAY_FORMAT = "%Y-%m-%d"
SECONDS_PER_DAY = 86400
# sorts after any event id; used as the upper bisect sentinel
_MAX_ID = "\U0010ffff"

ID_ALPHABET = "0123456789abcdefghijklmnopqrstuvwxyz"
ID_LENGTH = 6

TOPICS = ("russia-ukraine", "israel-palestine", "us-politics", "international")
GENDERS = ("male", "female")
EDUCATION_LEVELS = ("below-HS", "HS", "undergraduate", "master", "doctoral")
IDEOLOGIES = ("conservative", "moderate", "liberal")


class AccountKind(str, Enum):
    HUMAN = "human"
    BOT = "bot"


class EventKind(str, Enum):
    POST = "post"
    COMMENT1 = "comment1"
    COMMENT2 = "comment2"
    LIKE = "like"
    REPOST = "repost"
    BROWSE = "browse"


CONTENT_KINDS = (EventKind.POST, EventKind.COMMENT1, EventKind.COMMENT2)
# kind -> required parent kind
PARENT_KIND = {
    EventKind.COMMENT1: EventKind.POST,
    EventKind.COMMENT2: EventKind.COMMENT1,
    EventKind.LIKE: EventKind.POST,
    EventKind.REPOST: EventKind.POST,
}


def format_time(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime(TIME_FORMAT)


def parse_time(text: str) -> int:
    """Parse ``%Y-%m-%d %H:%M:%S`` (interpreted as UTC) to integer seconds."""
    dt = datetime.strptime(text, TIME_FORMAT).replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def day_start(day: str) -> int:
    dt = datetime.strptime(day, DAY_FORMAT).replace(tzinfo=timezone.utc)
    return int(dt.timestamp())


def day_of(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime(DAY_FORMAT)


@dataclass(frozen=True)
class RoleSpec:
    age: int
    gender: str
    education: str
    preference: str
    region: str
    description: str
    name: str = ""
    ideology: str | None = None

    def __post_init__(self) -> None:
        if not 13 <= self.age <= 99:
            raise ValueError(f"age {self.age} outside [13, 99]")
        if self.gender not in GENDERS:
            raise ValueError(f"unknown gender {self.gender!r}")
        if self.education not in EDUCATION_LEVELS:
            raise ValueError(f"unknown education level {self.education!r}")
        if self.ideology is not None and self.ideology not in IDEOLOGIES:
            raise ValueError(f"unknown ideology {self.ideology!r}")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class Account:
    id: str
    kind: AccountKind
    screen_name: str
    created_at: int
    profile: RoleSpec | None = None

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "id": self.id,
            "kind": self.kind.value,
            "screen_name": self.screen_name,
            "created_at": self.created_at,
        }
        if self.profile is not None:
            d["profile"] = self.profile.to_dict()
        return d


@dataclass(frozen=True)
class InteractionEvent:
    event_id: str
    kind: EventKind
    actor: str
    subreddit: str
    timestamp: int
    parent: str | None = None
    content: str | None = None
    # topic tag for memory retrieval; set on agent-authored content only
    topic: str | None = None

    @property
    def sort_key(self) -> tuple[int, str]:
        return (self.timestamp, self.event_id)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "event_id": self.event_id,
            "kind": self.kind.value,
            "actor": self.actor,
            "subreddit": self.subreddit,
            "timestamp": self.timestamp,
        }
        if self.parent is not None:
            d["parent"] = self.parent
        if self.content is not None:
            d["content"] = self.content
        if self.topic is not None:
            d["topic"] = self.topic
        return d


@dataclass(frozen=True)
class KnowledgeItem:
    topic: str
    source: str
    date: str
    text: str
    falsified: bool = False

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class Subreddit:
    name: str
    description: str = ""


@dataclass
class IngestConfig:
    subreddits: tuple[str, ...] = SUBREDDITS
    time_window: tuple[int, int] = DEFAULT_WINDOW
    clean: bool = True


_MD_LINK = re.compile(r"\[([^\]]*)\]\([^)]*\)")
_URL = re.compile(r"\b[A-Za-z][A-Za-z0-9+.-]*://\S+")
_ZERO_WIDTH = re.compile("[\u200b\u200c\u200d\u2060\ufeff]")


def clean_text(text: str) -> str:
    """Drop markdown link syntax (keeping the label), URLs and zero-width chars.

    Surrounding whitespace is left untouched: ``"see https://x.y now"``
    becomes ``"see  now"``.
    """
    text = _MD_LINK.sub(r"\1", text)
    text = _URL.sub("", text)
    return _ZERO_WIDTH.sub("", text)


def generate_unique_id(kind: str, existing: Iterable[str] | set[str], rng: random.Random) -> str:
    """Draw 6-char base-36 ids from ``rng`` until one is not in ``existing``."""
    if kind not in ("event", "account"):
        raise ValueError(f"unknown id kind {kind!r}")
    taken = existing if isinstance(existing, (set, frozenset, dict)) else set(existing)
    while True:
        candidate = "".join(rng.choice(ID_ALPHABET) for _ in range(ID_LENGTH))
        if candidate not in taken:
            return candidate


class Environment:
    """Mutable environment snapshot with an ordered, append-only event log."""

    def __init__(
        self,
        accounts: Iterable[Account] = (),
        subreddits: Iterable[Subreddit] = (),
        knowledge: Iterable[KnowledgeItem] = (),
        time_window: tuple[int, int] = DEFAULT_WINDOW,
    ):
        self.time_window = (int(time_window[0]), int(time_window[1]))
        self.accounts: dict[str, Account] = {}
        self.subreddits: dict[str, Subreddit] = {s.name: s for s in subreddits}
        self.knowledge: list[KnowledgeItem] = list(knowledge)
        self._events: list[InteractionEvent] = []
        self._keys: list[tuple[int, str]] = []
        self._by_id: dict[str, InteractionEvent] = {}
        # post id -> sorted [(ts, actor)]
        self._likes: dict[str, list[tuple[int, str]]] = {}
        self._reposts: dict[str, list[tuple[int, str]]] = {}
        # parent id -> sorted [(ts, child id)] for comments
        self._replies: dict[str, list[tuple[int, str]]] = {}
        self._authored: dict[str, list[str]] = {}
        # subreddit -> sorted [(ts, post id)]
        self._posts_by_sub: dict[str, list[tuple[int, str]]] = {}
        self.max_like_count = 0
        for acc in accounts:
            self.add_account(acc)

    # accounts -----------------------------------------------------------

    def add_account(self, account: Account) -> None:
        if account.id in self.accounts:
            raise IntegrityError(f"duplicate account id {account.id!r}")
        self.accounts[account.id] = account

    def humans(self) -> list[Account]:
        return [a for a in self.accounts.values() if a.kind is AccountKind.HUMAN]

    def bots(self) -> list[Account]:
        return [a for a in self.accounts.values() if a.kind is AccountKind.BOT]

    def id_space(self) -> set[str]:
        """Every id in use; account and event ids share one namespace."""
        return set(self.accounts) | set(self._by_id)

    # events -------------------------------------------------------------

    @property
    def events(self) -> list[InteractionEvent]:
        return list(self._events)

    def __len__(self) -> int:
        return len(self._events)

    def get(self, event_id: str) -> InteractionEvent | None:
        return self._by_id.get(event_id)

    def __contains__(self, event_id: str) -> bool:
        return event_id in self._by_id

    def events_by(self, actor: str) -> list[InteractionEvent]:
        return [self._by_id[i] for i in self._authored.get(actor, ())]

    def posts(self) -> list[InteractionEvent]:
        return [e for e in self._events if e.kind is EventKind.POST]

    def posts_in(self, subreddit: str, at: int | None = None) -> list[tuple[int, str]]:
        """``(timestamp, post id)`` pairs in ``subreddit``, oldest first."""
        rows = self._posts_by_sub.get(subreddit, [])
        return rows[: self._count(rows, at)]

    def iter_posts_desc(self, subreddit: str, at: int | None = None) -> Iterator[tuple[int, str]]:
        rows = self._posts_by_sub.get(subreddit, [])
        for i in range(self._count(rows, at) - 1, -1, -1):
            yield rows[i]

    def replies(self, parent: str, at: int | None = None) -> list[InteractionEvent]:
        rows = self._replies.get(parent, [])
        if at is not None:
            rows = rows[: bisect.bisect_right(rows, (at, _MAX_ID))]
        return [self._by_id[i] for _, i in rows]

    @staticmethod
    def _count(rows: list[tuple[int, str]], at: int | None) -> int:
        if at is None:
            return len(rows)
        return bisect.bisect_right(rows, (at, _MAX_ID))

    def like_count(self, post_id: str, at: int | None = None) -> int:
        return self._count(self._likes.get(post_id, []), at)

    def repost_count(self, post_id: str, at: int | None = None) -> int:
        return self._count(self._reposts.get(post_id, []), at)

    def comment_count(self, event_id: str, at: int | None = None) -> int:
        return self._count(self._replies.get(event_id, []), at)

    def reposters(self, post_id: str, at: int | None = None) -> list[str]:
        rows = self._reposts.get(post_id, [])
        return [actor for _, actor in rows[: self._count(rows, at)]]

    def root_post(self, event: InteractionEvent) -> InteractionEvent:
        while event.kind is not EventKind.POST:
            assert event.parent is not None
            event = self._by_id[event.parent]
        return event

    def check(self, e: InteractionEvent) -> None:
        """Raise :class:`RejectedEvent` if ``e`` cannot be appended."""
        if e.event_id in self._by_id:
            raise RejectedEvent("duplicate-id", e.event_id)
        actor = self.accounts.get(e.actor)
        if actor is None:
            raise RejectedEvent("unknown-actor", e.actor)
        if e.subreddit not in self.subreddits:
            raise RejectedEvent("unknown-subreddit", e.subreddit)
        lo, hi = self.time_window
        if not lo <= e.timestamp <= hi:
            raise RejectedEvent("out-of-window", f"{e.event_id} at {e.timestamp}")
        if e.timestamp < actor.created_at:
            raise RejectedEvent("chronology", f"{e.event_id} precedes creation of {e.actor}")
        has_content = e.kind in CONTENT_KINDS
        if has_content and e.content is None:
            raise RejectedEvent("malformed", f"{e.kind.value} {e.event_id} has no content")
        if not has_content and e.content is not None:
            raise RejectedEvent("malformed", f"{e.kind.value} {e.event_id} carries content")

        want = PARENT_KIND.get(e.kind)
        if want is None:
            if e.parent is not None:
                raise RejectedEvent("level", f"{e.kind.value} {e.event_id} must not have a parent")
            return
        if e.parent is None:
            raise RejectedEvent("level", f"{e.kind.value} {e.event_id} needs a parent")
        parent = self._by_id.get(e.parent)
        if parent is None:
            raise RejectedEvent("unknown-parent", e.parent)
        if parent.kind is not want:
            raise RejectedEvent(
                "level", f"{e.kind.value} {e.event_id} targets {parent.kind.value} {parent.event_id}"
            )
        if parent.subreddit != e.subreddit:
            raise RejectedEvent("subreddit-mismatch", f"{e.event_id} vs parent {parent.event_id}")
        if e.timestamp <= parent.timestamp:
            raise RejectedEvent("chronology", f"{e.event_id} not after parent {parent.event_id}")
        if e.kind is EventKind.LIKE and any(a == e.actor for _, a in self._likes.get(parent.event_id, ())):
            raise RejectedEvent("duplicate-like", f"{e.actor} on {parent.event_id}")
        if e.kind is EventKind.REPOST and any(a == e.actor for _, a in self._reposts.get(parent.event_id, ())):
            raise RejectedEvent("duplicate-repost", f"{e.actor} on {parent.event_id}")

    def apply(self, e: InteractionEvent) -> Environment:
        self.check(e)
        key = e.sort_key
        pos = bisect.bisect_right(self._keys, key)
        self._keys.insert(pos, key)
        self._events.insert(pos, e)
        self._by_id[e.event_id] = e
        self._authored.setdefault(e.actor, []).append(e.event_id)
        if e.kind is EventKind.POST:
            bisect.insort(self._posts_by_sub.setdefault(e.subreddit, []), key)
        elif e.kind is EventKind.LIKE:
            likes = self._likes.setdefault(e.parent, [])
            bisect.insort(likes, (e.timestamp, e.actor))
            self.max_like_count = max(self.max_like_count, len(likes))
        elif e.kind is EventKind.REPOST:
            bisect.insort(self._reposts.setdefault(e.parent, []), (e.timestamp, e.actor))
        elif e.kind in (EventKind.COMMENT1, EventKind.COMMENT2):
            bisect.insort(self._replies.setdefault(e.parent, []), (e.timestamp, e.event_id))
        return self

    def copy(self) -> Environment:
        return copy.deepcopy(self)

    # comparison / persistence --------------------------------------------

    def to_records(self) -> dict[str, list[dict[str, Any]]]:
        return {
            "accounts": [self.accounts[k].to_dict() for k in sorted(self.accounts)],
            "events": [e.to_dict() for e in self._events],
            "subreddits": [
                {"name": s.name, "description": s.description}
                for s in sorted(self.subreddits.values(), key=lambda s: s.name)
            ],
            "knowledge": [k.to_dict() for k in self.knowledge],
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Environment):
            return NotImplemented
        return self.time_window == other.time_window and self.to_records() == other.to_records()

    __hash__ = None  # type: ignore[assignment]

    def save(self, directory: str | Path, seed: int | None = None) -> Path:
        """Write the snapshot in the ingestion schema plus ``manifest.json``."""
        out = Path(directory)
        out.mkdir(parents=True, exist_ok=True)
        records = self.to_records()
        for name, rows in records.items():
            with open(out / f"{name}.jsonl", "w", encoding="utf-8", newline="\n") as fh:
                for row in rows:
                    fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")
        manifest = {
            "time_window": list(self.time_window),
            "counts": {name: len(rows) for name, rows in records.items()},
            "seed": seed,
        }
        (out / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
        return out


def apply_event(env: Environment, e: InteractionEvent) -> Environment:
    return env.apply(e)


# ingestion ---------------------------------------------------------------


def _read_jsonl(path: Path) -> list[tuple[int, dict[str, Any]]]:
    if not path.exists():
        return []
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(str(path), lineno, f"invalid JSON ({exc.msg})") from None
            if not isinstance(obj, dict):
                raise ParseError(str(path), lineno, "record is not an object")
            rows.append((lineno, obj))
    return rows


def _require(obj: dict[str, Any], key: str, path: Path, lineno: int) -> Any:
    if key not in obj:
        raise ParseError(str(path), lineno, f"missing field {key!r}")
    return obj[key]


def _timestamp(value: Any, path: Path, lineno: int) -> int:
    if isinstance(value, bool):
        raise ParseError(str(path), lineno, f"bad timestamp {value!r}")
    if isinstance(value, int):
        return value
    if isinstance(value, str):
        try:
            return parse_time(value)
        except ValueError:
            pass
    raise ParseError(str(path), lineno, f"bad timestamp {value!r}")


def _parse_account(obj: dict[str, Any], path: Path, lineno: int) -> Account:
    try:
        kind = AccountKind(_require(obj, "kind", path, lineno))
    except ValueError:
        raise ParseError(str(path), lineno, f"bad account kind {obj['kind']!r}") from None
    profile = None
    if obj.get("profile") is not None:
        try:
            profile = RoleSpec(**obj["profile"])
        except (TypeError, ValueError) as exc:
            raise ParseError(str(path), lineno, f"bad profile ({exc})") from None
    return Account(
        id=str(_require(obj, "id", path, lineno)),
        kind=kind,
        screen_name=str(_require(obj, "screen_name", path, lineno)),
        created_at=_timestamp(_require(obj, "created_at", path, lineno), path, lineno),
        profile=profile,
    )


def _parse_event(obj: dict[str, Any], path: Path, lineno: int, clean: bool) -> InteractionEvent:
    try:
        kind = EventKind(_require(obj, "kind", path, lineno))
    except ValueError:
        raise ParseError(str(path), lineno, f"bad event kind {obj['kind']!r}") from None
    content = obj.get("content")
    if content is not None:
        if not isinstance(content, str):
            raise ParseError(str(path), lineno, "content must be a string")
        if clean:
            content = clean_text(content)
    return InteractionEvent(
        event_id=str(_require(obj, "event_id", path, lineno)),
        kind=kind,
        actor=str(_require(obj, "actor", path, lineno)),
        subreddit=str(_require(obj, "subreddit", path, lineno)),
        timestamp=_timestamp(_require(obj, "timestamp", path, lineno), path, lineno),
        parent=obj.get("parent"),
        content=content,
        topic=obj.get("topic"),
    )


def ingest_human_corpus(path: str | Path, config: IngestConfig | None = None) -> Environment:
    """Load a JSONL corpus directory into a validated :class:`Environment`.

    Events outside the configured subreddits or time window are dropped
    together with everything that replies to them.
    """
    config = config or IngestConfig()
    root = Path(path)
    if not root.is_dir():
        raise IntegrityError(f"corpus directory {root} does not exist")

    accounts_path = root / "accounts.jsonl"
    accounts = [_parse_account(o, accounts_path, n) for n, o in _read_jsonl(accounts_path)]

    sub_path = root / "subreddits.jsonl"
    described = {}
    for n, o in _read_jsonl(sub_path):
        name = str(_require(o, "name", sub_path, n))
        described[name] = str(o.get("description", ""))
    subreddits = [Subreddit(name, described.get(name, "")) for name in config.subreddits]

    know_path = root / "knowledge.jsonl"
    knowledge = []
    for n, o in _read_jsonl(know_path):
        knowledge.append(
            KnowledgeItem(
                topic=str(_require(o, "topic", know_path, n)),
                source=str(_require(o, "source", know_path, n)),
                date=str(_require(o, "date", know_path, n)),
                text=clean_text(str(_require(o, "text", know_path, n))) if config.clean
                else str(o["text"]),
                falsified=bool(o.get("falsified", False)),
            )
        )

    env = Environment(accounts, subreddits, knowledge, config.time_window)

    ev_path = root / "events.jsonl"
    parsed: list[tuple[int, InteractionEvent]] = []
    seen: dict[str, int] = {}
    for n, o in _read_jsonl(ev_path):
        e = _parse_event(o, ev_path, n, config.clean)
        if e.event_id in seen:
            raise IntegrityError(f"{ev_path}:{n}: duplicate event id {e.event_id!r} (first on line {seen[e.event_id]})")
        seen[e.event_id] = n
        parsed.append((n, e))
    for n, e in parsed:
        if e.parent is not None and e.parent not in seen:
            raise IntegrityError(f"{ev_path}:{n}: dangling parent {e.parent!r}")

    allowed = set(config.subreddits)
    lo, hi = config.time_window
    dropped: set[str] = set()
    for n, e in sorted(parsed, key=lambda item: item[1].sort_key):
        if e.parent in dropped or e.subreddit not in allowed or not lo <= e.timestamp <= hi:
            dropped.add(e.event_id)
            continue
        if e.parent is not None and e.parent not in env:
            raise RejectedEvent("chronology", f"{ev_path}:{n}: {e.event_id} is not after parent {e.parent}")
        try:
            env.apply(e)
        except RejectedEvent as exc:
            raise RejectedEvent(exc.reason, f"{ev_path}:{n}: {exc}") from None
    return env


def load_snapshot(directory: str | Path) -> Environment:
    """Reload a directory written by :meth:`Environment.save`."""
    root = Path(directory)
    manifest_path = root / "manifest.json"
    if not manifest_path.exists():
        raise IntegrityError(f"{root} has no manifest.json")
    manifest = json.loads(manifest_path.read_text())
    subs = tuple(o["name"] for _, o in _read_jsonl(root / "subreddits.jsonl"))
    env = ingest_human_corpus(
        root, IngestConfig(subreddits=subs, time_window=tuple(manifest["time_window"]), clean=False)
    )
    counts = manifest.get("counts", {})
    if counts and counts.get("events") != len(env):
        raise IntegrityError(f"{root}: manifest lists {counts.get('events')} events, found {len(env)}")
    return env
