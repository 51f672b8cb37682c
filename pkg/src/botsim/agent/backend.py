"""Decision backends and response parsing.

A backend turns a :class:`DecisionRequest` into raw text. Both the scripted
stub and the remote HTTP backend go through :func:`parse_response`, so the
stub exercises the same parsing path a real model would.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import random
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Protocol

import httpx

from botsim.env import format_time
from botsim.errors import BackendError, ResponseParseError
from botsim.seeding import derive_seed

log = logging.getLogger(__name__)

TOKEN_ENV = "BOTSIM_BACKEND_TOKEN"


@dataclass
class DecisionRequest:
    prompt: str
    expected_schema: dict[str, str]
    seed: int
    task: str = "decide"
    # structured context for scripted backends; never sent over the wire
    bindings: dict[str, Any] = field(default_factory=dict)

    def digest(self) -> str:
        blob = json.dumps([self.task, self.expected_schema, self.bindings], sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()


class Verdict(str, Enum):
    ACTION = "action"
    CONTINUE = "continue_browsing"
    END = "end"


@dataclass
class DecisionResponse:
    verdict: Verdict
    raw: str
    params: dict[str, Any] = field(default_factory=dict)


class Backend(Protocol):
    def complete(self, request: DecisionRequest) -> str: ...


# parsing ---------------------------------------------------------------

_LINE = re.compile(r'^\s*"?([A-Za-z_][A-Za-z0-9_]*)"?\s*:\s*(.*?)\s*,?\s*$')


def _coerce(value: str) -> Any:
    try:
        return json.loads(value)
    except ValueError:
        return value.strip().strip("\"'")


def _normalize_keys(params: dict[str, Any], schema: dict[str, str]) -> dict[str, Any]:
    lookup = {k.lower(): k for k in schema}
    return {lookup.get(k.lower(), k): v for k, v in params.items()}


def parse_response(raw: str, schema: dict[str, str]) -> DecisionResponse:
    """Classify backend text as continue / end / action parameters.

    Accepted action shapes: a JSON object, a JSON list of values in schema
    order, or one ``"Key": value`` pair per line.
    """
    text = raw.strip()
    bare = text.strip("\"'[]. ").lower()
    if bare == "continue browsing":
        return DecisionResponse(Verdict.CONTINUE, raw)
    if bare == "end":
        return DecisionResponse(Verdict.END, raw)

    params: dict[str, Any] | None = None
    try:
        obj = json.loads(text)
    except ValueError:
        obj = None
    if isinstance(obj, dict):
        params = obj
    elif isinstance(obj, list) and len(obj) == len(schema):
        params = dict(zip(schema, obj))
    else:
        pairs = {}
        for line in text.splitlines():
            m = _LINE.match(line)
            if m:
                pairs[m.group(1)] = _coerce(m.group(2))
        params = pairs or None
    if not params:
        raise ResponseParseError(raw)
    params = _normalize_keys(params, schema)
    missing = [k for k in schema if k not in params and not k.endswith("User")]
    if missing:
        raise ResponseParseError(raw, f"response lacks {', '.join(missing)}")
    return DecisionResponse(Verdict.ACTION, raw, params)


def decide(backend: Backend, request: DecisionRequest) -> DecisionResponse:
    return parse_response(backend.complete(request), request.expected_schema)


# remote ----------------------------------------------------------------


class RemoteBackend:
    """``POST {url}/decide`` with ``{prompt, schema, seed}``; reply ``{text}``."""

    def __init__(self, url: str, timeout: float = 30.0, retries: int = 3, client: httpx.Client | None = None):
        self.url = url.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self._client = client

    def complete(self, request: DecisionRequest) -> str:
        body = {"prompt": request.prompt, "schema": request.expected_schema, "seed": request.seed}
        headers = {}
        token = os.environ.get(TOKEN_ENV)
        if token:
            headers["Authorization"] = f"Bearer {token}"
        client = self._client or httpx.Client(timeout=self.timeout)
        last: Exception | None = None
        try:
            for attempt in range(self.retries + 1):
                try:
                    resp = client.post(f"{self.url}/decide", json=body, headers=headers)
                    resp.raise_for_status()
                    payload = resp.json()
                    if not isinstance(payload, dict) or not isinstance(payload.get("text"), str):
                        raise BackendError(f"malformed backend reply: {resp.text[:200]!r}")
                    return payload["text"]
                except (httpx.HTTPError, ValueError) as exc:
                    last = exc
                    log.warning("backend attempt %d/%d failed: %s", attempt + 1, self.retries + 1, exc)
        finally:
            if self._client is None:
                client.close()
        raise BackendError(f"backend unreachable after {self.retries + 1} attempts: {last}")


# scripted stub -----------------------------------------------------------

_OPENERS = ("Honestly,", "Worth noting:", "Not surprised.", "Hard to ignore:", "Remember this:", "Wild.")
_POST_FRAMES = (
    "New details: {fact}",
    "People should know this. {fact}",
    "{fact} Nobody is talking about it.",
    "Update on {kw}: {fact}",
)

_SWAPS = [
    ("Russia", "Ukraine"), ("Russian", "Ukrainian"), ("Israel", "Palestine"), ("Israeli", "Palestinian"),
    ("Biden", "Trump"), ("Democrats", "Republicans"), ("Democratic", "Republican"), ("Kyiv", "Moscow"),
    ("increase", "decrease"), ("increased", "decreased"), ("won", "lost"), ("rose", "fell"),
    ("support", "oppose"), ("supports", "opposes"), ("peace", "war"),
]
_NEGATE = (" is ", " was ", " will ", " has ", " are ", " were ", " can ")
_NUMBER = re.compile(r"\b\d+\b")


def _first_sentence(text: str, limit: int = 200) -> str:
    text = " ".join(text.split())
    cut = re.split(r"(?<=[.!?])\s", text, maxsplit=1)[0]
    return cut[:limit].rstrip()


def falsify_text(text: str, rng: random.Random) -> str:
    """Deterministic counter-narrative: entity/number swaps plus one negation."""
    if not text:
        return text
    out = text
    table = {}
    for a, b in _SWAPS:
        table[a] = b
        table[b] = a
    pattern = re.compile(r"\b(" + "|".join(re.escape(k) for k in sorted(table, key=len, reverse=True)) + r")\b")
    out = pattern.sub(lambda m: table[m.group(1)], out)
    out = _NUMBER.sub(lambda m: str(int(m.group(0)) + rng.randint(1, 9)), out)
    present = [w for w in _NEGATE if w in out]
    if present:
        w = rng.choice(present)
        out = out.replace(w, f"{w[:-1]} not ", 1)
    if out == text:
        out = "Contrary to earlier reports, " + text
    return out


class StubBackend:
    """Scripted backend: a pure function of (seed, schema, bindings digest).

    ``decide`` requests answer "End" on an empty stream, "Continue browsing"
    when no streamed item shares a keyword with the task (or with
    probability ``continue_prob``), and otherwise a schema-valid action that
    references an id from the stream.
    """

    def __init__(self, continue_prob: float = 0.1):
        self.continue_prob = continue_prob

    def complete(self, request: DecisionRequest) -> str:
        rng = random.Random(derive_seed(request.seed, request.digest()))
        if request.task == "rewrite":
            return falsify_text(request.bindings.get("text", ""), rng)
        if request.task == "classify":
            return "human"
        return self._decide(request, rng)

    def _decide(self, request: DecisionRequest, rng: random.Random) -> str:
        b = request.bindings
        stream = b.get("stream", [])
        if not stream:
            return "End"
        keywords = set(b.get("keywords", []))

        def related(item: dict) -> bool:
            return not keywords or bool(keywords & set(re.findall(r"[a-z0-9]+", item["text"].lower())))

        if not any(related(it) for it in stream):
            return "Continue browsing"
        if rng.random() < self.continue_prob:
            return "Continue browsing"

        action = b["action"]
        user = b.get("user", "")
        now = int(b["now"])
        hi = int(b.get("window_end", now + 86400))
        if action == "Post":
            ts = min(now + rng.randint(0, 120), hi)
            return self._lines(
                PostContent=self._post_text(b, rng), PostTime=format_time(ts), PostUser=user
            )

        want = {"Comment": "post" if b.get("level", 1) == 1 else "comment1"}.get(action, "post")
        targets = [it for it in stream if it["kind"] == want]
        if not targets:
            return "Continue browsing"
        preferred = [it for it in targets if related(it)] or targets
        target = rng.choice(preferred)
        ts = min(max(now, int(target["time"]) + 1) + rng.randint(0, 120), hi)
        stamp = format_time(ts)
        if action == "Comment":
            return self._lines(
                ID=target["id"], CommentContent=self._comment_text(b, target, rng),
                CommentTime=stamp, CommentUser=user,
            )
        if action == "Like":
            return self._lines(ID=target["id"], LikeTime=stamp, LikeUser=user)
        if action == "Repost":
            return self._lines(ID=target["id"], RepostTime=stamp, RepostUser=user)
        return "End"

    @staticmethod
    def _lines(**fields: Any) -> str:
        return "\n".join(f'"{k}": {json.dumps(v, ensure_ascii=False)}' for k, v in fields.items())

    @staticmethod
    def _post_text(b: dict, rng: random.Random) -> str:
        knowledge = b.get("knowledge") or []
        kws = sorted(b.get("keywords") or []) or ["this"]
        fact = _first_sentence(rng.choice(knowledge)) if knowledge else f"Big news on {rng.choice(kws)} today."
        return rng.choice(_POST_FRAMES).format(fact=fact, kw=rng.choice(kws))

    @staticmethod
    def _comment_text(b: dict, target: dict, rng: random.Random) -> str:
        example = b.get("comment_example") or ""
        words = re.findall(r"[A-Za-z']+", target["text"])
        focus = " ".join(rng.sample(words, min(3, len(words)))) if words else "this"
        ending = example.strip()[-1:] if example.strip()[-1:] in ("?", "!", ".") else "."
        shape = len(example.split())
        opener = rng.choice(_OPENERS)
        text = f"{opener} {focus}{ending}"
        if shape > 8:
            text += " " + _first_sentence(" ".join(b.get("knowledge") or [""]), 80)
        return text.strip()
