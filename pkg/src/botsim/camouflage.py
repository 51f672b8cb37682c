"""Human-corpus statistics and the bot quota sampler built on them.

Bot metadata is drawn by inverse-CDF sampling from the empirical human
distributions, so a bot population inherits the corpus' long-tail shape.
"""

from __future__ import annotations

import math
import random
from collections import Counter
from collections.abc import Callable, Mapping, Sequence
from dataclasses import asdict, dataclass, field
from datetime import datetime, timedelta, timezone
from fractions import Fraction
from typing import Any

import numpy as np

from botsim.env import (
    DAY_FORMAT,
    SECONDS_PER_DAY,
    Account,
    Environment,
    EventKind,
    day_start,
)
from botsim.errors import ConfigError
from botsim.text import token_set

DENSITY_EDGES = (0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, math.inf)
DENSITY_KINDS = ("post", "comment1", "comment2", "all")
RATIO_KEYS = ("post/C1", "post/C2", "post/allC")
MAX_RESAMPLES = 20
MIN_INTERVAL_DAYS = 1 / 24

_KIND_OF = {
    EventKind.POST: "post",
    EventKind.COMMENT1: "comment1",
    EventKind.COMMENT2: "comment2",
}


@dataclass
class DensityBucket:
    lo: float
    hi: float
    share: float
    mean_count: float
    mean_density: float


@dataclass
class CorpusStats:
    n_humans: int
    post_count_hist: dict[int, int]
    c1_count_hist: dict[int, int]
    c2_count_hist: dict[int, int]
    ratio_quartiles: dict[str, dict[str, float]]
    activity_density_buckets: dict[str, list[DensityBucket]]
    subreddit_count_hist: dict[int, int]
    n_subreddits: int = 6

    def share_below(self, kind: str, days: float) -> float:
        """Fraction of active users of ``kind`` whose density is under ``days``."""
        return sum(b.share for b in self.activity_density_buckets[kind] if b.hi <= days)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        for key in ("post_count_hist", "c1_count_hist", "c2_count_hist", "subreddit_count_hist"):
            d[key] = {str(k): v for k, v in sorted(d[key].items())}
        for buckets in d["activity_density_buckets"].values():
            for b in buckets:
                if math.isinf(b["hi"]):
                    b["hi"] = None
        return d

    @classmethod
    def from_dict(cls, d: Mapping[str, Any]) -> CorpusStats:
        hist = lambda h: {int(k): int(v) for k, v in h.items()}  # noqa: E731
        buckets = {
            kind: [
                DensityBucket(b["lo"], math.inf if b["hi"] is None else b["hi"], b["share"],
                              b["mean_count"], b["mean_density"])
                for b in rows
            ]
            for kind, rows in d["activity_density_buckets"].items()
        }
        return cls(
            n_humans=int(d["n_humans"]),
            post_count_hist=hist(d["post_count_hist"]),
            c1_count_hist=hist(d["c1_count_hist"]),
            c2_count_hist=hist(d["c2_count_hist"]),
            ratio_quartiles={k: dict(v) for k, v in d["ratio_quartiles"].items()},
            activity_density_buckets=buckets,
            subreddit_count_hist=hist(d["subreddit_count_hist"]),
            n_subreddits=int(d.get("n_subreddits", 6)),
        )


def _quartiles(values: Sequence[float]) -> dict[str, float]:
    if not values:
        return {"q1": 1.0, "median": 1.0, "mean": 1.0, "q3": 1.0}
    arr = np.asarray(values, dtype=float)
    q1, med, q3 = np.percentile(arr, [25, 50, 75])
    return {"q1": float(q1), "median": float(med), "mean": float(arr.mean()), "q3": float(q3)}


def _density_buckets(per_user: list[tuple[float, int]]) -> list[DensityBucket]:
    buckets = []
    n = len(per_user)
    for lo, hi in zip(DENSITY_EDGES[:-1], DENSITY_EDGES[1:]):
        members = [(d, c) for d, c in per_user if lo <= d < hi]
        if members:
            share = len(members) / n
            mean_count = sum(c for _, c in members) / len(members)
            mean_density = sum(d for d, _ in members) / len(members)
        else:
            share = mean_count = 0.0
            mean_density = lo
        buckets.append(DensityBucket(lo, hi, share, mean_count, mean_density))
    return buckets


def compute_corpus_stats(env: Environment) -> CorpusStats:
    """Activity statistics over the human accounts of ``env``.

    Ratios use a denominator clamped at 1 and are taken over users with at
    least one post. Activity density is active span in days divided by the
    number of actions of that kind.
    """
    humans = env.humans()
    if not humans:
        raise ConfigError("corpus has no human accounts")
    counts = {h.id: Counter() for h in humans}
    times: dict[str, dict[str, list[int]]] = {h.id: {k: [] for k in DENSITY_KINDS} for h in humans}
    subs: dict[str, set[str]] = {h.id: set() for h in humans}
    for e in env.events:
        if e.actor not in counts or e.kind not in _KIND_OF:
            continue
        kind = _KIND_OF[e.kind]
        counts[e.actor][kind] += 1
        times[e.actor][kind].append(e.timestamp)
        times[e.actor]["all"].append(e.timestamp)
        subs[e.actor].add(e.subreddit)

    post_hist = Counter(counts[h.id]["post"] for h in humans)
    c1_hist = Counter(counts[h.id]["comment1"] for h in humans)
    c2_hist = Counter(counts[h.id]["comment2"] for h in humans)
    sub_hist = Counter(len(subs[h.id]) for h in humans)

    ratios: dict[str, list[float]] = {k: [] for k in RATIO_KEYS}
    for h in humans:
        c = counts[h.id]
        p = c["post"]
        if p == 0:
            continue
        ratios["post/C1"].append(p / max(c["comment1"], 1))
        ratios["post/C2"].append(p / max(c["comment2"], 1))
        ratios["post/allC"].append(p / max(c["comment1"] + c["comment2"], 1))

    density = {}
    for kind in DENSITY_KINDS:
        per_user = []
        for h in humans:
            ts = times[h.id][kind]
            if ts:
                span_days = (max(ts) - min(ts)) / SECONDS_PER_DAY
                per_user.append((span_days / len(ts), len(ts)))
        density[kind] = _density_buckets(per_user)

    return CorpusStats(
        n_humans=len(humans),
        post_count_hist=dict(sorted(post_hist.items())),
        c1_count_hist=dict(sorted(c1_hist.items())),
        c2_count_hist=dict(sorted(c2_hist.items())),
        ratio_quartiles={k: _quartiles(v) for k, v in ratios.items()},
        activity_density_buckets=density,
        subreddit_count_hist=dict(sorted(sub_hist.items())),
        n_subreddits=max(len(env.subreddits), 1),
    )


def allocate_topics(n_bots: int, knowledge_counts: Mapping[str, int]) -> dict[str, int]:
    """Largest-remainder apportionment of bots over the event topics.

    ``international`` is background news, not a goal event, and is ignored.
    Remainder ties go to the topic listed first.
    """
    topics = [t for t in knowledge_counts if t != "international"]
    total = sum(knowledge_counts[t] for t in topics)
    if any(knowledge_counts[t] < 0 for t in topics):
        raise ConfigError("knowledge counts must be non-negative")
    if n_bots == 0:
        return {t: 0 for t in topics}
    if total == 0:
        raise ConfigError("all knowledge counts are zero")
    quotas = {t: Fraction(n_bots * knowledge_counts[t], total) for t in topics}
    alloc = {t: math.floor(q) for t, q in quotas.items()}
    left = n_bots - sum(alloc.values())
    order = sorted(topics, key=lambda t: (-(quotas[t] - alloc[t]), topics.index(t)))
    for t in order[:left]:
        alloc[t] += 1
    return alloc


@dataclass
class BotQuota:
    agent: str
    n_posts: int
    n_c1: int
    n_c2: int
    active_window: tuple[str, str]
    interval_days: float
    n_subreddits: int
    event_topic: str = ""
    n_likes: int = 0
    n_reposts: int = 0
    subreddits: list[str] = field(default_factory=list)

    @property
    def total(self) -> int:
        return self.n_posts + self.n_c1 + self.n_c2 + self.n_likes + self.n_reposts

    @property
    def window_days(self) -> int:
        return window_days(self.active_window)

    def feasible(self) -> bool:
        return self.n_posts >= 0 and self.n_subreddits >= 1 and (
            self.total == 0 or self.window_days / self.interval_days >= self.total - 1e-9
        )


def window_days(window: tuple[str, str]) -> int:
    return (day_start(window[1]) - day_start(window[0])) // SECONDS_PER_DAY + 1


def _shift_day(day: str, n: int) -> str:
    dt = datetime.strptime(day, DAY_FORMAT).replace(tzinfo=timezone.utc) + timedelta(days=n)
    return dt.strftime(DAY_FORMAT)


def _inverse_cdf(hist: Mapping[int, int], u: float) -> int:
    values = sorted(hist)
    total = sum(hist.values())
    acc = 0
    for v in values:
        acc += hist[v]
        if u * total < acc:
            return v
    return values[-1]


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def sample_bot_quotas(
    stats: CorpusStats,
    n_bots: int,
    window: tuple[str, str],
    seed: int,
    agents: Sequence[str] | None = None,
) -> list[BotQuota]:
    """Draw one quota per bot from the corpus distributions.

    Draws depend only on the bot's position, never its id. A draw with no
    actions or that cannot fit its window is redrawn up to 20 times, then
    clamped (at least one post; interval shrunk to fit).
    """
    if not stats.post_count_hist:
        raise ConfigError("empty corpus statistics")
    span = window_days(window)
    if span < 1:
        raise ConfigError(f"empty window {window}")
    agents = list(agents) if agents is not None else [f"b{i + 1}" for i in range(n_bots)]
    if len(agents) != n_bots:
        raise ConfigError("agents must have one id per bot")
    rng = random.Random(seed)
    rq1 = stats.ratio_quartiles["post/C1"]
    rq2 = stats.ratio_quartiles["post/C2"]
    buckets = stats.activity_density_buckets["all"]
    bucket_hist = {i: b.share for i, b in enumerate(buckets) if b.share > 0}

    quotas = []
    for agent in agents:
        for _ in range(MAX_RESAMPLES):
            n_posts = _inverse_cdf(stats.post_count_hist, rng.random())
            r1 = max(rng.uniform(rq1["q1"], rq1["q3"]), 1e-9)
            r2 = max(rng.uniform(rq2["q1"], rq2["q3"]), 1e-9)
            n_c1 = _round_half_up(n_posts / r1)
            n_c2 = _round_half_up(n_posts / r2)
            if bucket_hist:
                b = buckets[_inverse_cdf_float(bucket_hist, rng.random())]
                interval = max(b.mean_density, MIN_INTERVAL_DAYS)
            else:
                interval = 1.0
            n_subs = min(max(_inverse_cdf(stats.subreddit_count_hist, rng.random()), 1), stats.n_subreddits)
            total = n_posts + n_c1 + n_c2
            if total >= 1 and total * interval <= span + 1e-9:
                break
        else:
            if total == 0:
                n_posts = total = 1
            interval = min(interval, span / total)
        length = min(span, max(1, math.ceil(total * interval - 1e-9)))
        offset = rng.randrange(span - length + 1)
        start = _shift_day(window[0], offset)
        quotas.append(
            BotQuota(
                agent=agent,
                n_posts=n_posts,
                n_c1=n_c1,
                n_c2=n_c2,
                active_window=(start, _shift_day(start, length - 1)),
                interval_days=interval,
                n_subreddits=n_subs,
            )
        )
    return quotas


def _inverse_cdf_float(weights: Mapping[int, float], u: float) -> int:
    keys = sorted(weights)
    total = sum(weights.values())
    acc = 0.0
    for k in keys:
        acc += weights[k]
        if u * total < acc:
            return k
    return keys[-1]


def fit_quotas_to_total(quotas: list[BotQuota], total: int) -> list[BotQuota]:
    """Rescale content counts so the quotas sum to exactly ``total`` actions.

    Per-bot totals are apportioned by largest remainder in proportion to the
    sampled totals, then split across posts/C1/C2 the same way. Intervals
    shrink where needed to stay feasible.
    """
    if not quotas:
        if total:
            raise ConfigError("cannot fit a positive total onto zero bots")
        return []
    weights = [max(q.n_posts + q.n_c1 + q.n_c2, 1) for q in quotas]
    per_bot = _apportion(total, weights)
    out = []
    for q, n in zip(quotas, per_bot):
        parts = _apportion(n, [max(q.n_posts, 0), q.n_c1, q.n_c2]) if (q.n_posts + q.n_c1 + q.n_c2) else [n, 0, 0]
        interval = q.interval_days
        if n and q.window_days / interval < n:
            interval = q.window_days / n
        out.append(
            BotQuota(q.agent, parts[0], parts[1], parts[2], q.active_window, interval,
                     q.n_subreddits, q.event_topic, 0, 0, list(q.subreddits))
        )
    return out


def _apportion(total: int, weights: Sequence[int]) -> list[int]:
    s = sum(weights)
    if s == 0:
        return [total] + [0] * (len(weights) - 1)
    quotas = [Fraction(total * w, s) for w in weights]
    alloc = [math.floor(q) for q in quotas]
    order = sorted(range(len(weights)), key=lambda i: (-(quotas[i] - alloc[i]), i))
    for i in order[: total - sum(alloc)]:
        alloc[i] += 1
    return alloc


def subreddit_overlap_scorer(env: Environment, n_posts: int = 10) -> Callable[[Account, str], int]:
    """Token overlap of the agent's preference/description with a subreddit.

    The subreddit side is its name, description and its first ``n_posts``
    posts (log order, so the choice is deterministic).
    """
    cache: dict[str, set[str]] = {}

    def subreddit_tokens(name: str) -> set[str]:
        if name not in cache:
            sub = env.subreddits[name]
            toks = token_set(name) | token_set(sub.description)
            for _, pid in env.posts_in(name)[:n_posts]:
                toks |= token_set(env.get(pid).content or "")
            cache[name] = toks
        return cache[name]

    def score(agent: Account, name: str) -> int:
        prof = agent.profile
        text = f"{prof.preference} {prof.description}" if prof else agent.screen_name
        return len(token_set(text) & subreddit_tokens(name))

    return score


def select_subreddits(
    agent: Account,
    s: int,
    env: Environment,
    scorer: Callable[[Account, str], float] | None = None,
) -> list[str]:
    """Top-``s`` subreddits for ``agent``; ties broken by name."""
    names = sorted(env.subreddits)
    if not 1 <= s <= len(names):
        raise ConfigError(f"s={s} outside [1, {len(names)}]")
    scorer = scorer or subreddit_overlap_scorer(env)
    ranked = sorted(names, key=lambda n: (-scorer(agent, n), n))
    return ranked[:s]
