"""Detection dataset: node features, typed comment edges, labels and splits."""

from __future__ import annotations

import hashlib
import json
import math
import os
import shutil
import tempfile
from collections import Counter
from dataclasses import dataclass, field
from enum import IntEnum
from fractions import Fraction
from pathlib import Path
from typing import Any, Protocol, Sequence

import numpy as np
from sklearn.feature_extraction.text import HashingVectorizer

from botsim.env import AccountKind, Environment, EventKind
from botsim.errors import ConfigError, IntegrityError, ValidationError

N_METADATA = 10
METADATA_NAMES = (
    "NameLength", "PostNum", "Comments1Num", "Comments2Num", "CommentsNum",
    "SubRedditNum", "PostC1Ratio", "PostC2Ratio", "PostCRatio", "PostSubRedditNum",
)
SPLIT_RATIOS = (Fraction(7, 10), Fraction(2, 10), Fraction(1, 10))
SPLIT_NAMES = ("train", "valid", "test")
DEFAULT_DIM = 64
FILES = ("nodes.jsonl", "text_features.bin", "text_features.meta.json", "edges.csv", "splits.json")


class Relation(IntEnum):
    C1_P = 0
    C2_P = 1
    C2_C1 = 2


@dataclass(frozen=True)
class RelationEdge:
    src: str
    dst: str
    rel: Relation
    weight: int


@dataclass
class SplitMask:
    train: list[int]
    valid: list[int]
    test: list[int]

    def sizes(self) -> tuple[int, int, int]:
        return len(self.train), len(self.valid), len(self.test)


# metadata -----------------------------------------------------------------


def extract_metadata_features(env: Environment, user: str) -> np.ndarray:
    """Raw (unstandardized) activity features; ratio denominators clamp to 1."""
    account = env.accounts[user]
    counts = Counter()
    subs = set()
    for e in env.events_by(user):
        if e.kind in (EventKind.POST, EventKind.COMMENT1, EventKind.COMMENT2):
            counts[e.kind] += 1
            subs.add(e.subreddit)
    posts, c1, c2 = counts[EventKind.POST], counts[EventKind.COMMENT1], counts[EventKind.COMMENT2]
    c = c1 + c2
    n_subs = len(subs)
    return np.array(
        [
            len(account.screen_name), posts, c1, c2, c, n_subs,
            posts / max(c1, 1), posts / max(c2, 1), posts / max(c, 1), posts / max(n_subs, 1),
        ],
        dtype=np.float64,
    )


# text ---------------------------------------------------------------------


class Embedder(Protocol):
    dim: int

    def embed(self, texts: Sequence[str]) -> np.ndarray: ...


class HashingEmbedder:
    """Token-hash count vectors, L2-normalized per document."""

    def __init__(self, dim: int = DEFAULT_DIM):
        if dim < 1:
            raise ConfigError("embedding dim must be >= 1")
        self.dim = dim
        self._vec = HashingVectorizer(n_features=dim, alternate_sign=False, norm="l2", lowercase=True)

    def embed(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dim))
        return self._vec.transform(list(texts)).toarray().astype(np.float64)

    def describe(self) -> dict[str, Any]:
        return {"kind": "hashing", "dim": self.dim}


def user_texts(env: Environment, user: str) -> list[str]:
    return [
        e.content or ""
        for e in env.events_by(user)
        if e.kind in (EventKind.POST, EventKind.COMMENT1, EventKind.COMMENT2)
    ]


def embed_user_texts(env: Environment, user: str, embedder: Embedder) -> np.ndarray:
    """Mean of the per-document vectors; zeros for a user with no texts."""
    texts = user_texts(env, user)
    if not texts:
        return np.zeros(embedder.dim)
    vecs = np.asarray(embedder.embed(texts), dtype=np.float64)
    if vecs.shape != (len(texts), embedder.dim):
        raise ConfigError(f"embedder returned shape {vecs.shape}, expected ({len(texts)}, {embedder.dim})")
    return vecs.mean(axis=0)


# edges --------------------------------------------------------------------


def build_relation_edges(env: Environment) -> list[RelationEdge]:
    """Commenter -> parent-content author edges weighted by comment count.

    A second-level comment yields a C2-C1 edge to the first-level commenter
    and a C2-P edge to the post author. Self-replies produce no edge.
    """
    weights: Counter[tuple[str, str, Relation]] = Counter()
    for e in env.events:
        if e.kind is EventKind.COMMENT1:
            post = env.get(e.parent)
            weights[(e.actor, post.actor, Relation.C1_P)] += 1
        elif e.kind is EventKind.COMMENT2:
            c1 = env.get(e.parent)
            post = env.get(c1.parent)
            weights[(e.actor, post.actor, Relation.C2_P)] += 1
            weights[(e.actor, c1.actor, Relation.C2_C1)] += 1
    return [
        RelationEdge(src, dst, rel, w)
        for (src, dst, rel), w in sorted(weights.items(), key=lambda kv: (kv[0][2], kv[0][0], kv[0][1]))
        if src != dst
    ]


# splits -------------------------------------------------------------------


def split_sizes(n: int, ratios: Sequence[Fraction] = SPLIT_RATIOS) -> tuple[int, ...]:
    """Largest-remainder apportionment of ``n``; ties go to the earlier split."""
    quotas = [n * r for r in ratios]
    sizes = [math.floor(q) for q in quotas]
    order = sorted(range(len(ratios)), key=lambda i: (-(quotas[i] - sizes[i]), i))
    for i in order[: n - sum(sizes)]:
        sizes[i] += 1
    return tuple(sizes)


def split_users(n: int, seed: int) -> SplitMask:
    if n < 3:
        raise ValueError("need at least 3 users to split")
    perm = np.random.default_rng(seed).permutation(n).tolist()
    a, b, _ = split_sizes(n)
    return SplitMask(sorted(perm[:a]), sorted(perm[a:a + b]), sorted(perm[a + b:]))


# export -------------------------------------------------------------------


@dataclass
class ExportConfig:
    out: Path
    seed: int = 0
    dim: int = DEFAULT_DIM
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"seed": self.seed, "embedder": {"kind": "hashing", "dim": self.dim}, **self.extra}

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def export_dataset(env: Environment, config: ExportConfig, embedder: Embedder | None = None) -> Path:
    """Write the dataset directory; the target is replaced atomically."""
    embedder = embedder or HashingEmbedder(config.dim)
    users = sorted(env.accounts)
    meta = np.stack([extract_metadata_features(env, u) for u in users]) if users else np.zeros((0, N_METADATA))
    text = np.stack([embed_user_texts(env, u, embedder) for u in users]) if users else np.zeros((0, embedder.dim))
    if not (len(meta) == len(text) == len(users)):
        raise IntegrityError("row counts disagree between metadata and text features")
    if not (np.isfinite(meta).all() and np.isfinite(text).all()):
        raise IntegrityError("non-finite feature values")
    edges = build_relation_edges(env)
    splits = split_users(len(users), config.seed)

    out = Path(config.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{out.name}.", dir=out.parent))
    try:
        with open(tmp / "nodes.jsonl", "w", encoding="utf-8", newline="\n") as fh:
            for i, u in enumerate(users):
                row = {"id": u, "label": int(env.accounts[u].kind is AccountKind.BOT), "metadata": meta[i].tolist()}
                fh.write(json.dumps(row, sort_keys=True) + "\n")
        (tmp / "text_features.bin").write_bytes(text.astype("<f4").tobytes(order="C"))
        (tmp / "text_features.meta.json").write_text(
            json.dumps({"rows": len(users), "dim": embedder.dim, "dtype": "float32-le"}, sort_keys=True) + "\n"
        )
        with open(tmp / "edges.csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("src,dst,rel,weight\n")
            for e in edges:
                fh.write(f"{e.src},{e.dst},{int(e.rel)},{e.weight}\n")
        split_ids = {name: [users[i] for i in getattr(splits, name)] for name in SPLIT_NAMES}
        (tmp / "splits.json").write_text(json.dumps(split_ids, sort_keys=True) + "\n")
        labels = Counter(int(env.accounts[u].kind is AccountKind.BOT) for u in users)
        manifest = {
            "seed": config.seed,
            "config": config.to_dict(),
            "config_digest": config.digest(),
            "counts": {
                "nodes": len(users), "humans": labels[0], "bots": labels[1], "edges": len(edges),
                "edges_by_rel": {r.name: sum(1 for e in edges if e.rel is r) for r in Relation},
                "splits": dict(zip(SPLIT_NAMES, splits.sizes())),
            },
            "files": {name: _sha256(tmp / name) for name in FILES},
        }
        (tmp / "manifest.json").write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
        if out.exists():
            if not (out / "manifest.json").exists():
                raise IntegrityError(f"{out} exists and is not a dataset directory")
            shutil.rmtree(out)
        os.replace(tmp, out)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise
    return out


# loading / validation -----------------------------------------------------


@dataclass
class LoadedDataset:
    ids: list[str]
    labels: np.ndarray
    metadata: np.ndarray
    text: np.ndarray
    edges: list[RelationEdge]
    splits: dict[str, list[str]]
    manifest: dict[str, Any]


def load_dataset(directory: str | Path) -> LoadedDataset:
    root = Path(directory)
    try:
        manifest = json.loads((root / "manifest.json").read_text())
        nodes = [json.loads(line) for line in (root / "nodes.jsonl").read_text().splitlines() if line]
        tmeta = json.loads((root / "text_features.meta.json").read_text())
        raw = np.frombuffer((root / "text_features.bin").read_bytes(), dtype="<f4")
        lines = (root / "edges.csv").read_text().splitlines()
        splits = json.loads((root / "splits.json").read_text())
    except (OSError, ValueError) as exc:
        raise ValidationError(f"{root}: unreadable dataset ({exc})") from None
    rows, dim = int(tmeta["rows"]), int(tmeta["dim"])
    if raw.size != rows * dim:
        raise ValidationError(f"text_features.bin holds {raw.size} floats, meta says {rows}x{dim}")
    if not lines or lines[0] != "src,dst,rel,weight":
        raise ValidationError("edges.csv header must be 'src,dst,rel,weight'")
    edges = []
    for n, line in enumerate(lines[1:], start=2):
        parts = line.split(",")
        if len(parts) != 4:
            raise ValidationError(f"edges.csv:{n}: expected 4 fields")
        try:
            edges.append(RelationEdge(parts[0], parts[1], Relation(int(parts[2])), int(parts[3])))
        except ValueError as exc:
            raise ValidationError(f"edges.csv:{n}: {exc}") from None
    return LoadedDataset(
        ids=[r["id"] for r in nodes],
        labels=np.array([r["label"] for r in nodes], dtype=np.int64),
        metadata=np.array([r["metadata"] for r in nodes], dtype=np.float64).reshape(len(nodes), -1),
        text=raw.reshape(rows, dim).astype(np.float64),
        edges=edges,
        splits=splits,
        manifest=manifest,
    )


def validate_dataset(directory: str | Path) -> dict[str, bool]:
    """Schema and invariant checks; returns check name -> passed.

    Raises :class:`ValidationError` only when the directory cannot be read.
    """
    root = Path(directory)
    missing = [f for f in (*FILES, "manifest.json") if not (root / f).exists()]
    if missing:
        raise ValidationError(f"{root}: missing {', '.join(missing)}")
    ds = load_dataset(root)
    m = ds.manifest
    n = len(ds.ids)
    index = {u: i for i, u in enumerate(ds.ids)}
    checks: dict[str, bool] = {}
    checks["file_digests"] = all(_sha256(root / f) == m.get("files", {}).get(f) for f in FILES)
    checks["unique_ids"] = len(index) == n
    checks["row_counts"] = len(ds.labels) == len(ds.metadata) == len(ds.text) == n == m["counts"]["nodes"]
    checks["labels_binary"] = bool(np.isin(ds.labels, (0, 1)).all())
    checks["metadata_width"] = ds.metadata.shape[1] == N_METADATA if n else True
    checks["finite_features"] = bool(np.isfinite(ds.metadata).all() and np.isfinite(ds.text).all())
    checks["edge_endpoints"] = all(e.src in index and e.dst in index for e in ds.edges)
    checks["edge_weights"] = all(e.weight >= 1 for e in ds.edges)
    checks["no_self_loops"] = all(e.src != e.dst for e in ds.edges)
    checks["edge_count"] = len(ds.edges) == m["counts"]["edges"]
    checks["no_human_to_bot_edges"] = checks["edge_endpoints"] and not any(
        ds.labels[index[e.src]] == 0 and ds.labels[index[e.dst]] == 1 for e in ds.edges
    )
    parts = [ds.splits.get(name, []) for name in SPLIT_NAMES]
    flat = [u for p in parts for u in p]
    checks["splits_disjoint_exhaustive"] = len(flat) == len(set(flat)) == n and set(flat) == set(index)
    checks["split_sizes"] = n >= 3 and tuple(len(p) for p in parts) == split_sizes(n)
    return checks
