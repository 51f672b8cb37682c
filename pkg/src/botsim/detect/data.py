"""In-memory graph datasets and training configuration."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from botsim.dataset import SPLIT_NAMES, load_dataset, split_users
from botsim.errors import ConfigError, ValidationError

N_RELATIONS = 3


@dataclass
class TrainConfig:
    learning_rate: float = 1e-4
    hidden: int = 128
    layers: int = 2
    dropout: float = 0.3
    epochs: int = 100
    weight_decay: float = 1e-2
    seeds: tuple[int, ...] = (0, 1, 2, 3, 4)
    init_scale: float = 1.0

    def __post_init__(self) -> None:
        self.seeds = tuple(int(s) for s in self.seeds)
        if self.epochs < 0:
            raise ConfigError("epochs must be >= 0")
        if not 0 <= self.dropout < 1:
            raise ConfigError("dropout must lie in [0, 1)")
        if self.layers < 1 or self.hidden < 1:
            raise ConfigError("layers and hidden must be >= 1")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be > 0")

    @classmethod
    def tuned(cls, model: str, **overrides: Any) -> TrainConfig:
        """Settings that converge under plain gradient descent at desk scale."""
        base = dict(TUNED[model])
        base.update(overrides)
        return cls(**base)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> TrainConfig:
        return cls(**{k: v for k, v in d.items() if k in cls.__dataclass_fields__})

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["seeds"] = list(self.seeds)
        return d


TUNED: dict[str, dict[str, Any]] = {
    "logreg": {"learning_rate": 0.1, "epochs": 300, "weight_decay": 1e-2, "dropout": 0.0},
    "rgcn": {"learning_rate": 0.05, "epochs": 300, "hidden": 32, "dropout": 0.0, "weight_decay": 1e-3},
}


@dataclass
class GraphDataset:
    """Features, labels, split masks and typed edges over row indices.

    ``edges`` is an int array of shape (m, 4): src, dst, rel, weight.
    """

    X: np.ndarray
    y: np.ndarray
    edges: np.ndarray
    masks: dict[str, np.ndarray]
    ids: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.X = np.asarray(self.X, dtype=np.float64)
        self.y = np.asarray(self.y, dtype=np.int64)
        self.edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 4)
        n = len(self.X)
        if len(self.y) != n:
            raise ValidationError(f"{len(self.y)} labels for {n} rows")
        if len(self.edges) and (self.edges[:, :2].min() < 0 or self.edges[:, :2].max() >= n):
            raise ValidationError("edge endpoint outside row range")
        if len(self.edges) and not np.isin(self.edges[:, 2], range(N_RELATIONS)).all():
            raise ValidationError("relation index outside 0..2")
        self.masks = {k: np.asarray(v, dtype=np.int64) for k, v in self.masks.items()}
        for k, v in self.masks.items():
            if len(v) and (v.min() < 0 or v.max() >= n):
                raise ValidationError(f"{k} mask outside row range")

    @property
    def n(self) -> int:
        return len(self.X)

    def with_edges(self, edges: np.ndarray) -> GraphDataset:
        return GraphDataset(self.X, self.y, edges, self.masks, self.ids)

    @classmethod
    def from_directory(cls, directory: str | Path) -> GraphDataset:
        ds = load_dataset(directory)
        index = {u: i for i, u in enumerate(ds.ids)}
        X = np.hstack([ds.metadata, ds.text]) if len(ds.ids) else np.zeros((0, 0))
        edges = np.array([(index[e.src], index[e.dst], int(e.rel), e.weight) for e in ds.edges], dtype=np.int64)
        masks = {name: np.array(sorted(index[u] for u in ds.splits[name]), dtype=np.int64) for name in SPLIT_NAMES}
        return cls(X, ds.labels, edges, masks, ds.ids)

    @classmethod
    def from_arrays(cls, X: np.ndarray, y: np.ndarray, edges: list | np.ndarray, split_seed: int = 0) -> GraphDataset:
        s = split_users(len(X), split_seed)
        masks = {"train": s.train, "valid": s.valid, "test": s.test}
        return cls(X, y, np.asarray(edges, dtype=np.int64).reshape(-1, 4), masks)

    def save_npz(self, path: str | Path) -> None:
        np.savez(path, X=self.X, y=self.y, edges=self.edges, **{f"mask_{k}": v for k, v in self.masks.items()},
                 ids=np.array(self.ids, dtype=str))

    def summary(self) -> str:
        return json.dumps({"rows": self.n, "edges": int(len(self.edges)), "bots": int(self.y.sum())})


def standardize(X: np.ndarray, train_mask: np.ndarray) -> np.ndarray:
    """Column z-scores with training-row statistics; std clamps at 1e-8."""
    train_mask = np.asarray(train_mask)
    if train_mask.size == 0:
        raise ValueError("train mask is empty")
    ref = X[train_mask]
    mu = ref.mean(axis=0)
    sd = np.maximum(ref.std(axis=0), 1e-8)
    return (X - mu) / sd
