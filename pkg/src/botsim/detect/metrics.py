"""Accuracy / F1 (bot is the positive class) and per-seed summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np


@dataclass
class EvalReport:
    accuracy: float
    f1: float
    precision: float = 0.0
    recall: float = 0.0
    n: int = 0
    per_seed: list[dict[str, float]] = field(default_factory=list)

    @property
    def accuracy_std(self) -> float:
        return _std([r["accuracy"] for r in self.per_seed])

    @property
    def f1_std(self) -> float:
        return _std([r["f1"] for r in self.per_seed])

    def to_dict(self) -> dict[str, Any]:
        return {
            "accuracy": self.accuracy, "f1": self.f1, "precision": self.precision, "recall": self.recall,
            "n": self.n, "accuracy_std": self.accuracy_std, "f1_std": self.f1_std, "per_seed": self.per_seed,
        }


def _std(values: Sequence[float]) -> float:
    # population std; 0 for fewer than two values
    if len(values) < 2:
        return 0.0
    return float(np.std(np.asarray(values, dtype=np.float64)))


def _ratio(a: int, b: int) -> float:
    return a / b if b else 0.0


def score(y_true: Sequence[int], y_pred: Sequence[int]) -> EvalReport:
    yt = np.asarray(y_true, dtype=np.int64)
    yp = np.asarray(y_pred, dtype=np.int64)
    if yt.shape != yp.shape:
        raise ValueError("label and prediction shapes differ")
    tp = int(((yp == 1) & (yt == 1)).sum())
    fp = int(((yp == 1) & (yt == 0)).sum())
    fn = int(((yp == 0) & (yt == 1)).sum())
    correct = int((yp == yt).sum())
    p = _ratio(tp, tp + fp)
    r = _ratio(tp, tp + fn)
    f1 = 2 * p * r / (p + r) if p + r else 0.0
    return EvalReport(_ratio(correct, len(yt)), f1, p, r, len(yt))


def summarize(reports: Sequence[EvalReport], seeds: Sequence[int]) -> EvalReport:
    """Mean over seeds, keeping the per-seed values."""
    per = [{"seed": int(s), "accuracy": r.accuracy, "f1": r.f1} for s, r in zip(seeds, reports)]
    mean = lambda key: math.fsum(getattr(r, key) for r in reports) / len(reports)  # noqa: E731
    return EvalReport(mean("accuracy"), mean("f1"), mean("precision"), mean("recall"),
                      reports[0].n if reports else 0, per)
