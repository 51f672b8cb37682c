"""Logistic regression and a two-layer relational GCN with hand-written gradients.

Both train by full-batch gradient descent with decoupled weight decay:
``W -= lr * grad`` followed by ``W -= lr * weight_decay * W`` (biases are
not decayed).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from botsim.detect.data import N_RELATIONS, GraphDataset, TrainConfig, standardize
from botsim.detect.metrics import EvalReport, score
from botsim.errors import TrainingError

log = logging.getLogger(__name__)

Params = dict[str, np.ndarray]


def flatten(params: Params) -> np.ndarray:
    return np.concatenate([params[k].ravel() for k in sorted(params)])


def unflatten(vec: np.ndarray, like: Params) -> Params:
    out, i = {}, 0
    for k in sorted(like):
        size = like[k].size
        out[k] = vec[i:i + size].reshape(like[k].shape).copy()
        i += size
    return out


def _glorot(rng: np.random.Generator, shape: tuple[int, ...], scale: float) -> np.ndarray:
    fan_in, fan_out = shape[-2], shape[-1]
    limit = scale * math.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=shape)


def _softmax_xent(logits: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and its gradient w.r.t. ``logits``."""
    z = logits - logits.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    m = len(y)
    loss = -logp[np.arange(m), y].mean()
    d = np.exp(logp)
    d[np.arange(m), y] -= 1.0
    return float(loss), d / m


# logistic regression ---------------------------------------------------------


class LogReg:
    def __init__(self, n_features: int, seed: int = 0, init_scale: float = 1.0):
        rng = np.random.default_rng(seed)
        self.params: Params = {
            "w": rng.normal(0.0, 0.01 * init_scale, size=n_features),
            "b": np.zeros(1),
        }

    decayed = ("w",)

    @staticmethod
    def logits(params: Params, X: np.ndarray) -> np.ndarray:
        return X @ params["w"] + params["b"][0]

    def loss_and_grad(self, params: Params, X: np.ndarray, y: np.ndarray) -> tuple[float, Params]:
        z = self.logits(params, X)
        loss = float(np.mean(np.logaddexp(0.0, z) - y * z))
        r = (1.0 / (1.0 + np.exp(-z)) - y) / len(y)
        return loss, {"w": X.T @ r, "b": np.array([r.sum()])}

    def predict(self, X: np.ndarray) -> np.ndarray:
        return (self.logits(self.params, X) > 0).astype(np.int64)


# rgcn-lite --------------------------------------------------------------------


@dataclass
class Propagation:
    """Per-relation mean aggregation over in-edges (messages flow src -> dst)."""

    n: int
    src: list[np.ndarray]
    dst: list[np.ndarray]
    coef: list[np.ndarray]
    has_in: list[np.ndarray]

    @classmethod
    def from_edges(cls, n: int, edges: np.ndarray, n_rel: int = N_RELATIONS) -> Propagation:
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 4)
        src, dst, coef, has_in = [], [], [], []
        for r in range(n_rel):
            e = edges[edges[:, 2] == r]
            # duplicate (src, dst) pairs count once; weights are not used
            pairs = np.unique(e[:, :2], axis=0) if len(e) else np.zeros((0, 2), dtype=np.int64)
            deg = np.bincount(pairs[:, 1], minlength=n).astype(np.float64)
            s, d = pairs[:, 0], pairs[:, 1]
            src.append(s)
            dst.append(d)
            coef.append(1.0 / deg[d] if len(d) else np.zeros(0))
            has_in.append((deg > 0).astype(np.float64))
        return cls(n, src, dst, coef, has_in)

    def aggregate(self, r: int, H: np.ndarray) -> np.ndarray:
        out = np.zeros((self.n, H.shape[1]))
        np.add.at(out, self.dst[r], H[self.src[r]] * self.coef[r][:, None])
        return out

    def aggregate_T(self, r: int, G: np.ndarray) -> np.ndarray:
        out = np.zeros((self.n, G.shape[1]))
        np.add.at(out, self.src[r], G[self.dst[r]] * self.coef[r][:, None])
        return out


class RGCNLite:
    """Relational graph convolutions, ReLU after each, then a linear 2-way head.

    Layer update for node i::

        z_i = h_i W_self + b + sum_r mean_{j -> i in r} (h_j W_r + b_r)

    The per-relation bias makes "has at least one in-neighbour of type r"
    visible even when node features carry no signal.
    """

    decayed = ("W",)

    def __init__(self, n_features: int, hidden: int = 128, layers: int = 2, n_rel: int = N_RELATIONS,
                 seed: int = 0, init_scale: float = 1.0):
        rng = np.random.default_rng(seed)
        self.layers = layers
        self.n_rel = n_rel
        self.params: Params = {}
        d = n_features
        for l in range(layers):
            self.params[f"W_self{l}"] = _glorot(rng, (d, hidden), init_scale)
            self.params[f"b{l}"] = np.zeros(hidden)
            self.params[f"W_rel{l}"] = _glorot(rng, (n_rel, d, hidden), init_scale)
            self.params[f"b_rel{l}"] = np.zeros((n_rel, hidden))
            d = hidden
        self.params["W_out"] = _glorot(rng, (d, 2), init_scale)
        self.params["b_out"] = np.zeros(2)

    def layer(self, params: Params, H: np.ndarray, prop: Propagation, l: int, relu: bool = True) -> np.ndarray:
        Z, _ = self._layer_forward(params, H, prop, l)
        return np.maximum(Z, 0.0) if relu else Z

    def _layer_forward(self, params: Params, H: np.ndarray, prop: Propagation, l: int):
        Z = H @ params[f"W_self{l}"] + params[f"b{l}"]
        aggs = []
        for r in range(self.n_rel):
            P = prop.aggregate(r, H)
            aggs.append(P)
            Z += P @ params[f"W_rel{l}"][r] + prop.has_in[r][:, None] * params[f"b_rel{l}"][r]
        return Z, aggs

    def forward(self, params: Params, X: np.ndarray, prop: Propagation,
                drop: list[np.ndarray] | None = None) -> tuple[np.ndarray, list]:
        cache = []
        H = X
        for l in range(self.layers):
            M = drop[l] if drop is not None else None
            Hd = H * M if M is not None else H
            Z, aggs = self._layer_forward(params, Hd, prop, l)
            cache.append((Hd, M, Z, aggs))
            H = np.maximum(Z, 0.0)
        logits = H @ params["W_out"] + params["b_out"]
        cache.append(H)
        return logits, cache

    def loss_and_grad(self, params: Params, X: np.ndarray, prop: Propagation, y: np.ndarray, idx: np.ndarray,
                      drop: list[np.ndarray] | None = None) -> tuple[float, Params]:
        logits, cache = self.forward(params, X, prop, drop)
        loss, dl = _softmax_xent(logits[idx], y[idx])
        dlogits = np.zeros_like(logits)
        dlogits[idx] = dl
        H = cache[-1]
        grads: Params = {"W_out": H.T @ dlogits, "b_out": dlogits.sum(axis=0)}
        dH = dlogits @ params["W_out"].T
        for l in reversed(range(self.layers)):
            Hd, M, Z, aggs = cache[l]
            dZ = dH * (Z > 0)
            grads[f"W_self{l}"] = Hd.T @ dZ
            grads[f"b{l}"] = dZ.sum(axis=0)
            dHd = dZ @ params[f"W_self{l}"].T
            gW = np.zeros_like(params[f"W_rel{l}"])
            gb = np.zeros_like(params[f"b_rel{l}"])
            for r in range(self.n_rel):
                gW[r] = aggs[r].T @ dZ
                gb[r] = (prop.has_in[r][:, None] * dZ).sum(axis=0)
                dHd += prop.aggregate_T(r, dZ @ params[f"W_rel{l}"][r].T)
            grads[f"W_rel{l}"] = gW
            grads[f"b_rel{l}"] = gb
            dH = dHd * M if M is not None else dHd
        return loss, grads

    def predict(self, X: np.ndarray, prop: Propagation) -> np.ndarray:
        logits, _ = self.forward(self.params, X, prop)
        # ties go to the human class
        return (logits[:, 1] > logits[:, 0]).astype(np.int64)


# training -----------------------------------------------------------------------


def _step(params: Params, grads: Params, lr: float, wd: float, decayed: tuple[str, ...]) -> None:
    for k, g in grads.items():
        params[k] -= lr * g
        if wd and k.startswith(decayed):
            params[k] -= lr * wd * params[k]


def _descend(params: Params, loss_fn: Callable[[int], tuple[float, Params]], cfg: TrainConfig,
             decayed: tuple[str, ...], history: list[float] | None) -> None:
    for epoch in range(cfg.epochs):
        loss, grads = loss_fn(epoch)
        if not math.isfinite(loss):
            raise TrainingError(f"loss became {loss} at epoch {epoch}")
        if history is not None:
            history.append(loss)
        _step(params, grads, cfg.learning_rate, cfg.weight_decay, decayed)


def train_logreg(ds: GraphDataset, cfg: TrainConfig, seed: int,
                 history: list[float] | None = None) -> tuple[LogReg, EvalReport]:
    X = standardize(ds.X, ds.masks["train"])
    model = LogReg(X.shape[1], seed, cfg.init_scale)
    tr = ds.masks["train"]
    _descend(model.params, lambda _e: model.loss_and_grad(model.params, X[tr], ds.y[tr]), cfg, LogReg.decayed, history)
    test = ds.masks["test"]
    return model, score(ds.y[test], model.predict(X[test]))


def train_rgcn(ds: GraphDataset, cfg: TrainConfig, seed: int,
               history: list[float] | None = None) -> tuple[RGCNLite, EvalReport]:
    """Train on the train mask, report on the test mask; deterministic per seed."""
    X = standardize(ds.X, ds.masks["train"])
    model = RGCNLite(X.shape[1], cfg.hidden, cfg.layers, seed=seed, init_scale=cfg.init_scale)
    prop = Propagation.from_edges(ds.n, ds.edges)
    rng = np.random.default_rng([seed, 1])
    keep = 1.0 - cfg.dropout
    widths = [X.shape[1]] + [cfg.hidden] * (cfg.layers - 1)

    def loss_fn(_epoch: int):
        drop = None
        if cfg.dropout > 0:
            drop = [(rng.random((ds.n, w)) < keep) / keep for w in widths]
        return model.loss_and_grad(model.params, X, prop, ds.y, ds.masks["train"], drop)

    _descend(model.params, loss_fn, cfg, RGCNLite.decayed, history)
    test = ds.masks["test"]
    return model, score(ds.y[test], model.predict(X, prop)[test])


TRAINERS = {"logreg": train_logreg, "rgcn": train_rgcn}


def gradient_check(loss_fn: Callable[[np.ndarray], float], analytic: np.ndarray, theta: np.ndarray,
                   h: float = 1e-5) -> float:
    """Max abs difference to central differences, relative to the largest gradient entry."""
    numeric = np.empty_like(theta)
    for i in range(theta.size):
        t = theta.copy()
        t[i] += h
        up = loss_fn(t)
        t[i] -= 2 * h
        numeric[i] = (up - loss_fn(t)) / (2 * h)
    scale = max(np.abs(analytic).max(), np.abs(numeric).max(), 1e-300)
    return float(np.abs(analytic - numeric).max() / scale)
