"""MLP head fusing the narrative cosine with the four entity cosines."""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .entities import EntityProfile, feature_vector
from .encoder import narrative_similarity

FEATURE_ORDER = ("narrative", "geo", "org", "date", "qty")
_CKPT_VERSION = 1
_ACTIVATIONS = ("relu", "sigmoid")


@dataclass(frozen=True)
class FeatureRow:
    """Fixed-order input features: narrative in [-1, 1], the rest in [0, 1]."""

    narrative: float
    geo: float
    org: float
    date: float
    qty: float

    def as_array(self) -> np.ndarray:
        return np.array([self.narrative, self.geo, self.org, self.date, self.qty])


@dataclass
class FusionTrainConfig:
    learning_rate: float = 1e-3
    epochs: int = 200
    patience: int = 20
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.learning_rate < 0:
            raise ValueError("learning_rate must be >= 0")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


class FusionMLP:
    """One hidden layer (rectifier by default), sigmoid output in (0, 1)."""

    def __init__(self, in_dim: int = 5, hidden: int = 32, seed: int = 0,
                 hidden_activation: str = "relu",
                 params: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray] | None = None):
        if hidden_activation not in _ACTIVATIONS:
            raise ValueError(f"unknown hidden activation {hidden_activation!r}")
        self.in_dim = in_dim
        self.hidden = hidden
        self.seed = seed
        self.hidden_activation = hidden_activation
        if params is not None:
            self.w1, self.b1, self.w2, self.b2 = (np.asarray(p, dtype=np.float64)
                                                  for p in params)
        else:
            rng = np.random.default_rng(seed)
            s1 = 1.0 / math.sqrt(in_dim)
            s2 = 1.0 / math.sqrt(hidden)
            self.w1 = rng.uniform(-s1, s1, size=(in_dim, hidden))
            self.b1 = rng.uniform(-s1, s1, size=hidden)
            self.w2 = rng.uniform(-s2, s2, size=(hidden, 1))
            self.b2 = rng.uniform(-s2, s2, size=1)

    def _activate(self, z: np.ndarray) -> np.ndarray:
        if self.hidden_activation == "relu":
            return np.maximum(z, 0.0)
        return _sigmoid(z)

    def _activate_grad(self, z: np.ndarray, h: np.ndarray) -> np.ndarray:
        if self.hidden_activation == "relu":
            return (z > 0.0).astype(np.float64)
        return h * (1.0 - h)

    def forward_batch(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        hidden = self._activate(x @ self.w1 + self.b1)
        return _sigmoid(hidden @ self.w2 + self.b2)[:, 0]

    def params(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return (self.w1, self.b1, self.w2, self.b2)

    def copy(self) -> "FusionMLP":
        return FusionMLP(self.in_dim, self.hidden, self.seed, self.hidden_activation,
                         params=tuple(p.copy() for p in self.params()))

    def save(self, path: str | Path) -> None:
        act = _ACTIVATIONS.index(self.hidden_activation)
        header = struct.pack("<BIIBq", _CKPT_VERSION, self.in_dim, self.hidden,
                             act, self.seed)
        with open(path, "wb") as fh:
            fh.write(header)
            for p in self.params():
                fh.write(p.astype("<f8").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "FusionMLP":
        with open(path, "rb") as fh:
            version, in_dim, hidden, act, seed = struct.unpack(
                "<BIIBq", fh.read(struct.calcsize("<BIIBq")))
            if version != _CKPT_VERSION:
                raise ValueError(f"{path}: unsupported checkpoint version {version}")
            data = np.frombuffer(fh.read(), dtype="<f8")
        shapes = [(in_dim, hidden), (hidden,), (hidden, 1), (1,)]
        params = []
        offset = 0
        for shape in shapes:
            size = int(np.prod(shape))
            params.append(data[offset:offset + size].reshape(shape).copy())
            offset += size
        return cls(in_dim, hidden, seed, _ACTIVATIONS[act], params=tuple(params))


def forward(mlp: FusionMLP, row: FeatureRow) -> float:
    """Final similarity score for one feature row, strictly inside (0, 1)."""
    return float(mlp.forward_batch(row.as_array()[None, :])[0])


def _gradients(mlp: FusionMLP, x: np.ndarray, y: np.ndarray):
    """Mean-squared-error loss and its gradients for a batch."""
    z1 = x @ mlp.w1 + mlp.b1
    hidden = mlp._activate(z1)
    z2 = hidden @ mlp.w2 + mlp.b2
    pred = _sigmoid(z2)[:, 0]
    residual = pred - y
    loss = float(np.mean(residual * residual))
    n = x.shape[0]
    dz2 = (2.0 / n) * residual * pred * (1.0 - pred)
    dw2 = hidden.T @ dz2[:, None]
    db2 = np.array([dz2.sum()])
    dhidden = dz2[:, None] @ mlp.w2.T
    dz1 = dhidden * mlp._activate_grad(z1, hidden)
    dw1 = x.T @ dz1
    db1 = dz1.sum(axis=0)
    return loss, (dw1, db1, dw2, db2)


def train_fusion(rows: Sequence[tuple[FeatureRow, float]],
                 cfg: FusionTrainConfig,
                 dev_rows: Sequence[tuple[FeatureRow, float]] | None = None,
                 ) -> tuple[FusionMLP, list[float]]:
    """Full-batch Adam on mean squared error against normalized labels.

    With ``dev_rows`` given, stops once the dev loss has not improved for
    ``patience`` epochs and restores the best parameters seen.  Upstream
    features are fixed inputs; nothing beyond the MLP is touched.
    """
    if not rows:
        raise ValueError("no training rows")
    x = np.array([row.as_array() for row, _ in rows])
    y = np.array([label for _, label in rows], dtype=np.float64)
    if dev_rows:
        x_dev = np.array([row.as_array() for row, _ in dev_rows])
        y_dev = np.array([label for _, label in dev_rows], dtype=np.float64)

    mlp = FusionMLP(in_dim=x.shape[1], seed=cfg.seed)
    m = [np.zeros_like(p) for p in mlp.params()]
    v = [np.zeros_like(p) for p in mlp.params()]
    losses: list[float] = []
    best_dev = math.inf
    best_params = None
    stale = 0

    for step in range(1, cfg.epochs + 1):
        loss, grads = _gradients(mlp, x, y)
        losses.append(loss)
        params = mlp.params()
        for i, (p, g) in enumerate(zip(params, grads)):
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g
            m_hat = m[i] / (1.0 - cfg.beta1 ** step)
            v_hat = v[i] / (1.0 - cfg.beta2 ** step)
            p -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.eps)
        if dev_rows:
            pred_dev = mlp.forward_batch(x_dev)
            dev_loss = float(np.mean((pred_dev - y_dev) ** 2))
            if dev_loss < best_dev - 1e-12:
                best_dev = dev_loss
                best_params = tuple(p.copy() for p in mlp.params())
                stale = 0
            else:
                stale += 1
                if stale >= cfg.patience:
                    break
    if best_params is not None:
        mlp.w1, mlp.b1, mlp.w2, mlp.b2 = best_params
    return mlp, losses


def fusion_gradient_check(mlp: FusionMLP, row: FeatureRow, label: float,
                          h: float = 1e-5, samples: int = 12, seed: int = 0) -> float:
    """Max relative error of analytic vs central-difference gradients."""
    x = row.as_array()[None, :]
    y = np.array([label])
    _, grads = _gradients(mlp, x, y)
    params = mlp.params()
    flat = [(i, j) for i, p in enumerate(params) for j in range(p.size)]
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(flat), size=min(samples, len(flat)), replace=False)

    worst = 0.0
    for pick in picks:
        i, j = flat[pick]
        p = params[i].reshape(-1)
        original = p[j]
        p[j] = original + h
        up, _ = _gradients(mlp, x, y)
        p[j] = original - h
        down, _ = _gradients(mlp, x, y)
        p[j] = original
        numeric = (up - down) / (2.0 * h)
        exact = grads[i].reshape(-1)[j]
        denom = max(abs(exact), abs(numeric), 1e-4)
        worst = max(worst, abs(exact - numeric) / denom)
    return worst


def build_feature_row(embedder, profiles: Mapping[str, EntityProfile],
                      doc_a: str, doc_b: str) -> FeatureRow:
    """Assemble the five inputs for one document pair."""
    narrative = narrative_similarity(embedder.embed(doc_a), embedder.embed(doc_b))
    empty = EntityProfile()
    fv = feature_vector(profiles.get(doc_a, empty), profiles.get(doc_b, empty))
    return FeatureRow(narrative, fv.geo, fv.org, fv.date, fv.qty)


def predict_pair(mlp: FusionMLP, embedder, profiles: Mapping[str, EntityProfile],
                 pair) -> float:
    """Final similarity for an article pair (propagates embedding lookup errors)."""
    row = build_feature_row(embedder, profiles, pair.doc_a, pair.doc_b)
    return forward(mlp, row)


def write_feature_dump(path: str | Path,
                       records: Sequence[tuple[str, FeatureRow, float | None, float]],
                       ) -> None:
    """Audit CSV of (pair_id, features, label, prediction) rows."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("pair_id", *FEATURE_ORDER, "label", "prediction"))
        for pair_id, row, label, prediction in records:
            writer.writerow((pair_id, repr(row.narrative), repr(row.geo),
                             repr(row.org), repr(row.date), repr(row.qty),
                             "" if label is None else repr(label),
                             repr(prediction)))
