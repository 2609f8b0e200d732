"""Linear probabilistic classifier over embedding features.

Softmax head for single-label tasks, independent sigmoid head for
multi-label. Trained by seeded mini-batch gradient descent on cross-entropy
against hard or soft targets.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .corpus import Document
from .embedding import EmbeddingProvider, embed_batch


class ClassifierError(ValueError):
    pass


@dataclass
class TrainConfig:
    learning_rate: float = 0.1
    epochs: int = 50
    batch_size: int = 32
    seed: int = 0
    cosine_decay: bool = True

    def lr_at(self, step: int, total_steps: int) -> float:
        if not self.cosine_decay or total_steps <= 1:
            return self.learning_rate
        return self.learning_rate * 0.5 * (1.0 + math.cos(math.pi * step / total_steps))


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def sigmoid(logits: np.ndarray) -> np.ndarray:
    out = np.empty_like(logits)
    pos = logits >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-logits[pos]))
    ez = np.exp(logits[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def featurize(doc: Document, provider: EmbeddingProvider) -> np.ndarray:
    """Unit-norm embedding of the document's normalized text."""
    return embed_batch(provider, [doc.text])[0]


@dataclass
class LinearClassifier:
    W: np.ndarray  # (n, d)
    b: np.ndarray  # (n,)
    mode: str  # "softmax" | "sigmoid"
    provider_name: str = ""
    manifest: dict = field(default_factory=dict)

    @property
    def n_classes(self) -> int:
        return self.W.shape[0]

    @property
    def dimension(self) -> int:
        return self.W.shape[1]

    def logits(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(X)
        if X.shape[1] != self.dimension:
            raise ClassifierError(
                f"feature dimension {X.shape[1]} does not match model dimension {self.dimension}"
            )
        return X @ self.W.T + self.b

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        z = self.logits(X)
        return softmax(z) if self.mode == "softmax" else sigmoid(z)

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=-1)

    def predict_multilabel(self, X: np.ndarray, threshold: float = 0.5) -> list[set[int]]:
        """Labels with probability strictly above the threshold."""
        if self.mode != "sigmoid":
            raise ClassifierError("predict_multilabel requires a sigmoid-mode model")
        probs = self.predict_proba(X)
        return [set(np.nonzero(row > threshold)[0].tolist()) for row in probs]

    def copy(self) -> "LinearClassifier":
        return LinearClassifier(
            W=self.W.copy(), b=self.b.copy(), mode=self.mode,
            provider_name=self.provider_name, manifest=dict(self.manifest),
        )

    def to_json(self) -> dict:
        return {
            "dimension": self.dimension,
            "n_classes": self.n_classes,
            "mode": self.mode,
            "W": self.W.tolist(),
            "b": self.b.tolist(),
            "provider": self.provider_name,
            "manifest": self.manifest,
        }

    @classmethod
    def from_json(cls, data: dict) -> "LinearClassifier":
        return cls(
            W=np.asarray(data["W"], dtype=np.float64),
            b=np.asarray(data["b"], dtype=np.float64),
            mode=data["mode"],
            provider_name=data.get("provider", ""),
            manifest=data.get("manifest", {}),
        )

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_json(), f, indent=1, sort_keys=True)

    @classmethod
    def load(cls, path: str) -> "LinearClassifier":
        with open(path, encoding="utf-8") as f:
            return cls.from_json(json.load(f))


def one_hot(labels: np.ndarray, n_classes: int) -> np.ndarray:
    out = np.zeros((len(labels), n_classes))
    out[np.arange(len(labels)), labels] = 1.0
    return out


def multi_hot(label_sets: list[set[int] | frozenset[int]], n_classes: int) -> np.ndarray:
    out = np.zeros((len(label_sets), n_classes))
    for i, labels in enumerate(label_sets):
        for j in labels:
            out[i, j] = 1.0
    return out


def cross_entropy_loss(model: LinearClassifier, X: np.ndarray, T: np.ndarray) -> float:
    """Mean cross-entropy of targets T against model probabilities."""
    P = np.clip(model.predict_proba(X), 1e-12, 1.0)
    if model.mode == "softmax":
        return float(-np.mean(np.sum(T * np.log(P), axis=1)))
    Pn = np.clip(1.0 - P, 1e-12, 1.0)
    return float(-np.mean(np.sum(T * np.log(P) + (1.0 - T) * np.log(Pn), axis=1)))


def loss_gradients(
    model: LinearClassifier, X: np.ndarray, T: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradients of the mean cross-entropy w.r.t. W and b.

    For both heads the per-example logit gradient is (p - t).
    """
    P = model.predict_proba(X)
    G = (P - T) / X.shape[0]
    return G.T @ X, G.sum(axis=0)


def train(
    X: np.ndarray,
    targets: np.ndarray,
    mode: str,
    config: TrainConfig | None = None,
    init: LinearClassifier | None = None,
    provider_name: str = "",
) -> LinearClassifier:
    """Mini-batch gradient descent on cross-entropy against (soft) targets.

    `targets` is an (N, n) matrix: one-hot rows for hard labels, arbitrary
    distributions (softmax) or per-class probabilities (sigmoid) otherwise.
    """
    if mode not in ("softmax", "sigmoid"):
        raise ClassifierError(f"unknown mode: {mode!r}")
    config = config or TrainConfig()
    X = np.asarray(X, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != targets.shape[0]:
        raise ClassifierError("feature and target shapes do not match")
    N, d = X.shape
    n = targets.shape[1]
    if init is not None:
        model = init.copy()
        if model.dimension != d or model.n_classes != n:
            raise ClassifierError("init model shape does not match data")
    else:
        model = LinearClassifier(
            W=np.zeros((n, d)), b=np.zeros(n), mode=mode, provider_name=provider_name
        )
    rng = np.random.default_rng(config.seed)
    steps_per_epoch = max(1, (N + config.batch_size - 1) // config.batch_size)
    total_steps = config.epochs * steps_per_epoch
    step = 0
    epoch_loss = []
    for _ in range(config.epochs):
        order = rng.permutation(N)
        for start in range(0, N, config.batch_size):
            idx = order[start : start + config.batch_size]
            gW, gb = loss_gradients(model, X[idx], targets[idx])
            lr = config.lr_at(step, total_steps)
            model.W -= lr * gW
            model.b -= lr * gb
            step += 1
            if not (np.all(np.isfinite(model.W)) and np.all(np.isfinite(model.b))):
                raise ClassifierError("non-finite parameters: learning rate too high")
        epoch_loss.append(cross_entropy_loss(model, X, targets))
    model.manifest["epoch_loss"] = epoch_loss
    return model
