"""Self-training: refine a classifier on unlabelled data with sharpened
soft targets under a KL objective, one corpus portion at a time."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .classifier import LinearClassifier, TrainConfig, loss_gradients


@dataclass
class SelfTrainConfig:
    batch_size: int = 128
    update_interval: int = 50
    passes: int = 1
    learning_rate: float = 0.05
    seed: int = 0

    @property
    def portion_size(self) -> int:
        return self.batch_size * self.update_interval


@dataclass
class PortionTrace:
    portion_index: int
    kl_before: float
    kl_after: float


def soft_targets(P: np.ndarray) -> np.ndarray:
    """Sharpen predictions: square each probability, normalize by column
    mass, then renormalize rows. A single-row P is its own fixed point.
    """
    P = np.asarray(P, dtype=np.float64)
    col_mass = P.sum(axis=0)
    if np.any(col_mass <= 0.0):
        raise ValueError("zero column mass: a class has no probability anywhere")
    unnorm = P**2 / col_mass
    return unnorm / unnorm.sum(axis=1, keepdims=True)


def soft_targets_sigmoid(P: np.ndarray) -> np.ndarray:
    """Per-class sharpening for independent-sigmoid outputs.

    Each class is treated as a Bernoulli pair (p, 1-p); the squaring and
    column-mass normalization is applied to the pair independently.
    """
    P = np.asarray(P, dtype=np.float64)
    pos_mass = P.sum(axis=0)
    neg_mass = (1.0 - P).sum(axis=0)
    if np.any(pos_mass <= 0.0) or np.any(neg_mass <= 0.0):
        raise ValueError("zero column mass in a Bernoulli pair")
    pos = P**2 / pos_mass
    neg = (1.0 - P) ** 2 / neg_mass
    return pos / (pos + neg)


def kl_divergence(Q: np.ndarray, P: np.ndarray) -> float:
    """Sum over rows and classes of q * log(q / p), with 0 log 0 = 0."""
    Q = np.asarray(Q, dtype=np.float64)
    P = np.asarray(P, dtype=np.float64)
    if Q.shape != P.shape:
        raise ValueError(f"shape mismatch: {Q.shape} vs {P.shape}")
    mask = Q > 0.0
    if np.any(mask & (P <= 0.0)):
        raise ValueError("support violation: Q > 0 where P = 0")
    out = np.zeros_like(Q)
    out[mask] = Q[mask] * np.log(Q[mask] / P[mask])
    return float(out.sum())


def _kl_sigmoid(Q: np.ndarray, P: np.ndarray) -> float:
    """KL summed over independent Bernoulli pairs."""
    return kl_divergence(Q, P) + kl_divergence(1.0 - Q, np.clip(1.0 - P, 1e-12, None))


def self_train(
    model: LinearClassifier,
    X: np.ndarray,
    config: SelfTrainConfig | None = None,
) -> tuple[LinearClassifier, list[PortionTrace]]:
    """Refine the model on unlabelled features X.

    The corpus is shuffled once (seeded), split into portions of
    batch_size * update_interval examples, and for each portion the current
    predictions are sharpened into a frozen target matrix Q; the model then
    takes update_interval mini-batch gradient steps towards Q before Q is
    recomputed on the next portion.
    """
    config = config or SelfTrainConfig()
    model = model.copy()
    X = np.asarray(X, dtype=np.float64)
    N = X.shape[0]
    if N == 0:
        raise ValueError("self_train requires a non-empty corpus")
    traces: list[PortionTrace] = []
    if config.passes <= 0:
        return model, traces
    rng = np.random.default_rng(config.seed)
    order = rng.permutation(N)
    M = config.portion_size
    sharpen = soft_targets if model.mode == "softmax" else soft_targets_sigmoid
    kl = kl_divergence if model.mode == "softmax" else _kl_sigmoid
    portion_index = 0
    for _ in range(config.passes):
        for start in range(0, N, M):
            idx = order[start : start + M]
            Xp = X[idx]
            Q = sharpen(model.predict_proba(Xp))
            kl_before = kl(Q, np.clip(model.predict_proba(Xp), 1e-12, None))
            m = len(idx)
            for step in range(config.update_interval):
                lo = (step * config.batch_size) % m
                batch = np.arange(lo, min(lo + config.batch_size, m))
                gW, gb = loss_gradients(model, Xp[batch], Q[batch])
                model.W -= config.learning_rate * gW
                model.b -= config.learning_rate * gb
            kl_after = kl(Q, np.clip(model.predict_proba(Xp), 1e-12, None))
            traces.append(PortionTrace(portion_index, kl_before, kl_after))
            portion_index += 1
    return model, traces


def traces_to_csv(traces: list[PortionTrace]) -> str:
    lines = ["portion_index,kl_loss_before,kl_loss_after"]
    lines += [f"{t.portion_index},{t.kl_before!r},{t.kl_after!r}" for t in traces]
    return "\n".join(lines) + "\n"
