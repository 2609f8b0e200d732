"""Embedding providers: deterministic built-in vectors and a remote HTTP client."""

from __future__ import annotations

import hashlib
import threading
from collections import OrderedDict
from typing import Protocol

import numpy as np
import requests

from .corpus import tokenize


class EmbeddingError(RuntimeError):
    """Provider failure: unreachable service, bad dimensions, non-finite values."""


class EmbeddingProvider(Protocol):
    dimension: int
    name: str

    def embed_batch(self, texts: list[str]) -> np.ndarray: ...


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine similarity, clamped to [-1, 1]; zero vectors score 0."""
    if a.shape != b.shape:
        raise EmbeddingError(f"dimension mismatch: {a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip(float(a @ b) / (na * nb), -1.0, 1.0))


def _unit(v: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(v))
    if norm == 0.0:
        return v
    return v / norm


def _token_key(token: str) -> int:
    """Stable 64-bit hash of a token (independent of PYTHONHASHSEED)."""
    digest = hashlib.blake2b(token.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big")


def builtin_token_vector(token: str, dimension: int, seed: int) -> np.ndarray:
    """Deterministic pseudo-random unit vector for a token.

    Uses the counter-based Philox generator keyed by (seed, token hash), so
    vectors are bit-identical across runs, platforms, and processes.
    """
    if not token:
        raise EmbeddingError("cannot embed an empty token")
    rng = np.random.Generator(np.random.Philox(key=(seed & (2**64 - 1)) * 2**64 + _token_key(token)))
    v = rng.uniform(-1.0, 1.0, size=dimension)
    return _unit(v)


class _LRUCache:
    """Bounded, thread-safe string -> vector cache."""

    def __init__(self, maxsize: int) -> None:
        self._data: OrderedDict[str, np.ndarray] = OrderedDict()
        self._maxsize = maxsize
        self._lock = threading.Lock()

    def get(self, key: str) -> np.ndarray | None:
        with self._lock:
            v = self._data.get(key)
            if v is not None:
                self._data.move_to_end(key)
            return v

    def put(self, key: str, value: np.ndarray) -> None:
        with self._lock:
            self._data[key] = value
            self._data.move_to_end(key)
            if len(self._data) > self._maxsize:
                self._data.popitem(last=False)


class BuiltinProvider:
    """Offline provider: mean-pooled deterministic token vectors, unit-normalized.

    Pooling is order-free by construction, so multi-token phrases embed as
    the normalized mean of their token vectors.
    """

    def __init__(self, dimension: int = 256, seed: int = 0, cache_size: int = 100_000) -> None:
        self.dimension = dimension
        self.seed = seed
        self.name = f"builtin-d{dimension}-s{seed}"
        self._cache = _LRUCache(cache_size)

    def embed(self, text: str) -> np.ndarray:
        if not text or not text.strip():
            raise EmbeddingError("cannot embed an empty string")
        cached = self._cache.get(text)
        if cached is not None:
            return cached
        tokens = tokenize(text) or [text]
        vectors = [builtin_token_vector(t, self.dimension, self.seed) for t in tokens]
        pooled = _unit(np.mean(vectors, axis=0))
        self._cache.put(text, pooled)
        return pooled

    def embed_batch(self, texts: list[str]) -> np.ndarray:
        return np.stack([self.embed(t) for t in texts])


class RemoteProvider:
    """Client for the embedding sidecar (POST /embed, GET /health)."""

    def __init__(
        self,
        base_url: str,
        timeout: float = 30.0,
        cache_size: int = 100_000,
        batch_limit: int = 64,
    ) -> None:
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.batch_limit = batch_limit
        self._cache = _LRUCache(cache_size)
        try:
            resp = requests.get(f"{self.base_url}/health", timeout=timeout)
            resp.raise_for_status()
            health = resp.json()
        except (requests.RequestException, ValueError) as exc:
            raise EmbeddingError(f"embedding service unreachable at {self.base_url}: {exc}") from exc
        if health.get("status") != "ok":
            raise EmbeddingError(f"embedding service not ready: {health}")
        self.dimension = int(health["dimension"])
        self.name = f"remote:{self.base_url}"

    def embed_batch(self, texts: list[str]) -> np.ndarray:
        if any(not t or not t.strip() for t in texts):
            raise EmbeddingError("cannot embed empty strings")
        out: list[np.ndarray | None] = [self._cache.get(t) for t in texts]
        missing = [i for i, v in enumerate(out) if v is None]
        # Request misses in service-sized chunks.
        for start in range(0, len(missing), self.batch_limit):
            chunk = missing[start : start + self.batch_limit]
            batch = [texts[i] for i in chunk]
            try:
                resp = requests.post(
                    f"{self.base_url}/embed", json={"texts": batch}, timeout=self.timeout
                )
                resp.raise_for_status()
                payload = resp.json()
            except (requests.RequestException, ValueError) as exc:
                raise EmbeddingError(f"embed request failed: {exc}") from exc
            vectors = np.asarray(payload["vectors"], dtype=np.float64)
            if vectors.shape != (len(batch), self.dimension):
                raise EmbeddingError(
                    f"embedding service returned shape {vectors.shape}, "
                    f"expected ({len(batch)}, {self.dimension})"
                )
            if not np.all(np.isfinite(vectors)):
                raise EmbeddingError("embedding service returned non-finite values")
            for i, vec in zip(chunk, vectors):
                unit = _unit(vec)
                self._cache.put(texts[i], unit)
                out[i] = unit
        return np.stack(out)  # type: ignore[arg-type]


def embed_batch(provider: EmbeddingProvider, texts: list[str]) -> np.ndarray:
    """Order-preserving batch embedding; one unit-norm row per input text."""
    if not texts:
        return np.zeros((0, provider.dimension))
    return provider.embed_batch(texts)


def make_provider(spec: str, seed: int = 0, dimension: int = 256) -> EmbeddingProvider:
    """"builtin" or a base URL for the remote sidecar."""
    if spec == "builtin":
        return BuiltinProvider(dimension=dimension, seed=seed)
    return RemoteProvider(spec)
