"""Text embedders and the cosine primitive.

All embedders return unit-norm float64 vectors. :class:`HashingEmbedder`
is an offline hashed bag-of-words model; :class:`RemoteEmbedder` talks to
any endpoint following the common embeddings-API shape
(``{"model", "input": [...]}`` in, ``{"data": [{"embedding": [...]}]}`` out).
"""
from __future__ import annotations

import hashlib
import math
import os
import re
import threading
import time
from functools import lru_cache
from typing import Protocol, Sequence

import httpx
import numpy as np

from ._http import post_json
from .exceptions import EmbeddingError

_TOKEN_RE = re.compile(r"[a-z0-9]+")

EMBEDDING_KEY_ENV = "LINKRAG_EMBEDDING_API_KEY"


class Embedder(Protocol):
    identifier: str
    dimension: int

    def embed(self, text: str) -> np.ndarray: ...

    def embed_many(self, texts: Sequence[str]) -> np.ndarray: ...


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product of two unit vectors.

    Summed with :func:`math.fsum`, so the result is correctly rounded and
    independent of argument order.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return math.fsum((a * b).tolist())


def cosine_many(matrix: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Row-wise :func:`cosine`; bit-identical to calling it per row."""
    if matrix.shape[0] == 0:
        return np.zeros(0)
    if matrix.shape[1] != query.shape[0]:
        raise ValueError(f"dimension mismatch: {matrix.shape[1]} vs {query.shape[0]}")
    return np.fromiter(map(math.fsum, (matrix * query).tolist()), dtype=np.float64,
                       count=matrix.shape[0])


def _unit(vector: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vector))
    if norm == 0.0:
        raise ValueError("cannot normalise a zero vector")
    return vector / norm


def _check_text(text: str) -> str:
    if not isinstance(text, str) or not text.strip():
        raise ValueError("text to embed must be non-empty after trimming")
    return text


@lru_cache(maxsize=1 << 16)
def _hash_token(token: str, dimension: int) -> tuple[int, float]:
    data = token.encode("utf-8")
    slot = int.from_bytes(hashlib.blake2b(data, digest_size=8, person=b"lrag-idx").digest(), "big")
    sign = hashlib.blake2b(data, digest_size=1, person=b"lrag-sgn").digest()[0] & 1
    return slot % dimension, (1.0 if sign else -1.0)


class HashingEmbedder:
    """Signed feature hashing over lowercase alphanumeric tokens.

    Deterministic across processes and platforms (blake2b, not ``hash``).
    Text without any alphanumeric token is hashed as a single token so the
    output is never the zero vector.
    """

    def __init__(self, dimension: int = 256):
        if dimension < 1:
            raise ValueError("dimension must be positive")
        self.dimension = dimension
        self.identifier = f"hashing-bow-v1-d{dimension}"

    def tokens(self, text: str) -> list[str]:
        return _TOKEN_RE.findall(text.lower())

    def embed(self, text: str) -> np.ndarray:
        text = _check_text(text)
        vector = np.zeros(self.dimension)
        tokens = self.tokens(text) or [text.strip()]
        for token in tokens:
            slot, sign = _hash_token(token, self.dimension)
            vector[slot] += sign
        if not vector.any():
            # every token cancelled out; fall back to the hashed whole string
            slot, sign = _hash_token(text.strip(), self.dimension)
            vector[slot] = sign
        return _unit(vector)

    def embed_many(self, texts: Sequence[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.dimension))
        return np.vstack([self.embed(t) for t in texts])

    def __repr__(self):
        return f"HashingEmbedder(dimension={self.dimension})"


class RemoteEmbedder:
    """HTTP embeddings client with batching and exponential backoff."""

    def __init__(self, endpoint: str, model: str, api_key: str | None = None, *,
                 batch_size: int = 64, retries: int = 3, backoff: float = 0.5,
                 timeout: float = 30.0, dimension: int | None = None,
                 client: httpx.Client | None = None, sleep=time.sleep):
        self.endpoint = endpoint
        self.model = model
        self.api_key = api_key if api_key is not None else os.environ.get(EMBEDDING_KEY_ENV)
        self.batch_size = batch_size
        self.retries = retries
        self.backoff = backoff
        self.dimension = dimension
        self.identifier = f"remote:{model}"
        self._client = client or httpx.Client(timeout=timeout)
        self._sleep = sleep
        self._lock = threading.Lock()

    def _headers(self):
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    def _request(self, batch):
        body = post_json(self._client, self.endpoint, {"model": self.model, "input": list(batch)},
                         headers=self._headers(), retries=self.retries, backoff=self.backoff,
                         error_cls=EmbeddingError, sleep=self._sleep)
        try:
            items = sorted(body["data"], key=lambda item: item.get("index", 0))
            vectors = [np.asarray(item["embedding"], dtype=np.float64) for item in items]
        except (KeyError, TypeError, ValueError) as exc:
            raise EmbeddingError(f"malformed embeddings response: {exc}") from exc
        if len(vectors) != len(batch):
            raise EmbeddingError(f"expected {len(batch)} embeddings, got {len(vectors)}")
        return vectors

    def embed_many(self, texts: Sequence[str]) -> np.ndarray:
        texts = [_check_text(t) for t in texts]
        rows = []
        for start in range(0, len(texts), self.batch_size):
            rows.extend(self._request(texts[start:start + self.batch_size]))
        if not rows:
            return np.zeros((0, self.dimension or 0))
        with self._lock:
            if self.dimension is None:
                self.dimension = len(rows[0])
        if any(len(r) != self.dimension for r in rows):
            raise EmbeddingError(f"embedding dimension differs from {self.dimension}")
        return np.vstack([_unit(r) for r in rows])

    def embed(self, text: str) -> np.ndarray:
        return self.embed_many([text])[0]

    def close(self):
        self._client.close()
