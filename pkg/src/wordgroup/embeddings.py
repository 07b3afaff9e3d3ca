"""Sentence embedding providers and cosine similarity.

Two providers share one interface:

* ``BuiltinNgramProvider``: signed feature hashing of token unigrams and
  adjacent-token bigrams, L2-normalised. Deterministic and offline. Features
  are hashed with BLAKE2b (8-byte digest, key ``HASH_KEY``); the low bits pick
  the bucket and the top bit the sign.
* ``ExternalServiceProvider``: posts ``{"texts": [...]}`` to an HTTP endpoint
  and expects ``{"vectors": [[...], ...]}`` back.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
import urllib.error
import urllib.request
from concurrent.futures import ThreadPoolExecutor
from typing import Sequence

import numpy as np

log = logging.getLogger(__name__)

BUILTIN_NGRAM = "builtin_ngram"
EXTERNAL_SERVICE = "external_service"
DEFAULT_DIMENSION = 4096
HASH_KEY = b"wordgroup-ngram-v1"
ENV_ENDPOINT = "LWG_EMBED_ENDPOINT"
ENV_DIM = "LWG_EMBED_DIM"


class ProviderError(RuntimeError):
    pass


class EmbeddingProvider:
    name: str
    dimension: int
    mode: str

    def embed(self, text: str) -> np.ndarray:
        return self.embed_many([text])[0]

    def embed_many(self, texts: Sequence[str]) -> list[np.ndarray]:
        raise NotImplementedError


def ngram_features(text: str) -> list[str]:
    tokens = text.split()
    feats = ["u\x1f" + t for t in tokens]
    feats += ["b\x1f" + a + "\x1f" + b for a, b in zip(tokens, tokens[1:])]
    return feats


def hash_feature(feature: str, dimension: int) -> tuple[int, float]:
    h = int.from_bytes(hashlib.blake2b(feature.encode("utf-8"), digest_size=8, key=HASH_KEY).digest(), "big")
    sign = -1.0 if h >> 63 else 1.0
    return h % dimension, sign


class BuiltinNgramProvider(EmbeddingProvider):
    mode = BUILTIN_NGRAM

    def __init__(self, dimension: int = DEFAULT_DIMENSION):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = dimension
        self.name = f"ngram-hash-{dimension}"
        self._cache: dict[str, tuple[int, float]] = {}

    def _slot(self, feature: str) -> tuple[int, float]:
        slot = self._cache.get(feature)
        if slot is None:
            slot = self._cache[feature] = hash_feature(feature, self.dimension)
        return slot

    def embed_one(self, text: str) -> np.ndarray:
        feats = ngram_features(text)
        if not feats:
            raise ValueError("cannot embed empty text")
        vec = np.zeros(self.dimension)
        for f in feats:
            i, sign = self._slot(f)
            vec[i] += sign
        norm = np.linalg.norm(vec)
        if norm == 0:
            # every feature cancelled out through signed collisions
            raise ProviderError(f"hashed features of {text!r} sum to zero")
        return vec / norm

    def embed_many(self, texts: Sequence[str]) -> list[np.ndarray]:
        return [self.embed_one(t) for t in texts]


class ExternalServiceProvider(EmbeddingProvider):
    mode = EXTERNAL_SERVICE

    def __init__(
        self,
        endpoint: str,
        dimension: int,
        *,
        batch_size: int = 64,
        max_in_flight: int = 4,
        retries: int = 3,
        timeout: float = 30.0,
        backoff: float = 0.5,
    ):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.endpoint = endpoint
        self.dimension = dimension
        self.name = f"external:{endpoint}"
        self.batch_size = max(1, batch_size)
        self.max_in_flight = max(1, max_in_flight)
        self.retries = max(0, retries)
        self.timeout = timeout
        self.backoff = backoff

    @classmethod
    def from_env(cls, endpoint: str | None = None, dimension: int | None = None, **kw) -> "ExternalServiceProvider":
        endpoint = endpoint or os.environ.get(ENV_ENDPOINT)
        if not endpoint:
            raise ProviderError(f"no embedding endpoint configured (set {ENV_ENDPOINT})")
        if dimension is None:
            raw = os.environ.get(ENV_DIM)
            if not raw:
                raise ProviderError(f"no embedding dimension configured (set {ENV_DIM})")
            dimension = int(raw)
        return cls(endpoint, dimension, **kw)

    def _post(self, texts: list[str]) -> list[np.ndarray]:
        body = json.dumps({"texts": texts}, ensure_ascii=False).encode("utf-8")
        last: Exception | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            req = urllib.request.Request(
                self.endpoint, data=body, headers={"Content-Type": "application/json"}, method="POST"
            )
            try:
                with urllib.request.urlopen(req, timeout=self.timeout) as resp:
                    payload = json.loads(resp.read().decode("utf-8"))
                return self._vectors(payload, len(texts))
            except urllib.error.HTTPError as e:
                if e.code < 500:
                    raise ProviderError(f"embedding service {self.endpoint} rejected the request: {e}") from e
                last = e
            except (urllib.error.URLError, OSError, json.JSONDecodeError) as e:
                last = e
            log.warning("embedding request failed (attempt %d/%d): %s", attempt + 1, self.retries + 1, last)
        raise ProviderError(f"embedding service {self.endpoint} unreachable: {last}")

    def _vectors(self, payload, expected: int) -> list[np.ndarray]:
        vectors = payload.get("vectors") if isinstance(payload, dict) else None
        if not isinstance(vectors, list) or len(vectors) != expected:
            raise ProviderError("embedding service returned a malformed response")
        out = []
        for v in vectors:
            arr = np.asarray(v, dtype=float)
            if arr.shape != (self.dimension,):
                raise ProviderError(f"expected vectors of dimension {self.dimension}, got shape {arr.shape}")
            out.append(arr)
        return out

    def embed_many(self, texts: Sequence[str]) -> list[np.ndarray]:
        texts = list(texts)
        if any(not t.strip() for t in texts):
            raise ValueError("cannot embed empty text")
        batches = [texts[i : i + self.batch_size] for i in range(0, len(texts), self.batch_size)]
        if len(batches) <= 1 or self.max_in_flight == 1:
            results = [self._post(b) for b in batches]
        else:
            with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
                results = list(pool.map(self._post, batches))
        return [v for batch in results for v in batch]


def cosine(u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0 or nv == 0:
        raise ValueError("cosine similarity is undefined for a zero vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))
