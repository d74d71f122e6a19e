"""Embedding providers and vector utilities.

Three interchangeable providers sit behind one ``embed(texts, granularity)``
interface:

* ``DeterministicProvider`` — hash-seeded unit vectors for tests and offline
  smoke runs; no model, fully reproducible.
* ``FileStoreProvider`` — reads a JSONL store of precomputed embeddings.
* ``RemoteProvider`` — calls a ``POST /embed`` HTTP service.

All vectors are unit-normalized on the way in, so cosine similarity is a
plain dot product.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path

import httpx
import numpy as np

TOKEN_ENV_VAR = "METAPHOR_EVAL_PROVIDER_TOKEN"
DEFAULT_CONCURRENCY = 8
_UNIT_TOL = 1e-6

GRANULARITIES = ("sentence", "token")


class EmbeddingError(Exception):
    """Base class for embedding failures."""


class TransientEmbeddingError(EmbeddingError):
    """Retryable: network trouble, 5xx, or rate limiting."""


class PermanentEmbeddingError(EmbeddingError):
    """Not retryable: bad request, auth failure, malformed response."""


@dataclass(frozen=True)
class ProviderDescriptor:
    kind: str
    model_name: str
    dim: int


@dataclass(frozen=True)
class EmbeddingVector:
    values: np.ndarray
    dim: int

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1 or arr.shape[0] != self.dim:
            raise EmbeddingError(f"expected a flat vector of dim {self.dim}, got shape {arr.shape}")
        object.__setattr__(self, "values", arr)

    @property
    def normalized(self) -> bool:
        return abs(float(np.linalg.norm(self.values)) - 1.0) <= _UNIT_TOL


def unit_vector(values) -> EmbeddingVector:
    """Renormalize to unit L2; zero vectors are unusable and rejected."""
    arr = np.asarray(values, dtype=np.float64).ravel()
    norm = float(np.linalg.norm(arr))
    if norm == 0.0 or not np.isfinite(norm):
        raise EmbeddingError("cannot normalize a zero or non-finite vector")
    return EmbeddingVector(arr / norm, arr.shape[0])


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Cosine similarity, clipped into [-1, 1] to absorb float drift."""
    if a.dim != b.dim:
        raise EmbeddingError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return float(np.clip(np.dot(a.values, b.values), -1.0, 1.0))


class DeterministicProvider:
    """Unit vectors seeded from a hash of (seed, text).

    The same text always maps to the same vector and distinct texts are
    almost surely far apart, which is all the test metrics need.  The
    granularity argument is accepted for interface parity but does not
    change the vector.
    """

    DIM = 16

    def __init__(self, seed: int = 0):
        self.seed = int(seed)
        self.descriptor = ProviderDescriptor("deterministic_test", f"det-{self.seed}", self.DIM)

    def embed(self, texts: list[str], granularity: str = "sentence") -> list[EmbeddingVector]:
        _check_granularity(granularity)
        out = []
        for text in texts:
            digest = hashlib.sha256(f"{self.seed}|{text}".encode("utf-8")).digest()
            rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
            out.append(unit_vector(rng.standard_normal(self.DIM)))
        return out


def _check_granularity(granularity: str):
    if granularity not in GRANULARITIES:
        raise ValueError(f"granularity must be one of {GRANULARITIES}, got {granularity!r}")


class FileStoreProvider:
    """Read-only store of precomputed embeddings.

    Format: a JSONL file whose first line is a header
    ``{"model": ..., "dim": ...}`` followed by one
    ``{"text", "granularity", "embedding"}`` object per line.  Vectors are
    renormalized on load.  Requests for texts absent from the store fail
    permanently; there is no model to fall back to.
    """

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self._table: dict[tuple[str, str], EmbeddingVector] = {}
        with open(self.path, encoding="utf-8") as f:
            header_line = f.readline()
            if not header_line.strip():
                raise EmbeddingError(f"{self.path}: empty embedding store")
            header = json.loads(header_line)
            if "dim" not in header:
                raise EmbeddingError(f"{self.path}: header must declare dim")
            dim = int(header["dim"])
            for lineno, line in enumerate(f, start=2):
                if not line.strip():
                    continue
                obj = json.loads(line)
                vec = unit_vector(obj["embedding"])
                if vec.dim != dim:
                    raise EmbeddingError(f"{self.path}, line {lineno}: expected dim {dim}, got {vec.dim}")
                self._table[(obj.get("granularity", "sentence"), obj["text"])] = vec
        self.descriptor = ProviderDescriptor("file_store", str(header.get("model", "")), dim)

    def embed(self, texts: list[str], granularity: str = "sentence") -> list[EmbeddingVector]:
        _check_granularity(granularity)
        out = []
        for text in texts:
            key = (granularity, text)
            if key not in self._table:
                raise PermanentEmbeddingError(f"{self.path}: no stored embedding for {text!r} ({granularity})")
            out.append(self._table[key])
        return out


class RemoteProvider:
    """HTTP embedding client with bounded concurrency and retry on transient errors.

    POSTs ``{"texts": [...], "granularity": ...}`` and expects
    ``{"model": str, "dim": int, "embeddings": [[...], ...]}`` in order.
    5xx and 429 responses and transport errors are retried with exponential
    backoff; other 4xx responses fail immediately.  The bearer token, when
    required, comes from the METAPHOR_EVAL_PROVIDER_TOKEN environment
    variable.  ``descriptor`` starts as a placeholder and is filled in by
    the first successful response.
    """

    def __init__(
        self,
        url: str,
        batch_size: int = 64,
        max_retries: int = 3,
        backoff_s: float = 0.2,
        concurrency: int = DEFAULT_CONCURRENCY,
        timeout_s: float = 30.0,
    ):
        base = url.rstrip("/")
        self.url = base if base.endswith("/embed") else base + "/embed"
        self.batch_size = batch_size
        self.max_retries = max_retries
        self.backoff_s = backoff_s
        self._gate = threading.BoundedSemaphore(concurrency)
        self._client = httpx.Client(timeout=timeout_s)
        self._sleep = time.sleep
        self.descriptor = ProviderDescriptor("remote_http", "", 0)

    def _headers(self) -> dict[str, str]:
        token = os.environ.get(TOKEN_ENV_VAR, "")
        if token:
            return {"Authorization": f"Bearer {token}"}
        return {}

    def _post_batch(self, texts: list[str], granularity: str) -> list[EmbeddingVector]:
        payload = {"texts": texts, "granularity": granularity}
        last_transient = None
        for attempt in range(self.max_retries + 1):
            if attempt:
                self._sleep(self.backoff_s * 2 ** (attempt - 1))
            try:
                with self._gate:
                    resp = self._client.post(self.url, json=payload, headers=self._headers())
            except httpx.HTTPError as exc:
                last_transient = TransientEmbeddingError(f"transport failure calling {self.url}: {exc}")
                continue
            if resp.status_code >= 500 or resp.status_code == 429:
                last_transient = TransientEmbeddingError(f"{self.url} returned {resp.status_code}")
                continue
            if resp.status_code != 200:
                raise PermanentEmbeddingError(f"{self.url} returned {resp.status_code}: {resp.text[:200]}")
            return self._parse(resp, len(texts))
        raise last_transient

    def _parse(self, resp, expected: int) -> list[EmbeddingVector]:
        try:
            body = resp.json()
            model = body["model"]
            dim = int(body["dim"])
            rows = body["embeddings"]
        except (ValueError, KeyError, TypeError) as exc:
            raise PermanentEmbeddingError(f"{self.url}: malformed response body: {exc}") from exc
        if not isinstance(rows, list) or len(rows) != expected:
            raise PermanentEmbeddingError(
                f"{self.url}: expected {expected} embeddings, got {len(rows) if isinstance(rows, list) else 'non-list'}"
            )
        vectors = []
        for row in rows:
            vec = unit_vector(row)
            if vec.dim != dim:
                raise PermanentEmbeddingError(f"{self.url}: embedding dim {vec.dim} does not match declared {dim}")
            vectors.append(vec)
        self.descriptor = ProviderDescriptor("remote_http", str(model), dim)
        return vectors

    def embed(self, texts: list[str], granularity: str = "sentence") -> list[EmbeddingVector]:
        _check_granularity(granularity)
        out: list[EmbeddingVector] = []
        for start in range(0, len(texts), self.batch_size):
            out.extend(self._post_batch(texts[start : start + self.batch_size], granularity))
        return out


class CachingProvider:
    """Memoizes another provider per (granularity, text).

    The cache can be dumped in the FileStoreProvider format, so an expensive
    remote run can be replayed offline later.
    """

    def __init__(self, inner):
        self.inner = inner
        self._cache: dict[tuple[str, str], EmbeddingVector] = {}

    @property
    def descriptor(self) -> ProviderDescriptor:
        return self.inner.descriptor

    def __len__(self) -> int:
        return len(self._cache)

    def embed(self, texts: list[str], granularity: str = "sentence") -> list[EmbeddingVector]:
        _check_granularity(granularity)
        missing = []
        queued = set()
        for text in texts:
            key = (granularity, text)
            if key not in self._cache and key not in queued:
                queued.add(key)
                missing.append((key, text))
        if missing:
            fresh = self.inner.embed([t for _, t in missing], granularity)
            for (key, _), vec in zip(missing, fresh):
                self._cache[key] = vec
        return [self._cache[(granularity, t)] for t in texts]

    def save(self, path: str | Path):
        desc = self.descriptor
        with open(path, "w", encoding="utf-8") as f:
            f.write(json.dumps({"model": desc.model_name, "dim": desc.dim}) + "\n")
            for (granularity, text), vec in sorted(self._cache.items()):
                f.write(
                    json.dumps(
                        {"text": text, "granularity": granularity, "embedding": vec.values.tolist()}
                    )
                    + "\n"
                )


def make_provider(spec: str):
    """Build a provider from a CLI-style spec.

    ``test:SEED`` for deterministic vectors, ``file:PATH`` for a JSONL
    store, ``http:URL`` for a remote service.  Everything but the prefix is
    passed through, so ``http:https://host/v1`` works.
    """
    kind, _, rest = spec.partition(":")
    if kind == "test":
        return DeterministicProvider(int(rest) if rest else 0)
    if kind == "file":
        if not rest:
            raise ValueError("file provider needs a path, e.g. file:embeddings.jsonl")
        return FileStoreProvider(rest)
    if kind == "http":
        if not rest:
            raise ValueError("http provider needs a URL, e.g. http:https://host:8000")
        return RemoteProvider(rest)
    raise ValueError(f"unknown provider spec {spec!r}; expected test:SEED, file:PATH, or http:URL")
