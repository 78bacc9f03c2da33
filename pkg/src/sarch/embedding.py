"""Embedding and image-classification providers.

Real deployments plug modality-specific neural encoders in through the
external-service provider; everything else in the engine only depends on the
small provider interface below. The built-in hashing provider is fully
deterministic, which keeps indexes reproducible and lets tests pin exact
vectors.

Wire contract of the external service:

    POST {endpoint}/embed     {"modality": "text|image|table", "texts": [...]}
        -> {"dim": N, "vectors": [[...], ...]}
    POST {endpoint}/classify  {"texts": [...]}
        -> {"labels": ["map"|"photograph"|"site_layout"|"figure", ...]}
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Sequence

import httpx
import numpy as np

from .errors import ProviderError
from .model import ImageKind, Modality

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK64 = 0xFFFFFFFFFFFFFFFF

# single seed byte mixed into every token hash, one per modality, so the same
# text embeds differently per modality and per-modality indexes stay disjoint
MODALITY_TAG = {Modality.TEXT: 0, Modality.IMAGE: 1, Modality.TABLE: 2}

DEFAULT_DIM = 256

EMBED_BATCH_LIMIT = 64


@dataclass(frozen=True)
class Embedding:
    vector: np.ndarray
    modality: Modality

    @property
    def dim(self) -> int:
        return int(self.vector.shape[0])


class Provider(Protocol):
    """Embedding + zero-shot image classification backend."""

    def embed_text(self, text: str, modality: Modality) -> Embedding: ...

    def embed_batch(self, texts: Sequence[str], modality: Modality) -> list[Embedding]: ...

    def classify_image_kind(self, image_context: str) -> ImageKind: ...


def fnv1a64(data: bytes) -> int:
    """FNV-1a 64-bit hash."""
    h = _FNV_OFFSET
    for byte in data:
        h ^= byte
        h = (h * _FNV_PRIME) & _MASK64
    return h


def _tokenize(text: str) -> list[str]:
    tokens: list[str] = []
    current: list[str] = []
    for ch in text.lower():
        if ch.isalnum():
            current.append(ch)
        elif current:
            tokens.append("".join(current))
            current = []
    if current:
        tokens.append("".join(current))
    return tokens


# keyword votes for the stub zero-shot classifier; ties resolve by the class
# priority map > photograph > site_layout, and no hits at all means figure
_KIND_KEYWORDS: list[tuple[ImageKind, frozenset[str]]] = [
    (ImageKind.MAP, frozenset({"map", "maps", "site", "sites", "scale", "river", "rivers", "region", "basin", "km", "miles"})),
    (ImageKind.PHOTOGRAPH, frozenset({"photograph", "photo", "photos", "view", "plate", "specimen"})),
    (ImageKind.SITE_LAYOUT, frozenset({"plan", "layout", "trench", "trenches", "excavated", "excavation", "section", "mound"})),
]


def keyword_classify(image_context: str) -> ImageKind:
    tokens = _tokenize(image_context)
    best_kind = ImageKind.FIGURE
    best_hits = 0
    for kind, keywords in _KIND_KEYWORDS:
        hits = sum(1 for t in tokens if t in keywords)
        if hits > best_hits:
            best_kind, best_hits = kind, hits
    return best_kind


@dataclass(frozen=True)
class HashingProvider:
    """Deterministic test/offline provider.

    Embedding scheme: lowercase, split on non-alphanumerics, FNV-1a-64 each
    token prefixed by the modality tag byte, accumulate +/-1 (hash parity) at
    index (hash mod dim), then L2-normalize. Stateless and safe for
    concurrent use.
    """

    dim: int = DEFAULT_DIM

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("embedding dimension must be positive")

    def embed_text(self, text: str, modality: Modality) -> Embedding:
        if not text.strip():
            raise ValueError("cannot embed empty text")
        tag = bytes([MODALITY_TAG[modality]])
        acc = np.zeros(self.dim, dtype=np.float64)
        tokens = _tokenize(text)
        if not tokens:
            raise ValueError("text has no alphanumeric tokens to embed")
        for token in tokens:
            h = fnv1a64(tag + token.encode("utf-8"))
            acc[h % self.dim] += 1.0 if h % 2 == 0 else -1.0
        norm = float(np.linalg.norm(acc))
        if norm == 0.0:
            raise ValueError("token contributions cancelled to the zero vector")
        return Embedding(vector=acc / norm, modality=modality)

    def embed_batch(self, texts: Sequence[str], modality: Modality) -> list[Embedding]:
        return [self.embed_text(t, modality) for t in texts]

    def classify_image_kind(self, image_context: str) -> ImageKind:
        return keyword_classify(image_context)


@dataclass
class ExternalServiceProvider:
    """Client for a model-serving endpoint implementing the wire contract.

    Requests are batched (at most EMBED_BATCH_LIMIT texts each) and issued
    over a pooled connection. Transport failures and 5xx responses raise a
    retriable ProviderError carrying the endpoint and status.
    """

    endpoint: str
    model_names: dict[Modality, str] = field(default_factory=dict)
    timeout: float = 30.0
    _client: httpx.Client | None = None

    def __post_init__(self):
        if self._client is None:
            self._client = httpx.Client(timeout=self.timeout)

    def close(self) -> None:
        if self._client is not None:
            self._client.close()

    def _post(self, path: str, payload: dict) -> dict:
        url = self.endpoint.rstrip("/") + path
        try:
            response = self._client.post(url, json=payload)
        except httpx.HTTPError as exc:
            raise ProviderError(
                f"transport failure: {exc}", retriable=True, endpoint=self.endpoint
            ) from exc
        if response.status_code >= 500:
            raise ProviderError(
                "provider server error",
                retriable=True,
                endpoint=self.endpoint,
                status=response.status_code,
            )
        if response.status_code != 200:
            raise ProviderError(
                "provider rejected the request",
                retriable=False,
                endpoint=self.endpoint,
                status=response.status_code,
            )
        try:
            return response.json()
        except ValueError as exc:
            raise ProviderError(
                f"provider returned a non-JSON body: {exc}",
                retriable=False,
                endpoint=self.endpoint,
            ) from exc

    def _embed_chunk(self, texts: Sequence[str], modality: Modality) -> list[Embedding]:
        payload: dict = {"modality": modality.value, "texts": list(texts)}
        model = self.model_names.get(modality)
        if model:
            payload["model"] = model
        body = self._post("/embed", payload)
        try:
            dim = int(body["dim"])
            vectors = body["vectors"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ProviderError(
                f"malformed embed response: {exc}", retriable=False, endpoint=self.endpoint
            ) from exc
        if len(vectors) != len(texts):
            raise ProviderError(
                f"embed response has {len(vectors)} vectors for {len(texts)} texts",
                retriable=False,
                endpoint=self.endpoint,
            )
        out: list[Embedding] = []
        for vec in vectors:
            arr = np.asarray(vec, dtype=np.float64)
            if arr.shape != (dim,):
                raise ProviderError(
                    "embed response vector length disagrees with dim",
                    retriable=False,
                    endpoint=self.endpoint,
                )
            norm = float(np.linalg.norm(arr))
            if not np.isfinite(norm) or norm == 0.0:
                raise ProviderError(
                    "embed response contained a zero or non-finite vector",
                    retriable=False,
                    endpoint=self.endpoint,
                )
            out.append(Embedding(vector=arr / norm, modality=modality))
        return out

    def embed_batch(self, texts: Sequence[str], modality: Modality) -> list[Embedding]:
        for t in texts:
            if not t.strip():
                raise ValueError("cannot embed empty text")
        out: list[Embedding] = []
        for start in range(0, len(texts), EMBED_BATCH_LIMIT):
            out.extend(self._embed_chunk(texts[start : start + EMBED_BATCH_LIMIT], modality))
        return out

    def embed_text(self, text: str, modality: Modality) -> Embedding:
        return self.embed_batch([text], modality)[0]

    def classify_image_kind(self, image_context: str) -> ImageKind:
        body = self._post("/classify", {"texts": [image_context]})
        try:
            label = body["labels"][0]
        except (KeyError, IndexError, TypeError) as exc:
            raise ProviderError(
                f"malformed classify response: {exc}", retriable=False, endpoint=self.endpoint
            ) from exc
        try:
            return ImageKind(label)
        except ValueError:
            raise ProviderError(
                f"provider returned unknown image kind '{label}'",
                retriable=False,
                endpoint=self.endpoint,
            ) from None
