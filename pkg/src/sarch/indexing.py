"""Page-level search units, the BM25 inverted index and per-modality vector stores.

Indexable units are pages, one unit per modality present on the page: the
page's running text forms a text unit, and every image or table block forms
its own unit whose searchable text is the context bundle built around it.
BM25 statistics (document counts, average length) are kept per modality so
scores in one partition are unaffected by the others.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from math import log

import numpy as np

from .embedding import Embedding, Provider
from .errors import IndexingError
from .model import Modality
from .ranking import RankedList

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase word tokens; punctuation and underscores separate, digits kept."""
    return _TOKEN_RE.findall(text.lower())


def make_unit_id(doc_id: str, page_no: int, modality: Modality, block_id: str | None = None) -> str:
    if modality is Modality.TEXT:
        return f"{doc_id}:p{page_no}:text"
    if block_id is None:
        raise ValueError("image and table units need a block id")
    return f"{doc_id}:p{page_no}:{modality.value}:{block_id}"


@dataclass(frozen=True)
class IndexUnit:
    unit_id: str
    doc_id: str
    page_no: int
    modality: Modality
    block_id: str | None
    token_count: int


@dataclass(frozen=True)
class BM25Params:
    k1: float = 1.2
    b: float = 0.75


@dataclass
class _Partition:
    # term -> list of (unit_id, term frequency), in insertion order
    postings: dict[str, list[tuple[str, int]]] = field(default_factory=dict)
    unit_ids: list[str] = field(default_factory=list)
    total_tokens: int = 0


@dataclass
class InvertedIndex:
    units: dict[str, IndexUnit] = field(default_factory=dict)
    partitions: dict[Modality, _Partition] = field(default_factory=dict)

    def add_unit(self, unit: IndexUnit, tokens: list[str]) -> None:
        if unit.unit_id in self.units:
            raise IndexingError(f"duplicate unit id '{unit.unit_id}'")
        if not tokens:
            raise IndexingError(f"unit '{unit.unit_id}' has no tokens")
        self.units[unit.unit_id] = unit
        part = self.partitions.setdefault(unit.modality, _Partition())
        part.unit_ids.append(unit.unit_id)
        part.total_tokens += len(tokens)
        counts: dict[str, int] = {}
        for t in tokens:
            counts[t] = counts.get(t, 0) + 1
        for term, tf in counts.items():
            part.postings.setdefault(term, []).append((unit.unit_id, tf))

    def partition(self, modality: Modality) -> _Partition:
        return self.partitions.get(modality, _Partition())

    def num_units(self, modality: Modality) -> int:
        return len(self.partition(modality).unit_ids)

    def avg_length(self, modality: Modality) -> float:
        part = self.partition(modality)
        if not part.unit_ids:
            return 0.0
        return part.total_tokens / len(part.unit_ids)

    def idf(self, term: str, modality: Modality) -> float:
        part = self.partition(modality)
        n = len(part.unit_ids)
        df = len(part.postings.get(term, ()))
        return log(1.0 + (n - df + 0.5) / (df + 0.5))


def bm25_score(
    query_terms: list[str],
    unit_id: str,
    index: InvertedIndex,
    params: BM25Params = BM25Params(),
) -> float:
    """Score one unit against the query, duplicates in the query counting twice."""
    unit = index.units[unit_id]
    part = index.partition(unit.modality)
    avg = index.avg_length(unit.modality)
    score = 0.0
    for term in query_terms:
        tf = 0
        for uid, freq in part.postings.get(term, ()):
            if uid == unit_id:
                tf = freq
                break
        if tf == 0:
            continue
        idf = index.idf(term, unit.modality)
        denom = tf + params.k1 * (1.0 - params.b + params.b * unit.token_count / avg)
        score += idf * tf * (params.k1 + 1.0) / denom
    return score


def keyword_topk(
    query_terms: list[str],
    modality: Modality,
    index: InvertedIndex,
    k: int,
    params: BM25Params = BM25Params(),
) -> RankedList:
    """Top-k BM25 matches in one modality partition.

    Accumulates over postings lists so only units containing at least one
    query term appear; zero-score units never enter the result.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    part = index.partition(modality)
    n = len(part.unit_ids)
    if n == 0:
        return RankedList(entries=())
    avg = index.avg_length(modality)
    scores: dict[str, float] = {}
    for term in query_terms:
        postings = part.postings.get(term)
        if not postings:
            continue
        idf = log(1.0 + (n - len(postings) + 0.5) / (len(postings) + 0.5))
        for uid, tf in postings:
            length = index.units[uid].token_count
            denom = tf + params.k1 * (1.0 - params.b + params.b * length / avg)
            scores[uid] = scores.get(uid, 0.0) + idf * tf * (params.k1 + 1.0) / denom
    return RankedList.from_scored(scores.items()).truncate(k)


@dataclass
class VectorStore:
    """Exhaustive cosine-similarity store for one modality.

    Vectors are stored unit-normalized in float32; similarity against the
    (also normalized) query reduces to a dot product computed in float64.
    """

    modality: Modality
    dim: int
    unit_ids: list[str] = field(default_factory=list)
    _rows: list[np.ndarray] = field(default_factory=list)
    _matrix: np.ndarray | None = None

    def add(self, unit_id: str, embedding: Embedding) -> None:
        if embedding.dim != self.dim:
            raise IndexingError(
                f"vector for '{unit_id}' has dim {embedding.dim}, store expects {self.dim}"
            )
        if embedding.modality is not self.modality:
            raise IndexingError(
                f"vector for '{unit_id}' is {embedding.modality.value}, store is {self.modality.value}"
            )
        self.unit_ids.append(unit_id)
        self._rows.append(np.asarray(embedding.vector, dtype=np.float32))
        self._matrix = None

    @property
    def matrix(self) -> np.ndarray:
        if self._matrix is None:
            if self._rows:
                self._matrix = np.vstack(self._rows)
            else:
                self._matrix = np.zeros((0, self.dim), dtype=np.float32)
        return self._matrix

    def __len__(self) -> int:
        return len(self.unit_ids)

    @classmethod
    def from_matrix(cls, modality: Modality, unit_ids: list[str], matrix: np.ndarray) -> "VectorStore":
        if matrix.dtype != np.float32:
            matrix = matrix.astype(np.float32)
        if matrix.shape[0] != len(unit_ids):
            raise IndexingError("vector block row count disagrees with unit id count")
        store = cls(modality=modality, dim=int(matrix.shape[1]), unit_ids=list(unit_ids))
        store._rows = [matrix[i] for i in range(matrix.shape[0])]
        store._matrix = matrix
        return store

    def vector_topk(self, query: np.ndarray, k: int) -> RankedList:
        if k < 1:
            raise ValueError("k must be at least 1")
        if len(self.unit_ids) == 0:
            return RankedList(entries=())
        q = np.asarray(query, dtype=np.float64)
        if q.shape != (self.dim,):
            raise ValueError(f"query vector must have dim {self.dim}")
        scores = self.matrix.astype(np.float64) @ q
        return RankedList.from_scored(zip(self.unit_ids, scores.tolist())).truncate(k)
