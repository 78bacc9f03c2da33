"""Query model, the three retrieval pipelines and the search engine facade.

The keyword pipeline runs BM25 over the query's modality partition, the
embedding pipeline runs exhaustive cosine search in the matching vector
store, and the hybrid pipeline fuses both with reciprocal rank fusion.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Callable, Mapping

from .embedding import Provider
from .errors import RetrievalError
from .indexing import BM25Params, InvertedIndex, VectorStore, keyword_topk, tokenize
from .model import Modality
from .ranking import RankedList
from .persistence import PersistedIndex


class PipelineKind(str, Enum):
    KEYWORD = "keyword"
    EMBEDDING = "embedding"
    HYBRID = "hybrid"


@dataclass(frozen=True)
class Query:
    text: str
    modality: Modality
    pipeline: PipelineKind
    k: int = 5

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("query text must be non-empty")
        if self.k < 1:
            raise ValueError("k must be at least 1")


@dataclass(frozen=True)
class RRFParams:
    k_rrf: float = 60.0


# when fusing, both sub-pipelines run at least this deep so the fused head is
# stable even for small k
HYBRID_CANDIDATE_DEPTH = 50


def extract_keywords(text: str, stopwords: frozenset[str]) -> list[str]:
    """Lowercased query terms minus stopwords, order and duplicates kept.

    A query made entirely of stopwords falls back to all its tokens rather
    than matching nothing.
    """
    tokens = tokenize(text)
    kept = [t for t in tokens if t not in stopwords]
    return kept if kept else tokens


def rrf_fuse(lists: list[RankedList], params: RRFParams = RRFParams(), k: int | None = None) -> RankedList:
    """Reciprocal rank fusion: fused(u) = sum over lists of 1/(k_rrf + rank(u))."""
    if not lists:
        raise ValueError("rrf_fuse needs at least one ranked list")
    scores: dict[str, float] = {}
    for ranked in lists:
        for entry in ranked:
            scores[entry.unit_id] = scores.get(entry.unit_id, 0.0) + 1.0 / (params.k_rrf + entry.rank)
    fused = RankedList.from_scored(scores.items())
    return fused if k is None else fused.truncate(k)


def run_keyword(
    query: Query,
    index: InvertedIndex,
    stopwords: frozenset[str],
    params: BM25Params = BM25Params(),
) -> RankedList:
    terms = extract_keywords(query.text, stopwords)
    return keyword_topk(terms, query.modality, index, query.k, params)


def run_embedding(
    query: Query,
    stores: Mapping[Modality, VectorStore],
    provider: Provider,
) -> RankedList:
    store = stores.get(query.modality)
    if store is None:
        raise RetrievalError(f"no vector store for modality '{query.modality.value}'")
    embedded = provider.embed_text(query.text, query.modality)
    return store.vector_topk(embedded.vector, query.k)


def run_hybrid(
    query: Query,
    index: InvertedIndex,
    stores: Mapping[Modality, VectorStore],
    provider: Provider,
    stopwords: frozenset[str],
    bm25: BM25Params = BM25Params(),
    rrf: RRFParams = RRFParams(),
) -> RankedList:
    """Fuse keyword and embedding rankings; either sub-pipeline failing fails the query."""
    depth = max(query.k, HYBRID_CANDIDATE_DEPTH)
    deep = replace(query, k=depth)
    keyword_list = run_keyword(deep, index, stopwords, bm25)
    embedding_list = run_embedding(deep, stores, provider)
    return rrf_fuse([keyword_list, embedding_list], rrf, k=query.k)


def load_stopwords(path: str | Path | None = None) -> frozenset[str]:
    """Stopword list, one lowercase word per line; blank lines ignored."""
    if path is None:
        text = resources.files("sarch.data").joinpath("stopwords.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return frozenset(line.strip().lower() for line in text.splitlines() if line.strip())


@dataclass
class SearchEngine:
    """Everything needed to answer queries: index, stores, provider, metadata."""

    index: InvertedIndex
    stores: dict[Modality, VectorStore]
    provider: Provider
    manifest: dict
    display: dict[str, dict] = field(default_factory=dict)
    stopwords: frozenset[str] = frozenset()
    bm25: BM25Params = BM25Params()
    rrf: RRFParams = RRFParams()

    @classmethod
    def from_persisted(
        cls,
        persisted: PersistedIndex,
        provider: Provider,
        stopwords: frozenset[str] | None = None,
    ) -> "SearchEngine":
        return cls(
            index=persisted.index,
            stores=persisted.stores,
            provider=provider,
            manifest=persisted.manifest,
            display=persisted.display,
            stopwords=stopwords if stopwords is not None else load_stopwords(),
        )

    def search(self, query: Query) -> RankedList:
        if query.pipeline is PipelineKind.KEYWORD:
            return run_keyword(query, self.index, self.stopwords, self.bm25)
        if query.pipeline is PipelineKind.EMBEDDING:
            return run_embedding(query, self.stores, self.provider)
        return run_hybrid(
            query, self.index, self.stores, self.provider, self.stopwords, self.bm25, self.rrf
        )

    def runners(self) -> dict[str, Callable[[Query], RankedList]]:
        """One callable per pipeline, each ignoring the query's own pipeline field."""

        def make(kind: PipelineKind) -> Callable[[Query], RankedList]:
            def run(query: Query) -> RankedList:
                return self.search(replace(query, pipeline=kind))

            return run

        return {kind.value: make(kind) for kind in PipelineKind}
