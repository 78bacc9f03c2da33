"""Multimodal search over layout-parsed scans of archaeological archives."""

from .config import ServiceConfig, build_provider, load_config
from .context import (
    CaptionHit,
    Lexicon,
    build_context_bundle,
    clean_table,
    detect_in_image_caption,
    mine_referring_paragraphs,
    spell_correct,
    strip_formatting_tags,
)
from .embedding import (
    DEFAULT_DIM,
    Embedding,
    ExternalServiceProvider,
    HashingProvider,
    Provider,
    fnv1a64,
)
from .enhance import (
    BilateralParams,
    GrayImage,
    RgbImage,
    bilateral_filter,
    enhance,
    otsu_threshold,
    to_grayscale,
)
from .errors import (
    ConfigError,
    DocumentValidationError,
    ExtractionParseError,
    IndexingError,
    PersistenceError,
    ProviderError,
    RetrievalError,
    SarchError,
)
from .evaluation import (
    BenchmarkQuery,
    MetricsReport,
    PipelineMetrics,
    load_benchmark_file,
    load_judgments_file,
    precision_at_k,
    reciprocal_rank,
    resolve_judgments,
    run_benchmark,
)
from .indexing import (
    BM25Params,
    IndexUnit,
    InvertedIndex,
    VectorStore,
    bm25_score,
    keyword_topk,
    make_unit_id,
    tokenize,
)
from .model import (
    Block,
    ContextBundle,
    CorpusManifest,
    ExtractedDocument,
    ImageKind,
    Modality,
    Page,
    TableData,
    load_extraction_file,
    parse_extraction_document,
    parse_extraction_file,
)
from .persistence import PersistedIndex, load_index, save_index
from .pipeline import IngestResult, ingest_corpus_dir, ingest_documents
from .ranking import RankedEntry, RankedList
from .retrieval import (
    PipelineKind,
    Query,
    RRFParams,
    SearchEngine,
    extract_keywords,
    load_stopwords,
    rrf_fuse,
    run_embedding,
    run_hybrid,
    run_keyword,
)

__version__ = "0.1.0"
