"""End-to-end ingestion: clean, contextualize, classify, index, embed.

Stages, in order, for each parsed document:

1. clean: strip formatting tags from text and OCR, normalize tables,
   optionally spell-correct against a lexicon
2. contextualize: build a context bundle (caption, referring paragraphs,
   inner text) for every image and table block
3. classify: fill in the image kind for images that arrived without one
4. index: one BM25/vector unit per page of running text, plus one per image
   and table, embedded in batches per modality
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Sequence

from .context import (
    Lexicon,
    build_context_bundle,
    clean_table,
    mine_referring_paragraphs,
    resolve_caption,
    spell_correct,
    strip_formatting_tags,
)
from .embedding import ExternalServiceProvider, HashingProvider, Provider
from .errors import IndexingError, SarchError
from .indexing import IndexUnit, InvertedIndex, VectorStore, make_unit_id, tokenize
from .model import (
    Block,
    ContextBundle,
    ExtractedDocument,
    Modality,
    Page,
    build_manifest,
    load_extraction_file,
    manifest_to_dict,
    with_replaced_block,
)
from .persistence import PersistedIndex

DISPLAY_ROW_LIMIT = 5


@dataclass
class IngestResult:
    documents: list[ExtractedDocument]
    index: InvertedIndex
    stores: dict[Modality, VectorStore]
    manifest: dict
    display: dict[str, dict]

    def to_persisted(self) -> PersistedIndex:
        return PersistedIndex(
            index=self.index, stores=self.stores, manifest=self.manifest, display=self.display
        )


def _clean_block(block: Block, lexicon: Lexicon | None) -> Block:
    if block.kind is Modality.TABLE:
        table = block.table
        caption = strip_formatting_tags(table.caption) if table.caption else table.caption
        cleaned = clean_table(table.header, table.rows, caption=caption or None)
        return replace(block, table=cleaned, text=strip_formatting_tags(block.text))
    text = strip_formatting_tags(block.text)
    if lexicon is not None and text:
        text = spell_correct(text, lexicon)
    return replace(block, text=text)


def clean_document(doc: ExtractedDocument, lexicon: Lexicon | None = None) -> ExtractedDocument:
    """Tag-strip all block text, normalize tables, spell-correct prose and OCR."""
    pages = tuple(
        Page(page_no=page.page_no, blocks=tuple(_clean_block(b, lexicon) for b in page.blocks))
        for page in doc.pages
    )
    return replace(doc, pages=pages)


def build_bundles_for_document(doc: ExtractedDocument) -> dict[str, ContextBundle]:
    """Context bundle per image/table block id, mined from adjacent pages."""
    bundles: dict[str, ContextBundle] = {}
    pages = list(doc.pages)
    for i, page in enumerate(pages):
        previous = pages[i - 1] if i > 0 else None
        next_ = pages[i + 1] if i + 1 < len(pages) else None
        for block in page.blocks:
            if block.kind is Modality.TEXT:
                continue
            caption, ordinal = resolve_caption(block)
            paragraphs: list[str] = []
            if ordinal is not None:
                paragraphs = mine_referring_paragraphs(ordinal, block.kind, previous, page, next_)
            bundles[block.block_id] = build_context_bundle(block, caption=caption, paragraphs=paragraphs)
    return bundles


def classify_images(
    doc: ExtractedDocument, bundles: dict[str, ContextBundle], provider: Provider
) -> ExtractedDocument:
    """Fill in image_kind where the extraction did not provide one."""
    changed = doc
    for page in doc.pages:
        for block in page.blocks:
            if block.kind is not Modality.IMAGE or block.image_kind is not None:
                continue
            bundle = bundles.get(block.block_id)
            context_text = bundle.combined_text if bundle else block.text
            kind = provider.classify_image_kind(context_text)
            changed = with_replaced_block(changed, replace(block, image_kind=kind))
    return changed


def _page_text(page: Page) -> str:
    return "\n".join(b.text for b in page.blocks if b.kind is Modality.TEXT and b.text)


def _display_record(doc: ExtractedDocument, page: Page, block: Block | None, text: str, bundle: ContextBundle | None) -> dict:
    record: dict = {
        "doc_id": doc.doc_id,
        "title": doc.title,
        "page_no": page.page_no,
    }
    if block is None:
        record["modality"] = Modality.TEXT.value
        record["text"] = text
        return record
    record["block_id"] = block.block_id
    if block.kind is Modality.IMAGE:
        record["modality"] = Modality.IMAGE.value
        record["image_kind"] = block.image_kind.value if block.image_kind else None
    else:
        record["modality"] = Modality.TABLE.value
        record["header"] = list(block.table.header)
        record["rows"] = [list(r) for r in block.table.rows[:DISPLAY_ROW_LIMIT]]
        record["num_rows"] = len(block.table.rows)
    if bundle is not None:
        record["caption"] = bundle.caption
        record["ordinal"] = bundle.ordinal
        record["text"] = bundle.combined_text
    return record


def provider_hint(provider: Provider, stores: dict[Modality, VectorStore]) -> dict:
    dims = sorted({s.dim for s in stores.values()})
    dim = dims[0] if len(dims) == 1 else None
    if isinstance(provider, HashingProvider):
        return {"kind": "hash", "dim": provider.dim}
    if isinstance(provider, ExternalServiceProvider):
        return {"kind": "external", "dim": dim, "endpoint": provider.endpoint}
    return {"kind": type(provider).__name__, "dim": dim}


def index_documents(
    docs: Sequence[ExtractedDocument],
    bundles_by_doc: dict[str, dict[str, ContextBundle]],
    provider: Provider,
) -> tuple[InvertedIndex, dict[Modality, VectorStore], dict[str, dict]]:
    """Build the inverted index, vector stores and display records.

    Pages with no prose and bundles with no text yield no unit. Embeddings
    are requested in per-modality batches in unit insertion order.
    """
    index = InvertedIndex()
    display: dict[str, dict] = {}
    pending: dict[Modality, list[tuple[str, str]]] = {m: [] for m in Modality}

    for doc in docs:
        for page in doc.pages:
            text = _page_text(page)
            tokens = tokenize(text)
            if tokens:
                uid = make_unit_id(doc.doc_id, page.page_no, Modality.TEXT)
                index.add_unit(
                    IndexUnit(
                        unit_id=uid,
                        doc_id=doc.doc_id,
                        page_no=page.page_no,
                        modality=Modality.TEXT,
                        block_id=None,
                        token_count=len(tokens),
                    ),
                    tokens,
                )
                pending[Modality.TEXT].append((uid, text))
                display[uid] = _display_record(doc, page, None, text, None)
            for block in page.blocks:
                if block.kind is Modality.TEXT:
                    continue
                bundle = bundles_by_doc.get(doc.doc_id, {}).get(block.block_id)
                if bundle is None:
                    raise IndexingError(
                        f"no context bundle for block '{block.block_id}' of '{doc.doc_id}'"
                    )
                unit_tokens = tokenize(bundle.combined_text)
                if not unit_tokens:
                    continue
                uid = make_unit_id(doc.doc_id, page.page_no, block.kind, block.block_id)
                index.add_unit(
                    IndexUnit(
                        unit_id=uid,
                        doc_id=doc.doc_id,
                        page_no=page.page_no,
                        modality=block.kind,
                        block_id=block.block_id,
                        token_count=len(unit_tokens),
                    ),
                    unit_tokens,
                )
                pending[block.kind].append((uid, bundle.combined_text))
                display[uid] = _display_record(doc, page, block, bundle.combined_text, bundle)

    stores: dict[Modality, VectorStore] = {}
    for modality, items in pending.items():
        if not items:
            continue
        texts = [text for _, text in items]
        try:
            embeddings = provider.embed_batch(texts, modality)
        except ValueError as exc:
            raise IndexingError(
                f"embedding failed for {modality.value} units "
                f"({items[0][0]} .. {items[-1][0]}): {exc}"
            ) from exc
        store = VectorStore(modality=modality, dim=embeddings[0].dim)
        for (uid, _), emb in zip(items, embeddings):
            store.add(uid, emb)
        stores[modality] = store
    return index, stores, display


def ingest_documents(
    docs: Iterable[ExtractedDocument],
    provider: Provider,
    lexicon: Lexicon | None = None,
) -> IngestResult:
    cleaned = [clean_document(d, lexicon) for d in docs]
    build_manifest(cleaned)  # rejects duplicate doc ids before the expensive stages
    bundles_by_doc: dict[str, dict[str, ContextBundle]] = {}
    classified: list[ExtractedDocument] = []
    for doc in cleaned:
        bundles = build_bundles_for_document(doc)
        doc = classify_images(doc, bundles, provider)
        bundles_by_doc[doc.doc_id] = bundles
        classified.append(doc)
    index, stores, display = index_documents(classified, bundles_by_doc, provider)
    manifest_blob = {
        "corpus": manifest_to_dict(build_manifest(classified)),
        "provider": provider_hint(provider, stores),
        "units": {m.value: index.num_units(m) for m in Modality},
    }
    return IngestResult(
        documents=classified,
        index=index,
        stores=stores,
        manifest=manifest_blob,
        display=display,
    )


def load_corpus_dir(path: str | Path) -> list[ExtractedDocument]:
    """Parse every .json extraction file directly inside the directory, sorted by name."""
    directory = Path(path)
    if not directory.is_dir():
        raise SarchError(f"'{directory}' is not a directory")
    files = sorted(p for p in directory.iterdir() if p.suffix == ".json" and p.is_file())
    if not files:
        raise SarchError(f"no .json extraction files in '{directory}'")
    return [load_extraction_file(p) for p in files]


def ingest_corpus_dir(
    path: str | Path, provider: Provider, lexicon: Lexicon | None = None
) -> IngestResult:
    return ingest_documents(load_corpus_dir(path), provider, lexicon)


def contextualize_document(doc: ExtractedDocument) -> dict:
    """The document as a JSON-ready dict with a context object on every
    image and table block."""
    from .model import document_to_dict

    cleaned = clean_document(doc)
    bundles = build_bundles_for_document(cleaned)
    payload = document_to_dict(cleaned)
    for page_payload in payload["pages"]:
        for block_payload in page_payload["blocks"]:
            bundle = bundles.get(block_payload["block_id"])
            if bundle is None:
                continue
            block_payload["context"] = {
                "caption": bundle.caption,
                "ordinal": bundle.ordinal,
                "referring_paragraphs": list(bundle.referring_paragraphs),
                "inner_text": bundle.inner_text,
                "combined_text": bundle.combined_text,
            }
    return payload


def corpus_stats(result: IngestResult) -> dict:
    return dict(result.manifest)
