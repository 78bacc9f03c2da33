"""Core document model and the canonical on-disk extraction format.

An extraction file is a single UTF-8 JSON object describing one layout-parsed
document:

    {
      "doc_id": "...", "title": "...", "source_path": "...",
      "pages": [
        {"page_no": 1,
         "blocks": [
            {"block_id": "...", "kind": "text|image|table",
             "bbox": [x0, y0, x1, y1], "text": "...",
             "image_kind": "map|photograph|site_layout|figure",   # image blocks
             "table": {"header": [...], "rows": [[...], ...],     # table blocks
                       "caption": "..."}}
         ]}
      ]
    }

Field names are case-sensitive. Table rows may be ragged here; they are
normalized later by the cleaning stage. ``image_kind`` may be omitted on an
image block (the ingest pipeline classifies it), but is rejected on any other
block kind, as is an unknown value.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .errors import DocumentValidationError, ExtractionParseError

NAN_CELL = "NaN"


class Modality(str, Enum):
    """Block kind and, equally, the modality of a retrievable unit."""

    TEXT = "text"
    IMAGE = "image"
    TABLE = "table"


class ImageKind(str, Enum):
    MAP = "map"
    PHOTOGRAPH = "photograph"
    SITE_LAYOUT = "site_layout"
    FIGURE = "figure"


@dataclass(frozen=True)
class TableData:
    header: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]
    caption: str | None = None


@dataclass(frozen=True)
class Block:
    block_id: str
    kind: Modality
    bbox: tuple[float, float, float, float]
    text: str
    image_kind: ImageKind | None = None
    table: TableData | None = None
    page_no: int = 0  # owning page, filled in when the page is assembled


@dataclass(frozen=True)
class Page:
    page_no: int
    blocks: tuple[Block, ...]


@dataclass(frozen=True)
class ExtractedDocument:
    doc_id: str
    title: str
    pages: tuple[Page, ...]
    source_path: str


@dataclass(frozen=True)
class ContextBundle:
    """Searchable textual context attached to one image or table block."""

    target_block_id: str
    caption: str | None
    ordinal: int | None
    referring_paragraphs: tuple[str, ...]
    inner_text: str
    combined_text: str


@dataclass(frozen=True)
class DocumentEntry:
    doc_id: str
    title: str
    num_pages: int
    num_images: int
    num_tables: int


@dataclass(frozen=True)
class CorpusManifest:
    num_documents: int
    num_pages: int
    num_images: int
    num_tables: int
    documents: tuple[DocumentEntry, ...] = field(default_factory=tuple)


def assemble_combined_text(
    caption: str | None, referring_paragraphs: Sequence[str], inner_text: str
) -> str:
    """Deterministic context concatenation: caption, then referring
    paragraphs in page order, then inner text, newline-joined.

    The fixed order keeps downstream embeddings and index contents
    reproducible for identical inputs.
    """
    parts: list[str] = []
    if caption:
        parts.append(caption)
    parts.extend(p for p in referring_paragraphs if p)
    if inner_text:
        parts.append(inner_text)
    return "\n".join(parts)


# --- parsing -----------------------------------------------------------------


def _expect(obj: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in obj:
        raise DocumentValidationError(f"{where}: missing required field '{key}'")
    return obj[key]


def _expect_str(obj: Mapping[str, Any], key: str, where: str) -> str:
    value = _expect(obj, key, where)
    if not isinstance(value, str):
        raise DocumentValidationError(f"{where}: field '{key}' must be a string")
    return value


def _parse_bbox(raw: Any, where: str) -> tuple[float, float, float, float]:
    if not isinstance(raw, list) or len(raw) != 4:
        raise DocumentValidationError(f"{where}: 'bbox' must be a list of four numbers")
    coords = []
    for v in raw:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise DocumentValidationError(f"{where}: 'bbox' must be a list of four numbers")
        coords.append(float(v))
    x0, y0, x1, y1 = coords
    if min(coords) < 0:
        raise DocumentValidationError(f"{where}: bbox coordinates must be non-negative")
    if x0 > x1 or y0 > y1:
        raise DocumentValidationError(f"{where}: bbox must satisfy x0 <= x1 and y0 <= y1")
    return (x0, y0, x1, y1)


def _parse_table(raw: Any, where: str) -> TableData:
    if not isinstance(raw, dict):
        raise DocumentValidationError(f"{where}: 'table' must be an object")
    header_raw = _expect(raw, "header", where)
    rows_raw = _expect(raw, "rows", where)
    if not isinstance(header_raw, list) or not all(isinstance(h, str) for h in header_raw):
        raise DocumentValidationError(f"{where}: table 'header' must be a list of strings")
    if not isinstance(rows_raw, list):
        raise DocumentValidationError(f"{where}: table 'rows' must be a list of rows")
    rows: list[tuple[str, ...]] = []
    for i, row in enumerate(rows_raw):
        if not isinstance(row, list) or not all(isinstance(c, str) for c in row):
            raise DocumentValidationError(f"{where}: table row {i} must be a list of strings")
        rows.append(tuple(row))
    caption = raw.get("caption")
    if caption is not None and not isinstance(caption, str):
        raise DocumentValidationError(f"{where}: table 'caption' must be a string")
    return TableData(header=tuple(header_raw), rows=tuple(rows), caption=caption)


def _parse_block(raw: Any, page_no: int, doc_id: str) -> Block:
    if not isinstance(raw, dict):
        raise DocumentValidationError(f"document '{doc_id}' page {page_no}: block must be an object")
    block_id = _expect_str(raw, "block_id", f"document '{doc_id}' page {page_no}")
    if not block_id:
        raise DocumentValidationError(f"document '{doc_id}' page {page_no}: empty block_id")
    where = f"block '{block_id}'"

    kind_raw = _expect_str(raw, "kind", where)
    try:
        kind = Modality(kind_raw)
    except ValueError:
        raise DocumentValidationError(f"{where}: unknown kind '{kind_raw}'") from None

    bbox = _parse_bbox(_expect(raw, "bbox", where), where)
    text = _expect_str(raw, "text", where)

    image_kind: ImageKind | None = None
    if "image_kind" in raw and raw["image_kind"] is not None:
        if kind is not Modality.IMAGE:
            raise DocumentValidationError(f"{where}: image_kind present on a {kind.value} block")
        value = raw["image_kind"]
        if not isinstance(value, str):
            raise DocumentValidationError(f"{where}: image_kind must be a string")
        try:
            image_kind = ImageKind(value)
        except ValueError:
            raise DocumentValidationError(f"{where}: unknown image_kind '{value}'") from None

    table: TableData | None = None
    if "table" in raw and raw["table"] is not None:
        if kind is not Modality.TABLE:
            raise DocumentValidationError(f"{where}: table present on a {kind.value} block")
        table = _parse_table(raw["table"], where)
    elif kind is Modality.TABLE:
        raise DocumentValidationError(f"{where}: table block is missing its 'table' field")

    return Block(
        block_id=block_id,
        kind=kind,
        bbox=bbox,
        text=text,
        image_kind=image_kind,
        table=table,
        page_no=page_no,
    )


def parse_extraction_document(data: Any) -> ExtractedDocument:
    """Validate an already-deserialized extraction object."""
    if not isinstance(data, dict):
        raise DocumentValidationError("extraction file must contain a single JSON object")
    doc_id = _expect_str(data, "doc_id", "document")
    if not doc_id:
        raise DocumentValidationError("document: doc_id must be non-empty")
    title = _expect_str(data, "title", f"document '{doc_id}'")
    source_path = _expect_str(data, "source_path", f"document '{doc_id}'")
    pages_raw = _expect(data, "pages", f"document '{doc_id}'")
    if not isinstance(pages_raw, list):
        raise DocumentValidationError(f"document '{doc_id}': 'pages' must be a list")

    seen_block_ids: set[str] = set()
    pages: list[Page] = []
    for i, page_raw in enumerate(pages_raw):
        expected_no = i + 1
        if not isinstance(page_raw, dict):
            raise DocumentValidationError(f"document '{doc_id}': page {expected_no} must be an object")
        page_no = _expect(page_raw, "page_no", f"document '{doc_id}' page {expected_no}")
        if not isinstance(page_no, int) or isinstance(page_no, bool) or page_no != expected_no:
            raise DocumentValidationError(
                f"document '{doc_id}': pages must be numbered consecutively from 1 "
                f"(expected page_no {expected_no}, got {page_no!r})"
            )
        blocks_raw = _expect(page_raw, "blocks", f"document '{doc_id}' page {page_no}")
        if not isinstance(blocks_raw, list):
            raise DocumentValidationError(f"document '{doc_id}' page {page_no}: 'blocks' must be a list")
        blocks = tuple(_parse_block(b, page_no, doc_id) for b in blocks_raw)
        for block in blocks:
            if block.block_id in seen_block_ids:
                raise DocumentValidationError(
                    f"document '{doc_id}': duplicate block_id '{block.block_id}'"
                )
            seen_block_ids.add(block.block_id)
        pages.append(Page(page_no=page_no, blocks=blocks))

    return ExtractedDocument(doc_id=doc_id, title=title, pages=tuple(pages), source_path=source_path)


def parse_extraction_file(data: bytes) -> ExtractedDocument:
    """Parse and validate one canonical extraction file.

    Raises ExtractionParseError for malformed syntax (with line/column) and
    DocumentValidationError, naming the offending block, for invariant
    violations.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ExtractionParseError(f"extraction file is not valid UTF-8: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ExtractionParseError(exc.msg, line=exc.lineno, column=exc.colno) from exc
    return parse_extraction_document(raw)


def load_extraction_file(path: str | Path) -> ExtractedDocument:
    return parse_extraction_file(Path(path).read_bytes())


# --- serialization -----------------------------------------------------------


def document_to_dict(doc: ExtractedDocument) -> dict[str, Any]:
    pages = []
    for page in doc.pages:
        blocks = []
        for block in page.blocks:
            entry: dict[str, Any] = {
                "block_id": block.block_id,
                "kind": block.kind.value,
                "bbox": list(block.bbox),
                "text": block.text,
            }
            if block.image_kind is not None:
                entry["image_kind"] = block.image_kind.value
            if block.table is not None:
                table: dict[str, Any] = {
                    "header": list(block.table.header),
                    "rows": [list(r) for r in block.table.rows],
                }
                if block.table.caption is not None:
                    table["caption"] = block.table.caption
                entry["table"] = table
            blocks.append(entry)
        pages.append({"page_no": page.page_no, "blocks": blocks})
    return {
        "doc_id": doc.doc_id,
        "title": doc.title,
        "source_path": doc.source_path,
        "pages": pages,
    }


def serialize_extraction_file(doc: ExtractedDocument) -> bytes:
    """Inverse of parse_extraction_file up to structural equality."""
    return json.dumps(document_to_dict(doc), ensure_ascii=False, indent=2).encode("utf-8")


# --- manifest ----------------------------------------------------------------


def count_blocks(doc: ExtractedDocument, kind: Modality) -> int:
    return sum(1 for page in doc.pages for block in page.blocks if block.kind is kind)


def build_manifest(docs: Sequence[ExtractedDocument]) -> CorpusManifest:
    """Corpus totals plus one entry per document, in input order."""
    seen: set[str] = set()
    entries: list[DocumentEntry] = []
    for doc in docs:
        if doc.doc_id in seen:
            raise DocumentValidationError(f"duplicate doc_id '{doc.doc_id}' in corpus")
        seen.add(doc.doc_id)
        entries.append(
            DocumentEntry(
                doc_id=doc.doc_id,
                title=doc.title,
                num_pages=len(doc.pages),
                num_images=count_blocks(doc, Modality.IMAGE),
                num_tables=count_blocks(doc, Modality.TABLE),
            )
        )
    return CorpusManifest(
        num_documents=len(entries),
        num_pages=sum(e.num_pages for e in entries),
        num_images=sum(e.num_images for e in entries),
        num_tables=sum(e.num_tables for e in entries),
        documents=tuple(entries),
    )


def manifest_to_dict(manifest: CorpusManifest) -> dict[str, Any]:
    return {
        "num_documents": manifest.num_documents,
        "num_pages": manifest.num_pages,
        "num_images": manifest.num_images,
        "num_tables": manifest.num_tables,
        "documents": [
            {
                "doc_id": e.doc_id,
                "title": e.title,
                "num_pages": e.num_pages,
                "num_images": e.num_images,
                "num_tables": e.num_tables,
            }
            for e in manifest.documents
        ],
    }


def manifest_from_dict(data: Mapping[str, Any]) -> CorpusManifest:
    return CorpusManifest(
        num_documents=int(data["num_documents"]),
        num_pages=int(data["num_pages"]),
        num_images=int(data["num_images"]),
        num_tables=int(data["num_tables"]),
        documents=tuple(
            DocumentEntry(
                doc_id=e["doc_id"],
                title=e["title"],
                num_pages=int(e["num_pages"]),
                num_images=int(e["num_images"]),
                num_tables=int(e["num_tables"]),
            )
            for e in data.get("documents", ())
        ),
    )


def with_replaced_block(doc: ExtractedDocument, new_block: Block) -> ExtractedDocument:
    """Return a copy of ``doc`` with the block of the same id swapped out."""
    pages = []
    for page in doc.pages:
        blocks = tuple(
            new_block if b.block_id == new_block.block_id else b for b in page.blocks
        )
        pages.append(replace(page, blocks=blocks))
    return replace(doc, pages=tuple(pages))


def iter_blocks(doc: ExtractedDocument) -> Iterable[tuple[Page, Block]]:
    for page in doc.pages:
        for block in page.blocks:
            yield page, block
