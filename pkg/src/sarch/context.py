"""OCR-output cleaning and context extraction for images and tables.

Scanned-archive OCR output arrives with markup noise, misspellings and ragged
tables; captions are often short or live inside the image raster itself, and
the real description of a figure or table sits in surrounding paragraphs that
cite its number. The routines here normalize the text and gather that context
into a ContextBundle so images and tables become searchable.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .errors import SarchError
from .model import (
    NAN_CELL,
    Block,
    ContextBundle,
    Modality,
    Page,
    TableData,
    assemble_combined_text,
)

_TAG_RE = re.compile(r"</?[A-Za-z][^<>]*>")
_WS_RE = re.compile(r"\s+")

# caption keyword, optional whitespace, then the figure number
_FIG_CAPTION_RE = re.compile(r"\b(?:fig\.|figure)\s*(\d+)", re.IGNORECASE)
_TABLE_CAPTION_RE = re.compile(r"\b(?:tab\.|table)\s*(\d+)", re.IGNORECASE)
_SENTENCE_END = frozenset(".!?")

_ALPHA_RE = re.compile(r"[^\W\d_]+", re.UNICODE)

_NUMERIC_CELL_RE = re.compile(r"^[+-]?(?:\d+(?:\.\d*)?|\.\d+)$")

TABLE_SUMMARY_PREFIX = "Table summary:"
_SUMMARY_TOKEN_LIMIT = 30


class CaptionSource(str, Enum):
    IN_IMAGE_TEXT = "in_image_text"
    PAGE_TEXT = "page_text"


@dataclass(frozen=True)
class CaptionHit:
    ordinal: int
    caption_text: str
    source: CaptionSource


@dataclass(frozen=True)
class Lexicon:
    """Known-word list for spell correction, all lowercase."""

    words: frozenset[str]

    @classmethod
    def from_file(cls, path: str | Path) -> "Lexicon":
        words = frozenset(
            line.strip().lower()
            for line in Path(path).read_text(encoding="utf-8").splitlines()
            if line.strip()
        )
        return cls(words=words)


def strip_formatting_tags(text: str) -> str:
    """Remove markup tags, collapse whitespace runs, trim.

    A tag is ``<`` + optional ``/`` + a letter + anything up to the next
    ``>``; each one is replaced by a space. Removal repeats until stable so
    fragments uncovered by an inner removal cannot survive, making the
    operation idempotent. A ``<`` that never forms a tag stays literal text.
    """
    while True:
        stripped, n = _TAG_RE.subn(" ", text)
        if n == 0:
            break
        text = stripped
    return _WS_RE.sub(" ", text).strip()


def _levenshtein_capped(a: str, b: str, cap: int) -> int:
    """Edit distance, early-exited once it must exceed ``cap``."""
    if abs(len(a) - len(b)) > cap:
        return cap + 1
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        best = i
        for j, cb in enumerate(b, start=1):
            cost = 0 if ca == cb else 1
            v = min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + cost)
            cur.append(v)
            best = min(best, v)
        if best > cap:
            return cap + 1
        prev = cur
    return prev[-1]


def spell_correct(text: str, lexicon: Lexicon, max_distance: int = 2) -> str:
    """Replace unknown alphabetic tokens by their closest lexicon word.

    A token already in the lexicon (case-insensitively) is left untouched,
    casing included. An unknown token is replaced only when some lexicon word
    is within ``max_distance`` edits; the replacement is emitted lowercase,
    and distance ties go to the lexicographically smallest word. Numbers and
    punctuation pass through unchanged.
    """
    if not lexicon.words:
        raise ValueError("spell correction needs a non-empty lexicon")

    def fix(match: re.Match[str]) -> str:
        token = match.group(0)
        lowered = token.lower()
        if lowered in lexicon.words:
            return token
        best_word: str | None = None
        best_dist = max_distance + 1
        for word in lexicon.words:
            d = _levenshtein_capped(lowered, word, max_distance)
            if d < best_dist or (d == best_dist and best_word is not None and word < best_word):
                best_word, best_dist = word, d
        if best_word is not None and best_dist <= max_distance:
            return best_word
        return token

    return _ALPHA_RE.sub(fix, text)


def detect_in_image_caption(ocr_text: str) -> CaptionHit | None:
    """Find a caption of the form "Fig. N ..." inside in-image OCR text.

    Takes the first "fig."/"figure" (case-insensitive) immediately followed,
    after optional whitespace, by an integer, and extends the caption through
    the end of that sentence. The period inside the "Fig." keyword does not
    terminate the sentence.
    """
    for match in _FIG_CAPTION_RE.finditer(ocr_text):
        ordinal = int(match.group(1))
        if ordinal < 1:
            continue
        end = len(ocr_text)
        for i in range(match.end(), len(ocr_text)):
            if ocr_text[i] in _SENTENCE_END:
                end = i
                break
        caption = ocr_text[match.start() : end].rstrip()
        if caption:
            return CaptionHit(ordinal=ordinal, caption_text=caption, source=CaptionSource.IN_IMAGE_TEXT)
    return None


def detect_table_ordinal(text: str) -> int | None:
    """Table number cited as "Table N" / "Tab. N", if any."""
    for match in _TABLE_CAPTION_RE.finditer(text):
        ordinal = int(match.group(1))
        if ordinal >= 1:
            return ordinal
    return None


def _reference_pattern(ordinal: int, kind: Modality) -> re.Pattern[str]:
    if kind is Modality.IMAGE:
        keyword = r"(?:figure|fig\.?)"
    elif kind is Modality.TABLE:
        keyword = r"(?:table|tab\.)"
    else:
        raise ValueError(f"no reference keyword for kind {kind.value}")
    # whole-token ordinal: "Figure 21" must not match ordinal 2
    return re.compile(rf"\b{keyword}\s*{ordinal}(?!\d)", re.IGNORECASE)


def mine_referring_paragraphs(
    ordinal: int,
    kind: Modality,
    previous: Page | None,
    same: Page,
    next_: Page | None,
) -> list[str]:
    """Collect every text paragraph on the three surrounding pages that cites
    the given figure/table number, in page order then block order.

    Each text block counts as one paragraph. A paragraph is kept when it
    contains the reference keyword directly followed by the ordinal as a
    whole number token.
    """
    if ordinal < 1:
        raise ValueError("ordinal must be >= 1")
    if same is None:
        raise ValueError("the page owning the block is required")
    pattern = _reference_pattern(ordinal, kind)
    found: list[str] = []
    for page in (previous, same, next_):
        if page is None:
            continue
        for block in page.blocks:
            if block.kind is Modality.TEXT and pattern.search(block.text):
                found.append(block.text)
    return found


def _clean_cell(cell: str) -> str:
    cleaned = strip_formatting_tags(cell)
    return cleaned if cleaned else NAN_CELL


def clean_table(
    header: list[str] | tuple[str, ...],
    rows: list[list[str]] | tuple[tuple[str, ...], ...],
    caption: str | None = None,
) -> TableData:
    """Normalize a raw extracted table to a uniform grid.

    Every output row has exactly len(header) cells: short rows are padded on
    the right with "NaN", long rows are truncated from the right. Empty or
    whitespace-only cells become "NaN", and all cell text is tag-stripped.
    """
    if not header:
        raise ValueError("table header must be non-empty")
    width = len(header)
    out_header = tuple(strip_formatting_tags(h) for h in header)
    out_rows: list[tuple[str, ...]] = []
    for row in rows:
        cells = [_clean_cell(c) for c in row[:width]]
        cells.extend([NAN_CELL] * (width - len(cells)))
        out_rows.append(tuple(cells))
    return TableData(header=out_header, rows=tuple(out_rows), caption=caption)


def is_numeric_cell(cell: str) -> bool:
    """True for integers and decimals, tolerating thousands commas and one
    trailing percent sign."""
    value = cell.strip().replace(",", "")
    if value.endswith("%"):
        value = value[:-1]
    return bool(_NUMERIC_CELL_RE.match(value))


def table_inner_text(table: TableData) -> str:
    """Header cells plus non-numeric body cells, flattened row-major.

    Numeric cells carry little retrieval value; the NaN placeholder is a
    missing-value marker, not context, so it is dropped too.
    """
    parts = [h for h in table.header if h]
    for row in table.rows:
        for cell in row:
            if cell and cell != NAN_CELL and not is_numeric_cell(cell):
                parts.append(cell)
    return " ".join(parts)


def _table_summary_caption(inner_text: str) -> str | None:
    tokens = inner_text.split()
    if not tokens:
        return None
    return f"{TABLE_SUMMARY_PREFIX} " + " ".join(tokens[:_SUMMARY_TOKEN_LIMIT])


def resolve_caption(block: Block, explicit_caption: str | None = None) -> tuple[str | None, int | None]:
    """Caption and ordinal for an image/table block.

    Images: the explicit caption wins; otherwise the in-image OCR text is
    scanned for a "Fig. N" caption. Tables: the explicit caption (argument or
    the table's own) wins; a missing table caption is synthesized later from
    the table contents. The ordinal is parsed from whichever caption applies.
    """
    if block.kind is Modality.IMAGE:
        if explicit_caption:
            hit = detect_in_image_caption(explicit_caption)
            return explicit_caption, hit.ordinal if hit else None
        hit = detect_in_image_caption(block.text)
        if hit is not None:
            return hit.caption_text, hit.ordinal
        return None, None
    if block.kind is Modality.TABLE:
        caption = explicit_caption
        if caption is None and block.table is not None:
            caption = block.table.caption
        if caption:
            return caption, detect_table_ordinal(caption)
        return None, None
    raise SarchError(f"block '{block.block_id}' has kind {block.kind.value}; no caption to resolve")


def build_context_bundle(
    block: Block,
    caption: str | None = None,
    paragraphs: list[str] | tuple[str, ...] = (),
) -> ContextBundle:
    """Assemble the searchable context for one image or table block.

    ``caption`` overrides detection; ``paragraphs`` are the referring
    paragraphs mined from surrounding pages. For images the inner text is the
    in-image OCR text; for tables it is the flattened header plus non-numeric
    cells, and a table with no caption gets a deterministic
    "Table summary: ..." stand-in built from that text.
    """
    if block.kind is Modality.TEXT:
        raise SarchError(f"block '{block.block_id}' is a text block; context bundles attach to images and tables")

    resolved_caption, ordinal = resolve_caption(block, caption)

    if block.kind is Modality.IMAGE:
        inner = block.text
    else:
        table = block.table if block.table is not None else TableData(header=("",), rows=())
        inner = table_inner_text(table)
        if not resolved_caption:
            resolved_caption = _table_summary_caption(inner)

    combined = assemble_combined_text(resolved_caption, paragraphs, inner)
    return ContextBundle(
        target_block_id=block.block_id,
        caption=resolved_caption,
        ordinal=ordinal,
        referring_paragraphs=tuple(paragraphs),
        inner_text=inner,
        combined_text=combined,
    )
