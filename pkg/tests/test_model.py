import json

import pytest

from sarch import (
    Block,
    DocumentValidationError,
    ExtractionParseError,
    Modality,
    Page,
    parse_extraction_document,
    parse_extraction_file,
)
from sarch.model import (
    ExtractedDocument,
    assemble_combined_text,
    build_manifest,
    document_to_dict,
    serialize_extraction_file,
    with_replaced_block,
)


def minimal_doc(**overrides) -> dict:
    doc = {
        "doc_id": "d1",
        "title": "A title",
        "source_path": "scans/d1.pdf",
        "pages": [
            {
                "page_no": 1,
                "blocks": [
                    {"block_id": "b1", "kind": "text", "bbox": [0, 0, 10, 10], "text": "hello"}
                ],
            }
        ],
    }
    doc.update(overrides)
    return doc


class TestParsing:
    def test_round_trip(self):
        raw = minimal_doc()
        doc = parse_extraction_document(raw)
        assert document_to_dict(doc) == raw
        again = parse_extraction_file(serialize_extraction_file(doc))
        assert again == doc

    def test_image_block_without_kind_is_allowed(self):
        raw = minimal_doc()
        raw["pages"][0]["blocks"].append(
            {"block_id": "i1", "kind": "image", "bbox": [0, 0, 5, 5], "text": "FIG. 1"}
        )
        doc = parse_extraction_document(raw)
        image = doc.pages[0].blocks[1]
        assert image.kind is Modality.IMAGE
        assert image.image_kind is None

    def test_image_kind_value_parsed(self):
        raw = minimal_doc()
        raw["pages"][0]["blocks"][0] = {
            "block_id": "i1",
            "kind": "image",
            "bbox": [0, 0, 5, 5],
            "text": "",
            "image_kind": "site_layout",
        }
        doc = parse_extraction_document(raw)
        assert doc.pages[0].blocks[0].image_kind.value == "site_layout"

    def test_ragged_table_rows_survive_parsing(self):
        raw = minimal_doc()
        raw["pages"][0]["blocks"][0] = {
            "block_id": "t1",
            "kind": "table",
            "bbox": [0, 0, 5, 5],
            "text": "",
            "table": {"header": ["a", "b"], "rows": [["1"], ["1", "2", "3"]]},
        }
        doc = parse_extraction_document(raw)
        table = doc.pages[0].blocks[0].table
        assert len(table.rows[0]) == 1
        assert len(table.rows[1]) == 3

    @pytest.mark.parametrize(
        "mutate, message_part",
        [
            (lambda d: d.update(doc_id=""), "doc_id"),
            (lambda d: d["pages"].__setitem__(0, {**d["pages"][0], "page_no": 2}), "page"),
            (lambda d: d["pages"][0]["blocks"][0].update(kind="chart"), "kind"),
            (lambda d: d["pages"][0]["blocks"][0].update(bbox=[5, 0, 1, 10]), "bbox"),
            (lambda d: d["pages"][0]["blocks"][0].update(bbox=[-1, 0, 1, 10]), "bbox"),
            (lambda d: d["pages"][0]["blocks"][0].update(image_kind="map"), "image_kind"),
            (lambda d: d["pages"][0]["blocks"][0].pop("text"), "text"),
        ],
    )
    def test_invalid_documents_rejected(self, mutate, message_part):
        raw = minimal_doc()
        mutate(raw)
        with pytest.raises(DocumentValidationError, match=message_part):
            parse_extraction_document(raw)

    def test_duplicate_block_ids_rejected(self):
        raw = minimal_doc()
        raw["pages"][0]["blocks"].append(
            {"block_id": "b1", "kind": "text", "bbox": [0, 0, 1, 1], "text": "again"}
        )
        with pytest.raises(DocumentValidationError, match="b1"):
            parse_extraction_document(raw)

    def test_table_block_without_table_rejected(self):
        raw = minimal_doc()
        raw["pages"][0]["blocks"][0]["kind"] = "table"
        with pytest.raises(DocumentValidationError, match="table"):
            parse_extraction_document(raw)

    def test_unknown_image_kind_rejected(self):
        raw = minimal_doc()
        raw["pages"][0]["blocks"][0] = {
            "block_id": "i1",
            "kind": "image",
            "bbox": [0, 0, 1, 1],
            "text": "",
            "image_kind": "sketch",
        }
        with pytest.raises(DocumentValidationError, match="sketch"):
            parse_extraction_document(raw)

    def test_malformed_json_reports_position(self):
        with pytest.raises(ExtractionParseError, match="line"):
            parse_extraction_file(b'{"doc_id": "x",\n  "title": }')

    def test_non_utf8_rejected(self):
        with pytest.raises(ExtractionParseError):
            parse_extraction_file(b"\xff\xfe{}")

    def test_non_object_rejected(self):
        with pytest.raises(DocumentValidationError):
            parse_extraction_document([1, 2, 3])


class TestCombinedText:
    def test_assembly_order_and_blank_parts(self):
        assert assemble_combined_text("cap", ["p1", "p2"], "inner") == "cap\np1\np2\ninner"
        assert assemble_combined_text(None, [], "inner") == "inner"
        assert assemble_combined_text("cap", [], "") == "cap"
        assert assemble_combined_text(None, ["p"], None) == "p"


class TestManifest:
    def _doc(self, doc_id: str) -> ExtractedDocument:
        raw = minimal_doc(doc_id=doc_id)
        return parse_extraction_document(raw)

    def test_counts(self):
        raw = minimal_doc()
        raw["pages"][0]["blocks"].append(
            {"block_id": "i1", "kind": "image", "bbox": [0, 0, 1, 1], "text": ""}
        )
        raw["pages"].append(
            {
                "page_no": 2,
                "blocks": [
                    {
                        "block_id": "tb1",
                        "kind": "table",
                        "bbox": [0, 0, 1, 1],
                        "text": "",
                        "table": {"header": ["h"], "rows": []},
                    }
                ],
            }
        )
        manifest = build_manifest([parse_extraction_document(raw), self._doc("d2")])
        assert manifest.num_documents == 2
        assert manifest.num_pages == 3
        assert manifest.num_images == 1
        assert manifest.num_tables == 1
        assert manifest.documents[0].doc_id == "d1"

    def test_duplicate_doc_ids_rejected(self):
        with pytest.raises(DocumentValidationError, match="d1"):
            build_manifest([self._doc("d1"), self._doc("d1")])


def test_with_replaced_block_swaps_only_the_target():
    doc = parse_extraction_document(minimal_doc())
    original = doc.pages[0].blocks[0]
    swapped = with_replaced_block(doc, Block(
        block_id="b1", kind=Modality.TEXT, bbox=original.bbox, text="changed",
        page_no=original.page_no,
    ))
    assert swapped.pages[0].blocks[0].text == "changed"
    assert doc.pages[0].blocks[0].text == "hello"
