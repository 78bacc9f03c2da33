"""Single-file binary persistence for the index, vector stores and manifest.

Layout: an 8-byte magic, a little-endian u32 format version, then a sequence
of sections. Each section is a 4-byte ASCII tag, a little-endian u64 payload
length and the payload bytes:

    UNIT  unit table (JSON)
    POST  per-modality BM25 postings (JSON, insertion order preserved)
    VECS  per-modality vector blocks (binary, raw little-endian float32 rows)
    MANI  corpus manifest plus the embedding provider hint (JSON)
    DISP  per-unit display records for result rendering (JSON)

Postings order and the float32 vector bytes survive a save/load round trip
unchanged, so scores and rankings computed from a reloaded index are
bit-for-bit identical to the in-memory originals.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import PersistenceError
from .indexing import IndexUnit, InvertedIndex, VectorStore, _Partition
from .model import Modality

MAGIC = b"SARCHIDX"
FORMAT_VERSION = 1

_SECTION_ORDER = (b"UNIT", b"POST", b"VECS", b"MANI", b"DISP")


@dataclass
class PersistedIndex:
    index: InvertedIndex
    stores: dict[Modality, VectorStore]
    manifest: dict
    display: dict[str, dict]


def _unit_to_record(unit: IndexUnit) -> dict:
    return {
        "unit_id": unit.unit_id,
        "doc_id": unit.doc_id,
        "page_no": unit.page_no,
        "modality": unit.modality.value,
        "block_id": unit.block_id,
        "token_count": unit.token_count,
    }


def _unit_from_record(rec: dict) -> IndexUnit:
    return IndexUnit(
        unit_id=rec["unit_id"],
        doc_id=rec["doc_id"],
        page_no=int(rec["page_no"]),
        modality=Modality(rec["modality"]),
        block_id=rec["block_id"],
        token_count=int(rec["token_count"]),
    )


def _encode_json(obj) -> bytes:
    return json.dumps(obj, ensure_ascii=False).encode("utf-8")


def _index_sections(index: InvertedIndex) -> tuple[bytes, bytes]:
    units = [_unit_to_record(u) for u in index.units.values()]
    post: dict[str, dict] = {}
    for modality, part in index.partitions.items():
        post[modality.value] = {
            "unit_ids": part.unit_ids,
            "total_tokens": part.total_tokens,
            "postings": {term: [[uid, tf] for uid, tf in rows] for term, rows in part.postings.items()},
        }
    return _encode_json(units), _encode_json(post)


def _encode_vectors(stores: dict[Modality, VectorStore]) -> bytes:
    parts: list[bytes] = [struct.pack("<I", len(stores))]
    for modality, store in stores.items():
        tag = modality.value.encode("utf-8")
        ids_blob = _encode_json(store.unit_ids)
        matrix = np.ascontiguousarray(store.matrix, dtype="<f4")
        parts.append(struct.pack("<I", len(tag)))
        parts.append(tag)
        parts.append(struct.pack("<II", store.dim, len(store.unit_ids)))
        parts.append(struct.pack("<Q", len(ids_blob)))
        parts.append(ids_blob)
        parts.append(matrix.tobytes(order="C"))
    return b"".join(parts)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise PersistenceError("index file is truncated")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    @property
    def exhausted(self) -> bool:
        return self.pos >= len(self.data)


def _decode_vectors(payload: bytes) -> dict[Modality, VectorStore]:
    r = _Reader(payload)
    stores: dict[Modality, VectorStore] = {}
    count = r.u32()
    for _ in range(count):
        tag_len = r.u32()
        try:
            modality = Modality(r.take(tag_len).decode("utf-8"))
        except ValueError as exc:
            raise PersistenceError(f"unknown modality tag in vector block: {exc}") from exc
        dim, rows = struct.unpack("<II", r.take(8))
        ids_len = r.u64()
        unit_ids = json.loads(r.take(ids_len).decode("utf-8"))
        if len(unit_ids) != rows:
            raise PersistenceError("vector block unit id count disagrees with row count")
        blob = r.take(dim * rows * 4)
        matrix = np.frombuffer(blob, dtype="<f4").reshape(rows, dim).copy()
        stores[modality] = VectorStore.from_matrix(modality, unit_ids, matrix)
    return stores


def _rebuild_index(units_payload: bytes, post_payload: bytes) -> InvertedIndex:
    try:
        unit_records = json.loads(units_payload.decode("utf-8"))
        post = json.loads(post_payload.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise PersistenceError(f"corrupt index section: {exc}") from exc
    index = InvertedIndex()
    for rec in unit_records:
        unit = _unit_from_record(rec)
        index.units[unit.unit_id] = unit
    for modality_name, part_rec in post.items():
        modality = Modality(modality_name)
        part = index.partitions.setdefault(modality, _Partition())
        part.unit_ids = list(part_rec["unit_ids"])
        part.total_tokens = int(part_rec["total_tokens"])
        part.postings = {
            term: [(uid, int(tf)) for uid, tf in rows]
            for term, rows in part_rec["postings"].items()
        }
    return index


def save_index(path: str | Path, bundle: PersistedIndex) -> None:
    units_blob, post_blob = _index_sections(bundle.index)
    sections = {
        b"UNIT": units_blob,
        b"POST": post_blob,
        b"VECS": _encode_vectors(bundle.stores),
        b"MANI": _encode_json(bundle.manifest),
        b"DISP": _encode_json(bundle.display),
    }
    out = bytearray()
    out += MAGIC
    out += struct.pack("<I", FORMAT_VERSION)
    for tag in _SECTION_ORDER:
        payload = sections[tag]
        out += tag
        out += struct.pack("<Q", len(payload))
        out += payload
    Path(path).write_bytes(bytes(out))


def load_index(path: str | Path) -> PersistedIndex:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise PersistenceError(f"cannot read index file: {exc}") from exc
    r = _Reader(data)
    if r.take(len(MAGIC)) != MAGIC:
        raise PersistenceError("not an index file (bad magic)")
    version = r.u32()
    if version != FORMAT_VERSION:
        raise PersistenceError(f"unsupported index format version {version}")
    payloads: dict[bytes, bytes] = {}
    while not r.exhausted:
        tag = r.take(4)
        length = r.u64()
        payloads[tag] = r.take(length)
    missing = [tag.decode() for tag in _SECTION_ORDER if tag not in payloads]
    if missing:
        raise PersistenceError(f"index file is missing sections: {', '.join(missing)}")
    index = _rebuild_index(payloads[b"UNIT"], payloads[b"POST"])
    stores = _decode_vectors(payloads[b"VECS"])
    try:
        manifest = json.loads(payloads[b"MANI"].decode("utf-8"))
        display = json.loads(payloads[b"DISP"].decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise PersistenceError(f"corrupt metadata section: {exc}") from exc
    return PersistedIndex(index=index, stores=stores, manifest=manifest, display=display)
