import struct

import numpy as np
import pytest

from sarch import (
    Modality,
    PersistenceError,
    bm25_score,
    load_index,
    save_index,
)
from sarch.persistence import FORMAT_VERSION, MAGIC


@pytest.fixture()
def index_file(tmp_path, ingested):
    path = tmp_path / "corpus.idx"
    save_index(path, ingested.to_persisted())
    return path


class TestRoundTrip:
    def test_bm25_scores_identical(self, index_file, ingested):
        loaded = load_index(index_file)
        queries = [
            ["harappan", "civilization"],
            ["dancing", "girl"],
            ["dominant", "life", "holocene"],
            ["map", "sites", "basin"],
        ]
        assert set(loaded.index.units) == set(ingested.index.units)
        for terms in queries:
            for uid in ingested.index.units:
                original = bm25_score(terms, uid, ingested.index)
                reloaded = bm25_score(terms, uid, loaded.index)
                assert reloaded == original  # bit-for-bit, not approx

    def test_vector_rankings_identical(self, index_file, ingested, provider):
        loaded = load_index(index_file)
        assert set(loaded.stores) == set(ingested.stores)
        for modality, store in ingested.stores.items():
            other = loaded.stores[modality]
            assert np.array_equal(store.matrix, other.matrix)
            query = provider.embed_text("harappan sites of the basin", modality).vector
            a = store.vector_topk(query, len(store))
            b = other.vector_topk(query, len(other))
            assert a.unit_ids() == b.unit_ids()
            assert [e.score for e in a] == [e.score for e in b]

    def test_metadata_round_trips(self, index_file, ingested):
        loaded = load_index(index_file)
        assert loaded.manifest == ingested.manifest
        assert loaded.display == ingested.display

    def test_postings_order_preserved(self, index_file, ingested):
        loaded = load_index(index_file)
        for modality in Modality:
            original = ingested.index.partition(modality)
            reloaded = loaded.index.partition(modality)
            assert reloaded.unit_ids == original.unit_ids
            assert reloaded.total_tokens == original.total_tokens
            assert list(reloaded.postings) == list(original.postings)
            for term, rows in original.postings.items():
                assert reloaded.postings[term] == rows


class TestCorruptFiles:
    def test_bad_magic(self, tmp_path, index_file):
        data = index_file.read_bytes()
        bad = tmp_path / "bad.idx"
        bad.write_bytes(b"NOTANIDX" + data[8:])
        with pytest.raises(PersistenceError, match="magic"):
            load_index(bad)

    def test_unsupported_version(self, tmp_path, index_file):
        data = bytearray(index_file.read_bytes())
        data[8:12] = struct.pack("<I", FORMAT_VERSION + 1)
        bad = tmp_path / "bad.idx"
        bad.write_bytes(bytes(data))
        with pytest.raises(PersistenceError, match="version"):
            load_index(bad)

    @pytest.mark.parametrize("keep", [4, 11, 20, 150])
    def test_truncation_detected(self, tmp_path, index_file, keep):
        bad = tmp_path / "trunc.idx"
        bad.write_bytes(index_file.read_bytes()[:keep])
        with pytest.raises(PersistenceError):
            load_index(bad)

    def test_truncated_tail_detected(self, tmp_path, index_file):
        data = index_file.read_bytes()
        bad = tmp_path / "tail.idx"
        bad.write_bytes(data[:-10])
        with pytest.raises(PersistenceError):
            load_index(bad)

    def test_missing_file(self, tmp_path):
        with pytest.raises(PersistenceError):
            load_index(tmp_path / "absent.idx")

    def test_missing_section_detected(self, tmp_path):
        bad = tmp_path / "nosections.idx"
        bad.write_bytes(MAGIC + struct.pack("<I", FORMAT_VERSION))
        with pytest.raises(PersistenceError, match="missing"):
            load_index(bad)
