import json

import pytest

from sarch.cli import main
from sarch.enhance import GrayImage, load_image, save_image

from conftest import CORPUS_DIR, FIXTURES


@pytest.fixture(scope="module")
def index_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "index.bin"
    code = main(["ingest", str(CORPUS_DIR), "--out", str(path)])
    assert code == 0
    return path


class TestIngest:
    def test_reports_counts_and_writes_index(self, tmp_path, capsys):
        out = tmp_path / "idx.bin"
        code = main(["ingest", str(CORPUS_DIR), "--out", str(out)])
        captured = capsys.readouterr()
        assert code == 0
        assert out.is_file()
        assert "indexed 3 documents, 7 pages, 2 images, 1 tables" in captured.out
        assert "units: text=6 image=2 table=1" in captured.out
        assert f"wrote {out}" in captured.out

    def test_missing_corpus_dir_fails(self, tmp_path, capsys):
        code = main(["ingest", str(tmp_path / "nope"), "--out", str(tmp_path / "i.bin")])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_external_provider_needs_endpoint(self, tmp_path, capsys):
        code = main(
            ["ingest", str(CORPUS_DIR), "--out", str(tmp_path / "i.bin"), "--provider", "external"]
        )
        assert code == 1
        assert "--endpoint" in capsys.readouterr().err


class TestSearch:
    def test_planted_query_prints_ranked_lines(self, index_path, capsys):
        code = main(
            [
                "search",
                "Primary crops of the Harappan civilization",
                "--index",
                str(index_path),
                "--pipeline",
                "keyword",
            ]
        )
        out = capsys.readouterr().out
        assert code == 0
        first = out.splitlines()[0]
        assert first.startswith(" 1.")
        assert "ghaggar-survey-1950:p1:text" in first

    def test_image_hit_shows_caption(self, index_path, capsys):
        code = main(
            [
                "search",
                "map of harappan sites",
                "--index",
                str(index_path),
                "--modality",
                "image",
            ]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "[FIG. 2 MAP OF HARAPPAN SITES IN THE GHAGGAR BASIN]" in out

    def test_no_hits_prints_placeholder(self, index_path, capsys):
        code = main(
            [
                "search",
                "zzzqqqxxx",
                "--index",
                str(index_path),
                "--pipeline",
                "keyword",
            ]
        )
        assert code == 0
        assert capsys.readouterr().out.strip() == "no results"

    def test_missing_index_fails_with_hint(self, tmp_path, capsys):
        code = main(["search", "anything", "--index", str(tmp_path / "ghost.bin")])
        err = capsys.readouterr().err
        assert code == 1
        assert "no index found" in err
        assert "sarch ingest" in err


class TestEval:
    def test_text_report(self, index_path, capsys):
        code = main(
            ["eval", "--index", str(index_path), "--judgments", str(FIXTURES / "judgments.tsv")]
        )
        out = capsys.readouterr().out
        assert code == 0
        header, *rows = [l for l in out.splitlines() if l and not l.startswith("warning")]
        assert header.split() == ["pipeline", "P@5", "P@3", "P@1", "MRR"]
        assert {r.split()[0] for r in rows} == {"keyword", "embedding", "hybrid"}

    def test_json_report(self, index_path, capsys):
        code = main(
            [
                "eval",
                "--index",
                str(index_path),
                "--judgments",
                str(FIXTURES / "judgments.tsv"),
                "--json",
            ]
        )
        out = capsys.readouterr().out
        assert code == 0
        report = json.loads(out)
        for pipeline in ("keyword", "embedding", "hybrid"):
            metrics = report["pipelines"][pipeline]
            assert metrics["num_queries"] == 30
            assert 0.0 <= metrics["mrr"] <= 1.0
        # the planted judgments are reachable, so keyword quality is nonzero
        assert report["pipelines"]["keyword"]["mrr"] > 0.0

    def test_unresolvable_judgment_warns(self, index_path, tmp_path, capsys):
        judgments = tmp_path / "j.tsv"
        judgments.write_text(
            "txt-01\tghaggar-survey-1950\t1\t\t1\n"
            "txt-02\tno-such-doc\t9\t\t1\n",
            encoding="utf-8",
        )
        code = main(["eval", "--index", str(index_path), "--judgments", str(judgments)])
        out = capsys.readouterr().out
        assert code == 0
        assert "warning:" in out
        assert "no-such-doc" in out


class TestEnhance:
    def test_binarizes_and_reports_threshold(self, tmp_path, capsys):
        src = tmp_path / "scan.pgm"
        dst = tmp_path / "clean.pgm"
        pixels = [30] * 32 + [220] * 32
        save_image(src, GrayImage(8, 8, pixels))
        code = main(["enhance", str(src), str(dst)])
        out = capsys.readouterr().out
        assert code == 0
        assert out.startswith("threshold: ")
        result = load_image(dst)
        assert set(result.pixels) <= {0, 255}

    def test_unreadable_input_fails(self, tmp_path, capsys):
        code = main(["enhance", str(tmp_path / "missing.pgm"), str(tmp_path / "out.pgm")])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestContextualize:
    def test_stdout_json(self, capsys):
        code = main(["contextualize", str(CORPUS_DIR / "ghaggar-survey.json")])
        out = capsys.readouterr().out
        assert code == 0
        payload = json.loads(out)
        image = payload["pages"][1]["blocks"][1]
        assert image["context"]["ordinal"] == 2

    def test_out_file(self, tmp_path, capsys):
        dst = tmp_path / "ctx.json"
        code = main(
            ["contextualize", str(CORPUS_DIR / "prehistoric-chronology.json"), "--out", str(dst)]
        )
        assert code == 0
        assert f"wrote {dst}" in capsys.readouterr().out
        payload = json.loads(dst.read_text("utf-8"))
        assert payload["doc_id"] == "prehistoric-chronology"


class TestArgumentErrors:
    @pytest.mark.parametrize(
        "argv",
        [
            [],
            ["search"],
            ["ingest"],
            ["eval", "--index", "x.bin"],
            ["search", "q", "--modality", "video"],
            ["search", "q", "--pipeline", "psychic"],
        ],
    )
    def test_usage_errors_exit_2(self, argv, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main(argv)
        assert excinfo.value.code == 2
        assert "usage" in capsys.readouterr().err.lower()
