import random

import pytest

from sarch import (
    BenchmarkQuery,
    Modality,
    RankedEntry,
    RankedList,
    load_benchmark_file,
    load_judgments_file,
    precision_at_k,
    reciprocal_rank,
    resolve_judgments,
    run_benchmark,
)
from sarch.errors import RetrievalError
from sarch.evaluation import render_report_text, report_to_dict
from sarch.retrieval import Query


def ranked(*unit_ids: str) -> RankedList:
    return RankedList(
        entries=tuple(
            RankedEntry(unit_id=uid, score=1.0 / r, rank=r)
            for r, uid in enumerate(unit_ids, start=1)
        )
    )


class TestPointMetrics:
    def test_precision_counts_hits_in_head(self):
        assert precision_at_k(["a", "b", "c", "d", "e"], {"a", "c", "z"}, 5) == 0.4
        assert precision_at_k(["a", "b", "c"], {"a", "c"}, 3) == pytest.approx(2 / 3)
        assert precision_at_k(["b", "a"], {"a"}, 1) == 0.0

    def test_short_lists_still_divide_by_k(self):
        # two results, both relevant, evaluated at k=5
        assert precision_at_k(["a", "b"], {"a", "b"}, 5) == 0.4

    def test_empty_list_scores_zero(self):
        assert precision_at_k([], {"a"}, 5) == 0.0

    def test_unjudged_is_non_relevant(self):
        assert precision_at_k(["x", "y"], set(), 1) == 0.0

    def test_k_must_be_positive(self):
        with pytest.raises(ValueError):
            precision_at_k(["a"], {"a"}, 0)

    def test_reciprocal_rank(self):
        assert reciprocal_rank(["a", "b", "c"], {"c"}) == pytest.approx(1 / 3)
        assert reciprocal_rank(["a"], {"a"}) == 1.0
        assert reciprocal_rank(["a", "b"], {"z"}) == 0.0
        assert reciprocal_rank([], {"z"}) == 0.0

    def test_rr_never_below_p1(self):
        rng = random.Random(14)
        universe = [f"u{i}" for i in range(30)]
        for _ in range(200):
            ids = rng.sample(universe, rng.randint(0, 20))
            relevant = set(rng.sample(universe, rng.randint(0, 10)))
            assert reciprocal_rank(ids, relevant) >= precision_at_k(ids, relevant, 1)


class TestRunBenchmark:
    QUERIES = [
        BenchmarkQuery("q1", Modality.TEXT, "first query"),
        BenchmarkQuery("q2", Modality.TEXT, "second query"),
    ]
    RELEVANT = {"q1": {"u1"}, "q2": {"u9"}}

    def test_macro_averages_from_stub_runner(self):
        # q1 -> relevant at rank 1; q2 -> relevant at rank 2
        lists = {"first query": ranked("u1", "u2"), "second query": ranked("u3", "u9")}
        runners = {"keyword": lambda q: lists[q.text]}
        report = run_benchmark(self.QUERIES, self.RELEVANT, runners)
        m = report.per_pipeline["keyword"]
        assert m.p_at_1 == pytest.approx((1 + 0) / 2)
        assert m.p_at_3 == pytest.approx((1 / 3 + 1 / 3) / 2)
        assert m.p_at_5 == pytest.approx((1 / 5 + 1 / 5) / 2)
        assert m.mrr == pytest.approx((1 + 1 / 2) / 2)
        assert m.num_queries == 2

    def test_failing_query_scores_zero_and_warns(self):
        def runner(query: Query) -> RankedList:
            if query.text == "second query":
                raise RetrievalError("no vector store for modality 'text'")
            return ranked("u1")

        report = run_benchmark(self.QUERIES, self.RELEVANT, {"embedding": runner})
        m = report.per_pipeline["embedding"]
        assert m.mrr == pytest.approx(0.5)  # only q1 contributes, q2 counted as zero
        assert m.num_queries == 2
        assert any("q2" in w for w in report.warnings)

    def test_multiple_runners_reported_separately(self):
        runners = {
            "keyword": lambda q: ranked("u1"),
            "embedding": lambda q: ranked("nope"),
        }
        report = run_benchmark(self.QUERIES[:1], self.RELEVANT, runners)
        assert report.per_pipeline["keyword"].p_at_1 == 1.0
        assert report.per_pipeline["embedding"].p_at_1 == 0.0

    def test_no_queries_rejected(self):
        with pytest.raises(ValueError):
            run_benchmark([], {}, {"keyword": lambda q: ranked()})


class TestBenchmarkFile:
    def test_shipped_benchmark_loads(self):
        from importlib import resources

        with resources.as_file(
            resources.files("sarch.data").joinpath("benchmark_queries.tsv")
        ) as path:
            queries = load_benchmark_file(path)
        assert len(queries) == 30
        by_modality = {m: 0 for m in Modality}
        for q in queries:
            by_modality[q.modality] += 1
        assert by_modality[Modality.IMAGE] == 11
        assert by_modality[Modality.TEXT] == 15
        assert by_modality[Modality.TABLE] == 4
        assert queries[0].text == "Dancing girl image in Mohenjo-daro"

    def test_bad_lines_rejected(self, tmp_path):
        cases = [
            "q1\ttext",
            "q1\tvideo\tsome text",
            "q1\ttext\t",
            "q1\ttext\ta\nq1\ttext\tb",
        ]
        for content in cases:
            path = tmp_path / "bench.tsv"
            path.write_text(content, encoding="utf-8")
            with pytest.raises(ValueError):
                load_benchmark_file(path)


class TestJudgments:
    def test_load_and_resolve(self, tmp_path, engine):
        path = tmp_path / "judgments.tsv"
        path.write_text(
            "# qid doc page block rel\n"
            "q1\tghaggar-survey-1950\t1\t\t1\n"
            "q1\tghaggar-survey-1950\t2\tp2-i1\t1\n"
            "q1\tmohenjo-daro-excavations\t1\t\t0\n"
            "q2\tno-such-doc\t9\t\t1\n",
            encoding="utf-8",
        )
        raw = load_judgments_file(path)
        assert len(raw) == 4
        relevant, warnings = resolve_judgments(raw, engine.index)
        assert relevant == {
            "q1": {"ghaggar-survey-1950:p1:text", "ghaggar-survey-1950:p2:image:p2-i1"}
        }
        assert len(warnings) == 1 and "no-such-doc" in warnings[0]

    def test_bad_flag_rejected(self, tmp_path):
        path = tmp_path / "judgments.tsv"
        path.write_text("q1\td\t1\t\t2\n", encoding="utf-8")
        with pytest.raises(ValueError):
            load_judgments_file(path)


class TestReportRendering:
    def test_text_table_contains_all_metrics(self):
        report = run_benchmark(
            [BenchmarkQuery("q1", Modality.TEXT, "x")],
            {"q1": {"u1"}},
            {"keyword": lambda q: ranked("u1")},
        )
        text = render_report_text(report)
        assert "P@5" in text and "P@3" in text and "P@1" in text and "MRR" in text
        assert "keyword" in text

    def test_dict_round_trips_values(self):
        report = run_benchmark(
            [BenchmarkQuery("q1", Modality.TEXT, "x")],
            {"q1": {"u1"}},
            {"keyword": lambda q: ranked("u2", "u1")},
        )
        data = report_to_dict(report)
        assert data["pipelines"]["keyword"]["mrr"] == pytest.approx(0.5)
        assert data["pipelines"]["keyword"]["num_queries"] == 1
