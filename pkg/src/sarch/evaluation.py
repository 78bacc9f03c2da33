"""Retrieval quality evaluation: precision at k and mean reciprocal rank.

Judged-relevant units are the ground truth; anything unjudged counts as
non-relevant. Metrics are macro-averaged over queries. A query that a
pipeline cannot answer (for example a modality with no vector store) scores
zero for that pipeline and the run continues with a warning recorded.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping

from .errors import SarchError
from .indexing import InvertedIndex
from .model import Modality
from .ranking import RankedList
from .retrieval import PipelineKind, Query

RUN_DEPTH = 5


@dataclass(frozen=True)
class BenchmarkQuery:
    query_id: str
    modality: Modality
    text: str


@dataclass(frozen=True)
class RawJudgment:
    query_id: str
    doc_id: str
    page_no: int
    block_id: str | None
    relevant: bool


@dataclass(frozen=True)
class PipelineMetrics:
    p_at_5: float
    p_at_3: float
    p_at_1: float
    mrr: float
    num_queries: int


@dataclass(frozen=True)
class MetricsReport:
    per_pipeline: dict[str, PipelineMetrics]
    warnings: tuple[str, ...] = ()


def precision_at_k(ranked_unit_ids: list[str], relevant: set[str], k: int) -> float:
    """Relevant hits in the top min(k, length) positions, divided by k.

    Short result lists are penalized: the divisor stays k even when fewer
    than k results came back.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    head = ranked_unit_ids[:k]
    return sum(1 for uid in head if uid in relevant) / k


def reciprocal_rank(ranked_unit_ids: list[str], relevant: set[str]) -> float:
    for i, uid in enumerate(ranked_unit_ids, start=1):
        if uid in relevant:
            return 1.0 / i
    return 0.0


def run_benchmark(
    queries: Iterable[BenchmarkQuery],
    relevant_by_query: Mapping[str, set[str]],
    runners: Mapping[str, Callable[[Query], RankedList]],
    depth: int = RUN_DEPTH,
) -> MetricsReport:
    query_list = list(queries)
    if not query_list:
        raise ValueError("benchmark has no queries")
    warnings: list[str] = []
    per_pipeline: dict[str, PipelineMetrics] = {}
    for name, runner in runners.items():
        try:
            kind = PipelineKind(name)
        except ValueError:
            kind = PipelineKind.KEYWORD  # runners are free to ignore this field
        sums = {"p5": 0.0, "p3": 0.0, "p1": 0.0, "rr": 0.0}
        for bq in query_list:
            relevant = relevant_by_query.get(bq.query_id, set())
            try:
                ranked = runner(Query(text=bq.text, modality=bq.modality, pipeline=kind, k=depth))
            except SarchError as exc:
                warnings.append(f"pipeline '{name}' failed on query '{bq.query_id}': {exc}")
                continue  # zero contribution, query still counted below
            ids = ranked.unit_ids()
            sums["p5"] += precision_at_k(ids, relevant, 5)
            sums["p3"] += precision_at_k(ids, relevant, 3)
            sums["p1"] += precision_at_k(ids, relevant, 1)
            sums["rr"] += reciprocal_rank(ids, relevant)
        n = len(query_list)
        per_pipeline[name] = PipelineMetrics(
            p_at_5=sums["p5"] / n,
            p_at_3=sums["p3"] / n,
            p_at_1=sums["p1"] / n,
            mrr=sums["rr"] / n,
            num_queries=n,
        )
    return MetricsReport(per_pipeline=per_pipeline, warnings=tuple(warnings))


def load_benchmark_file(path: str | Path) -> list[BenchmarkQuery]:
    """Tab-separated query file: query_id, modality, text. '#' lines are comments."""
    queries: list[BenchmarkQuery] = []
    seen: set[str] = set()
    for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"benchmark line {lineno}: expected 3 tab-separated fields")
        query_id, modality_name, text = (p.strip() for p in parts)
        if query_id in seen:
            raise ValueError(f"benchmark line {lineno}: duplicate query id '{query_id}'")
        seen.add(query_id)
        try:
            modality = Modality(modality_name)
        except ValueError:
            raise ValueError(f"benchmark line {lineno}: unknown modality '{modality_name}'") from None
        if not text:
            raise ValueError(f"benchmark line {lineno}: empty query text")
        queries.append(BenchmarkQuery(query_id=query_id, modality=modality, text=text))
    return queries


def load_judgments_file(path: str | Path) -> list[RawJudgment]:
    """Tab-separated judgments: query_id, doc_id, page_no, block_id (may be empty), 0/1."""
    judgments: list[RawJudgment] = []
    for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 5:
            raise ValueError(f"judgments line {lineno}: expected 5 tab-separated fields")
        query_id, doc_id, page_raw, block_id, flag = (p.strip() for p in parts)
        if flag not in ("0", "1"):
            raise ValueError(f"judgments line {lineno}: relevance flag must be 0 or 1")
        judgments.append(
            RawJudgment(
                query_id=query_id,
                doc_id=doc_id,
                page_no=int(page_raw),
                block_id=block_id or None,
                relevant=flag == "1",
            )
        )
    return judgments


def resolve_judgments(
    judgments: Iterable[RawJudgment], index: InvertedIndex
) -> tuple[dict[str, set[str]], list[str]]:
    """Map raw judgments to indexed unit ids.

    An empty block id denotes the page's text unit. Judgments that point at
    nothing in the index are dropped with a warning so a stale judgments
    file cannot silently distort the metrics.
    """
    by_location: dict[tuple[str, int, str | None], str] = {}
    for unit in index.units.values():
        by_location[(unit.doc_id, unit.page_no, unit.block_id)] = unit.unit_id
    relevant_by_query: dict[str, set[str]] = {}
    warnings: list[str] = []
    for j in judgments:
        uid = by_location.get((j.doc_id, j.page_no, j.block_id))
        if uid is None:
            warnings.append(
                f"judgment for query '{j.query_id}' points at an unindexed unit "
                f"({j.doc_id} page {j.page_no} block {j.block_id or '-'})"
            )
            continue
        if j.relevant:
            relevant_by_query.setdefault(j.query_id, set()).add(uid)
    return relevant_by_query, warnings


def report_to_dict(report: MetricsReport) -> dict:
    return {
        "pipelines": {
            name: {
                "p_at_5": m.p_at_5,
                "p_at_3": m.p_at_3,
                "p_at_1": m.p_at_1,
                "mrr": m.mrr,
                "num_queries": m.num_queries,
            }
            for name, m in report.per_pipeline.items()
        },
        "warnings": list(report.warnings),
    }


def report_to_json(report: MetricsReport) -> str:
    return json.dumps(report_to_dict(report), indent=2)


def render_report_text(report: MetricsReport) -> str:
    lines = [f"{'pipeline':<12} {'P@5':>7} {'P@3':>7} {'P@1':>7} {'MRR':>7}"]
    for name, m in report.per_pipeline.items():
        lines.append(f"{name:<12} {m.p_at_5:>7.3f} {m.p_at_3:>7.3f} {m.p_at_1:>7.3f} {m.mrr:>7.3f}")
    for w in report.warnings:
        lines.append(f"warning: {w}")
    return "\n".join(lines)
