"""Command line interface.

Subcommands: ingest, search, eval, serve, enhance, contextualize. Every
error path prints a message to stderr and exits non-zero.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import build_provider, load_config
from .context import Lexicon
from .embedding import DEFAULT_DIM, ExternalServiceProvider, HashingProvider, Provider
from .enhance import BilateralParams, enhance, load_image, save_image
from .errors import SarchError
from .evaluation import (
    MetricsReport,
    load_benchmark_file,
    load_judgments_file,
    render_report_text,
    report_to_json,
    resolve_judgments,
    run_benchmark,
)
from .model import Modality, load_extraction_file
from .persistence import load_index, save_index
from .pipeline import contextualize_document, ingest_corpus_dir
from .retrieval import PipelineKind, Query, SearchEngine, load_stopwords

DEFAULT_INDEX = "sarch_index.bin"


def _provider_from_args(args: argparse.Namespace) -> Provider:
    if args.provider == "hash":
        return HashingProvider(dim=args.dim)
    if not args.endpoint:
        raise SarchError("--provider external needs --endpoint")
    return ExternalServiceProvider(endpoint=args.endpoint)


def _provider_from_hint(hint: dict) -> Provider:
    kind = hint.get("kind", "hash")
    if kind == "hash":
        return HashingProvider(dim=int(hint.get("dim") or DEFAULT_DIM))
    if kind == "external":
        endpoint = hint.get("endpoint")
        if not endpoint:
            raise SarchError("index was built with an external provider but records no endpoint")
        return ExternalServiceProvider(endpoint=endpoint)
    raise SarchError(f"index records unknown provider kind '{kind}'")


def _load_engine(index_path: str) -> SearchEngine:
    path = Path(index_path)
    if not path.is_file():
        raise SarchError(f"no index found at '{path}' (run 'sarch ingest' first)")
    persisted = load_index(path)
    provider = _provider_from_hint(persisted.manifest.get("provider", {}))
    return SearchEngine.from_persisted(persisted, provider)


def _cmd_ingest(args: argparse.Namespace) -> int:
    provider = _provider_from_args(args)
    lexicon = Lexicon.from_file(args.lexicon) if args.lexicon else None
    result = ingest_corpus_dir(args.corpus_dir, provider, lexicon)
    save_index(args.out, result.to_persisted())
    corpus = result.manifest["corpus"]
    units = result.manifest["units"]
    print(
        f"indexed {corpus['num_documents']} documents, {corpus['num_pages']} pages, "
        f"{corpus['num_images']} images, {corpus['num_tables']} tables"
    )
    print(
        f"units: text={units['text']} image={units['image']} table={units['table']}"
    )
    print(f"wrote {args.out}")
    return 0


def _cmd_search(args: argparse.Namespace) -> int:
    engine = _load_engine(args.index)
    query = Query(
        text=args.query,
        modality=Modality(args.modality),
        pipeline=PipelineKind(args.pipeline),
        k=args.k,
    )
    ranked = engine.search(query)
    if not len(ranked):
        print("no results")
        return 0
    for entry in ranked:
        record = engine.display.get(entry.unit_id, {})
        line = f"{entry.rank:>2}. {entry.score:8.4f}  {entry.unit_id}"
        caption = record.get("caption")
        if caption:
            line += f"  [{caption}]"
        print(line)
        text = record.get("text", "")
        if text:
            flat = " ".join(text.split())
            print(f"      {flat[:160]}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    engine = _load_engine(args.index)
    if args.benchmark:
        queries = load_benchmark_file(args.benchmark)
    else:
        from importlib import resources

        with resources.as_file(
            resources.files("sarch.data").joinpath("benchmark_queries.tsv")
        ) as path:
            queries = load_benchmark_file(path)
    raw = load_judgments_file(args.judgments)
    relevant_by_query, warnings = resolve_judgments(raw, engine.index)
    report = run_benchmark(queries, relevant_by_query, engine.runners())
    if warnings:
        report = MetricsReport(
            per_pipeline=report.per_pipeline,
            warnings=tuple(warnings) + report.warnings,
        )
    print(report_to_json(report) if args.json else render_report_text(report))
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    config = load_config(args.config)
    serve(config)
    return 0


def _cmd_enhance(args: argparse.Namespace) -> int:
    image = load_image(args.input)
    params = BilateralParams(
        sigma_spatial=args.sigma_spatial,
        sigma_range=args.sigma_range,
        radius=args.radius,
    )
    threshold, binary = enhance(image, params)
    save_image(args.output, binary)
    print(f"threshold: {threshold}")
    print(f"wrote {args.output}")
    return 0


def _cmd_contextualize(args: argparse.Namespace) -> int:
    doc = load_extraction_file(args.extraction_file)
    payload = contextualize_document(doc)
    text = json.dumps(payload, indent=2, ensure_ascii=False)
    if args.out:
        Path(args.out).write_text(text + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sarch",
        description="Multimodal search over layout-parsed scans of archaeological archives.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="parse, contextualize and index a corpus directory")
    p_ingest.add_argument("corpus_dir", help="directory of extraction .json files")
    p_ingest.add_argument("--out", default=DEFAULT_INDEX, help="index file to write")
    p_ingest.add_argument("--provider", choices=["hash", "external"], default="hash")
    p_ingest.add_argument("--dim", type=int, default=DEFAULT_DIM, help="hash embedding dimension")
    p_ingest.add_argument("--endpoint", default="", help="external provider base URL")
    p_ingest.add_argument("--lexicon", default="", help="word list for OCR spell correction")
    p_ingest.set_defaults(func=_cmd_ingest)

    p_search = sub.add_parser("search", help="query an index")
    p_search.add_argument("query")
    p_search.add_argument("--index", default=DEFAULT_INDEX)
    p_search.add_argument("--modality", choices=[m.value for m in Modality], default="text")
    p_search.add_argument(
        "--pipeline", choices=[p.value for p in PipelineKind], default="hybrid"
    )
    p_search.add_argument("--k", type=int, default=5)
    p_search.set_defaults(func=_cmd_search)

    p_eval = sub.add_parser("eval", help="run the retrieval quality benchmark")
    p_eval.add_argument("--index", default=DEFAULT_INDEX)
    p_eval.add_argument("--benchmark", default="", help="query TSV (defaults to the built-in set)")
    p_eval.add_argument("--judgments", required=True, help="relevance judgments TSV")
    p_eval.add_argument("--json", action="store_true", help="emit the report as JSON")
    p_eval.set_defaults(func=_cmd_eval)

    p_serve = sub.add_parser("serve", help="run the HTTP search service")
    p_serve.add_argument("--config", default=None, help="key=value config file")
    p_serve.set_defaults(func=_cmd_serve)

    p_enhance = sub.add_parser("enhance", help="grayscale, bilateral filter and binarize a scan")
    p_enhance.add_argument("input", help="PGM or PNG image")
    p_enhance.add_argument("output", help="binary PGM or PNG to write")
    p_enhance.add_argument("--sigma-spatial", type=float, default=2.0)
    p_enhance.add_argument("--sigma-range", type=float, default=40.0)
    p_enhance.add_argument("--radius", type=int, default=None)
    p_enhance.set_defaults(func=_cmd_enhance)

    p_ctx = sub.add_parser(
        "contextualize", help="print an extraction file with context attached to images and tables"
    )
    p_ctx.add_argument("extraction_file")
    p_ctx.add_argument("--out", default="", help="write JSON here instead of stdout")
    p_ctx.set_defaults(func=_cmd_contextualize)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SarchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
