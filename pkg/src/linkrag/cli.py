"""``linkrag`` command line: ingest, query, bench, report, inspect, seed-corpus."""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import __version__
from .bench import (DEFAULT_CONFIGS, DEFAULT_KINDS, EmbeddingScorer, aggregate_report,
                    format_report, iter_benchmark, load_external_scores, load_suite,
                    read_records, sort_records, template_for, write_records)
from .config import FIELD_TYPES, AppConfig, resolve_config
from .corpus import write_synthetic_corpus
from .embedding import HashingEmbedder, RemoteEmbedder
from .exceptions import LinkRagError
from .index import build_index, load_index, save_index
from .ingest import ingest_corpus, write_warnings
from .llm import MockGenerator, PromptKind, RemoteGenerator, render_prompt
from .retrieval import RetrievalConfig, retrieve

logger = logging.getLogger("linkrag")


class CommandError(Exception):
    """A failure reported to the user as one line."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(2, f"{self.prog}: error: {message}\n")


def make_embedder(config: AppConfig):
    if config.embedder == "remote":
        return RemoteEmbedder(config.embedding_endpoint, config.embedding_model)
    return HashingEmbedder()


def make_generator(config: AppConfig):
    if config.generator == "remote":
        return RemoteGenerator(config.generation_endpoint, config.generation_model)
    return MockGenerator()


def parse_config_spec(spec: str) -> tuple[str, RetrievalConfig]:
    """``label=k:n_links,depth,top_m[:mode]`` as used by ``bench --configs``."""
    label, sep, rest = spec.partition("=")
    if not sep or not label:
        raise ValueError(f"bad config spec {spec!r}, expected label=k:n,d,m")
    parts = rest.split(":")
    if len(parts) not in (2, 3):
        raise ValueError(f"bad config spec {spec!r}, expected label=k:n,d,m")
    kwargs = {"k": int(parts[0])}
    if len(parts) == 3:
        kwargs["assembly_mode"] = parts[2]
    return label, RetrievalConfig.parse_triple(parts[1], **kwargs)


def _load(config: AppConfig):
    embedder = make_embedder(config)
    expected = embedder.identifier if config.embedder == "offline" else None
    return load_index(config.index_path, expected_embedder=expected), embedder


def cmd_ingest(config: AppConfig, args) -> int:
    if not config.corpus_root:
        raise CommandError("ingest needs a corpus root (--corpus-root or LINKRAG_CORPUS_ROOT)")
    warnings = []
    chunks = ingest_corpus(config.corpus_root, config.base_url_prefix, config.chunk_size,
                           config.overlap, warnings, max_workers=args.workers)
    if not chunks:
        raise CommandError(f"no text found under {config.corpus_root}")
    index = build_index(chunks, make_embedder(config))
    save_index(index, config.index_path)
    warnings_path = args.warnings or config.index_path + ".warnings.jsonl"
    write_warnings(warnings, warnings_path)
    links = [link for c in index.chunks() for link in c.links]
    internal = sum(link.is_internal for link in links)
    print(f"indexed {len(index)} chunks from {len(index.by_page)} pages")
    print(f"links: {len(links)} ({internal} internal, {len(links) - internal} external)")
    print(f"warnings: {len(warnings)} -> {warnings_path}")
    print(f"index: {config.index_path}")
    return 0


def format_trace(context, config: RetrievalConfig) -> str:
    lines = [f"trace: k={config.k} config={','.join(map(str, config.triple))} "
             f"mode={config.assembly_mode}"]
    for seed in context.seeds:
        lines.append(f"  seed {seed.score:.4f} {seed.id}")
    for item in context.expanded:
        lines.append(f"  expanded {item.link_score:.4f} {item.id} via {item.via.href} "
                     f"from {item.parent_id}")
    for event in context.events:
        lines.append(f"  event {event}")
    lines.append(f"  final {len(context.final)} chunks")
    return "\n".join(lines)


def cmd_query(config: AppConfig, args) -> int:
    retrieval = config.retrieval
    if args.config:
        retrieval = RetrievalConfig.parse_triple(args.config, k=retrieval.k,
                                                 assembly_mode=retrieval.assembly_mode)
    index, embedder = _load(config)
    context = retrieve(index, embedder, args.question, retrieval)
    if not context.final:
        raise CommandError("retrieval returned no chunks")
    kind = template_for(PromptKind(config.prompt_kind), retrieval)
    prompt = render_prompt(kind, context, args.question, context.events)
    result = make_generator(config).generate(prompt)
    print(result.answer)
    print()
    print(format_trace(context, retrieval))
    estimate = " (estimated)" if result.estimated else ""
    print(f"  tokens {result.total_tokens}{estimate} prompt={kind.value}")
    return 0


def cmd_bench(config: AppConfig, args) -> int:
    cases = load_suite(args.suite)
    kinds = [PromptKind(k.strip()) for k in args.kinds.split(",")] if args.kinds else list(DEFAULT_KINDS)
    configs = [parse_config_spec(s) for s in args.configs] if args.configs else list(DEFAULT_CONFIGS)
    index, embedder = _load(config)
    external = load_external_scores(args.scores) if args.scores else None
    scorer = None if external is not None else EmbeddingScorer()
    records = []
    try:
        for record in iter_benchmark(cases, kinds, configs, index, embedder,
                                     make_generator(config), scorer=scorer,
                                     external_scores=external, max_workers=args.workers):
            records.append(record)
    except BaseException as exc:
        write_records(sort_records(records), args.out)
        cause = "interrupted" if isinstance(exc, KeyboardInterrupt) else f"{type(exc).__name__}: {exc}"
        raise CommandError(f"bench stopped after {len(records)} records ({cause}); "
                           f"partial results in {args.out}") from exc
    records = sort_records(records)
    write_records(records, args.out)
    failed = [r for r in records if r.error]
    print(f"wrote {len(records)} records to {args.out}")
    if failed:
        raise CommandError(f"{len(failed)} of {len(records)} records failed; "
                           f"first: {failed[0].key} {failed[0].error}")
    return 0


def cmd_report(config: AppConfig, args) -> int:
    records = read_records(args.records)
    if not records:
        raise CommandError(f"{args.records} contains no records")
    report = aggregate_report(records, n_bins=args.bins)
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        print(format_report(report))
    return 0


def cmd_inspect(config: AppConfig, args) -> int:
    index, _ = _load(config)
    if args.id not in index:
        raise CommandError(f"no chunk with id {args.id!r}")
    chunk = index.chunk(args.id)
    payload = {**chunk.metadata(), "chunk_index": chunk.chunk_index,
               "internal": [link.is_internal for link in chunk.links], "text": chunk.text}
    print(json.dumps(payload, indent=2, ensure_ascii=False))
    return 0


def cmd_seed_corpus(config: AppConfig, args) -> int:
    corpus_dir, suite_path = write_synthetic_corpus(args.directory)
    print(f"corpus: {corpus_dir}")
    print(f"suite: {suite_path}")
    return 0


def _add_config_flags(parser):
    group = parser.add_argument_group("configuration (flag > env > file > default)")
    group.add_argument("--config-file", help="JSON file with configuration fields")
    for name, kind in FIELD_TYPES.items():
        group.add_argument(f"--{name.replace('_', '-')}", dest=name, type=kind, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="linkrag", description="Link-aware retrieval over hyperlinked HTML docs.")
    parser.add_argument("--version", action="version", version=f"linkrag {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="parse a corpus and build the index")
    p.add_argument("--warnings", help="link warnings JSONL (default: <index>.warnings.jsonl)")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("query", help="answer one question and print the retrieval trace")
    p.add_argument("question")
    p.add_argument("--config", help="expansion triple n_links,depth,top_m")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("bench", help="run the query x prompt x config grid")
    p.add_argument("--suite", required=True, help="JSONL suite (query_id, question, reference)")
    p.add_argument("--out", required=True, help="records CSV to write")
    p.add_argument("--kinds", help="comma-separated prompt kinds")
    p.add_argument("--configs", nargs="+", metavar="LABEL=K:N,D,M",
                   help="configurations, e.g. RAG_k5=5:0,0,0 LARAG=5:1,1,1")
    p.add_argument("--scores", help="external P/R/F1 CSV instead of the built-in scorer")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("report", help="aggregate a records CSV")
    p.add_argument("records")
    p.add_argument("--bins", type=int, default=4)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("inspect", help="print one chunk's metadata")
    p.add_argument("--id", required=True)
    p.set_defaults(func=cmd_inspect)

    p = sub.add_parser("seed-corpus", help="write the bundled synthetic corpus and suite")
    p.add_argument("directory")
    p.set_defaults(func=cmd_seed_corpus)

    for action in sub.choices.values():
        _add_config_flags(action)
    return parser


def main(argv=None, env=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        flags = {name: getattr(args, name) for name in FIELD_TYPES}
        config = resolve_config(flags, env, args.config_file)
        return args.func(config, args)
    except (CommandError, LinkRagError, ValueError, OSError, KeyError) as exc:
        message = " ".join(str(exc).split()) or type(exc).__name__
        print(f"linkrag {args.command}: error: {message}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
