"""``pdnet`` command line."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .discovery.query import QueryFilter, parse_where, query_datasets
from .discovery.rwr import RwrParams, similar_datasets
from .errors import PdnetError
from .evaluation import (
    BenchConfig,
    eval_er,
    eval_extraction,
    format_report,
    read_er_gold,
    read_extraction_gold,
    run_benchmark,
)
from .extraction.clients import RecordingClient, RemoteClient, ReplayClient, ScriptedClient
from .extraction.runner import ExtractionRun, extract_corpus
from .ingestion import Strategy, load_corpus, paper_from_dict, paper_to_dict
from .model import DatasetEntity, normalize_name
from .resolution import ResolutionConfig, resolve
from .store import (
    build_network,
    compute_stats,
    export_graph,
    import_entities,
    load_network,
    read_descriptions,
    read_entities,
    read_jsonl,
    read_matches,
    save_network,
    write_jsonl,
)

log = logging.getLogger("pdnet")


def load_entities(path: str | Path) -> list[DatasetEntity]:
    """Internal entity JSONL, or a PwC-shaped snapshot to import."""
    with open(path, encoding="utf-8") as fh:
        first = next((line for line in fh if line.strip()), "")
    if first and "entity_id" in json.loads(first):
        return read_entities(path)
    entities, _ = import_entities(path)
    return entities


def load_config(path: str | None) -> ResolutionConfig:
    if not path:
        return ResolutionConfig()
    return ResolutionConfig.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def make_client(args: argparse.Namespace):
    if args.backend == "replay":
        if not args.replay_dir:
            raise SystemExit("--replay-dir is required for the replay backend")
        client = ReplayClient(args.replay_dir)
    elif args.backend == "remote":
        client = RemoteClient()
    else:
        client = ScriptedClient(default="[]")
    if getattr(args, "record_dir", None):
        client = RecordingClient(client, args.record_dir)
    return client


def cmd_ingest(args: argparse.Namespace) -> int:
    papers, skipped = load_corpus(args.corpus)
    write_jsonl(args.out, (paper_to_dict(p) for p in papers))
    for s in skipped:
        print(f"skipped {s.path}: {s.reason}", file=sys.stderr)
    print(f"{len(papers)} papers written to {args.out} ({len(skipped)} skipped)")
    return 0


def cmd_extract(args: argparse.Namespace) -> int:
    papers = [paper_from_dict(r, r.get("source_path", "")) for r in read_jsonl(args.papers)]
    client = make_client(args)
    results = extract_corpus(
        papers, client, Strategy.parse(args.strategy), budget=args.budget, workers=args.workers, retries=args.retries
    )
    write_jsonl(args.out, (d.to_dict() for _, descs in results for d in descs))
    if args.runs:
        write_jsonl(args.runs, (run.to_dict() for run, _ in results))
    ok = sum(run.parse_ok for run, _ in results)
    print(f"{ok}/{len(results)} papers parsed, {sum(len(d) for _, d in results)} descriptions")
    return 0


def cmd_resolve(args: argparse.Namespace) -> int:
    descriptions = read_descriptions(args.descriptions)
    entities = load_entities(args.entities)
    result = resolve(descriptions, entities, load_config(args.config))
    write_jsonl(args.matches, (m.to_dict() for m in result.matches))
    if args.new_entities:
        write_jsonl(args.new_entities, (e.to_dict() for e in result.new_entities))
    if args.entities_out:
        write_jsonl(args.entities_out, (e.to_dict() for e in entities + result.new_entities))
    report = result.report()
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(json.dumps(report["match_counts"], sort_keys=True))
    return 0


def cmd_build(args: argparse.Namespace) -> int:
    papers = [paper_from_dict(r) for r in read_jsonl(args.papers)]
    entities = load_entities(args.entities)
    for extra in args.new_entities or []:
        entities += read_entities(extra)
    runs = [ExtractionRun.from_dict(r) for r in read_jsonl(args.runs)] if args.runs else []
    net = build_network(papers, read_descriptions(args.descriptions), read_matches(args.matches), entities)
    save_network(net, args.out, runs)
    print(f"network: {len(net.papers)} papers, {len(net.entities)} datasets, {len(net.edges)} edges -> {args.out}")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    net, runs = load_network(args.network)
    sys.stdout.write(compute_stats(net, runs).to_json())
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    net, _ = load_network(args.network)
    export_graph(net, args.format, args.out)
    print(f"wrote {args.format} to {args.out}")
    return 0


def cmd_query(args: argparse.Namespace) -> int:
    net, _ = load_network(args.network)
    flt = QueryFilter(tuple(parse_where(w) for w in args.where))
    for d in query_datasets(net.descriptions.values(), flt):
        print(json.dumps(d.to_dict(), ensure_ascii=False, sort_keys=True))
    return 0


def _find_entity(net, seed: str) -> str:
    if seed in net.entities:
        return seed
    key = normalize_name(seed)
    for eid in sorted(net.entities):
        if key in net.entities[eid].name_keys:
            return eid
    return seed


def cmd_similar(args: argparse.Namespace) -> int:
    net, _ = load_network(args.network)
    seed = _find_entity(net, args.seed)
    for eid, score in similar_datasets(net, seed, RwrParams(restart_prob=args.c, top_k=args.k)):
        print(f"{score:.4f}\t{eid}\t{net.entities[eid].canonical_name}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .discovery.service import serve

    host, _, port = args.addr.rpartition(":")
    serve(args.network, host or "127.0.0.1", int(port))
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    if args.task == "extraction":
        gold = read_extraction_gold(args.gold)
        preds: dict[str, set[str]] = {g.paper_id: set() for g in gold}
        for d in read_descriptions(args.predictions):
            if d.name_key is not None:
                preds.setdefault(d.paper_id, set()).add(d.dataset_name)
        aliases = json.loads(Path(args.alias_table).read_text(encoding="utf-8")) if args.alias_table else None
        out = eval_extraction(preds, gold, aliases).to_dict()
    else:
        entities = load_entities(args.entities) if args.entities else []
        from dataclasses import asdict

        out = asdict(eval_er(read_matches(args.predictions), read_er_gold(args.gold, entities)))
    print(json.dumps(out, indent=2, sort_keys=True))
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = BenchConfig.from_file(args.config)
    entities = load_entities(cfg.entities)
    papers = load_corpus(cfg.corpus)[0] if cfg.corpus else []
    client = ReplayClient(cfg.replay) if cfg.replay else None
    report = run_benchmark(
        papers,
        entities,
        cfg,
        client=client,
        descriptions=read_descriptions(cfg.descriptions) if cfg.descriptions else None,
        extraction_gold=read_extraction_gold(cfg.extraction_gold) if cfg.extraction_gold else (),
        er_gold=read_er_gold(cfg.er_gold, entities) if cfg.er_gold else None,
        alias_table=json.loads(cfg.alias_table.read_text(encoding="utf-8")) if cfg.alias_table else None,
    )
    if args.out:
        Path(args.out).write_text(json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(format_report(report))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pdnet", description="Paper-dataset network construction and discovery")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load a corpus directory into papers.jsonl")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("extract", help="extract dataset descriptions from papers")
    p.add_argument("--papers", required=True)
    p.add_argument("--backend", choices=["replay", "remote", "mock"], default="replay")
    p.add_argument("--replay-dir")
    p.add_argument("--record-dir", help="also write every completion as a replay fixture")
    p.add_argument("--strategy", choices=["truncated", "full", "agentic"], default="truncated")
    p.add_argument("--budget", type=int, default=1500)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--retries", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--runs")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("resolve", help="match descriptions to entities and discover new ones")
    p.add_argument("--descriptions", required=True)
    p.add_argument("--entities", required=True, help="PwC-shaped snapshot or entity JSONL")
    p.add_argument("--config")
    p.add_argument("--matches", required=True)
    p.add_argument("--new-entities")
    p.add_argument("--entities-out", help="write imported + discovered entities as entity JSONL")
    p.add_argument("--report")
    p.set_defaults(func=cmd_resolve)

    p = sub.add_parser("build", help="assemble the network snapshot")
    p.add_argument("--papers", required=True)
    p.add_argument("--descriptions", required=True)
    p.add_argument("--matches", required=True)
    p.add_argument("--entities", required=True)
    p.add_argument("--new-entities", action="append")
    p.add_argument("--runs")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("stats", help="print network statistics")
    p.add_argument("--network", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("export", help="export the network as GraphML or DOT")
    p.add_argument("--network", required=True)
    p.add_argument("--format", choices=["graphml", "dot"], required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("query", help="filter dataset descriptions")
    p.add_argument("--network", required=True)
    p.add_argument("--where", action="append", required=True, help='FIELD~VALUE (contains) or FIELD=VALUE (equals)')
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("similar", help="datasets similar to a seed by random walk with restart")
    p.add_argument("--network", required=True)
    p.add_argument("--seed", required=True, help="entity id or dataset name")
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--c", type=float, default=0.15, help="restart probability")
    p.set_defaults(func=cmd_similar)

    p = sub.add_parser("serve", help="serve the network over HTTP")
    p.add_argument("--network", required=True)
    p.add_argument("--addr", default="127.0.0.1:8000")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("eval", help="score predictions against gold annotations")
    p.add_argument("--task", choices=["extraction", "er"], required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--predictions", required=True, help="descriptions.jsonl (extraction) or matches.jsonl (er)")
    p.add_argument("--alias-table")
    p.add_argument("--entities")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="run the baseline comparison")
    p.add_argument("--config", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (PdnetError, OSError, ValueError) as exc:
        print(f"pdnet: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
