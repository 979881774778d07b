"""Command-line entry points.

Subcommands: ingest, pathgen, qagen, train, eval, serve, gradcheck,
quality-sample, fixture-site.  Values come from flags, falling back to an
optional JSON config file (--config) and WEBNAVKIT_* environment variables
for the service settings.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import datagen, fixtures, harness, simulator, train as train_mod
from .model import (
    ModelConfig,
    SiteAssets,
    init_params,
    load_checkpoint,
    vocab_from_dataset,
)
from .sitegraph import load_site, save_graph
from .taxonomy import load_taxonomy, toy_taxonomy


def _env_default(key: str, fallback=None):
    return os.environ.get(f"WEBNAVKIT_{key.upper()}", fallback)


def cmd_ingest(args) -> int:
    graph = load_site(args.site_dir)
    out = Path(args.out) if args.out else Path(args.site_dir) / "graph.json"
    save_graph(graph, out)
    print(f"{graph.site_id}: {len(graph.pages)} pages, {graph.edge_count} edges "
          f"({graph.dropped_buttons} dangling buttons dropped) -> {out}")
    return 0


def cmd_pathgen(args) -> int:
    graph = load_site(args.site_dir)
    sampled = datagen.sample_paths(graph, args.n, seed=args.seed)
    payload = [{"path": path, "target": target} for path, target in sampled]
    Path(args.out).write_text(json.dumps(payload, indent=2))
    lengths = [len(path) - 1 for path, _ in sampled]
    print(f"sampled {len(sampled)} paths (transitions min={min(lengths)} "
          f"max={max(lengths)} mean={sum(lengths) / len(lengths):.2f}) -> {args.out}")
    return 0


def cmd_qagen(args) -> int:
    graph = load_site(args.site_dir)
    if args.paths:
        raw = json.loads(Path(args.paths).read_text())
        paths = [(entry["path"], entry["target"]) for entry in raw]
    else:
        paths = datagen.sample_paths(graph, args.n, seed=args.seed)
    if args.llm == "mock":
        mock_dir = args.mock_dir or Path(args.site_dir) / "mock_llm"
        client = datagen.MockLLMClient(Path(mock_dir))
    else:
        client = datagen.HttpLLMClient.from_env()
    rules = None
    if args.rules:
        rules = [line for line in Path(args.rules).read_text().splitlines() if line.strip()]
    records, report = datagen.generate_records(
        graph, paths, client, datagen.StoredCaptioner(), rules=rules, seed=args.seed
    )
    simulator.write_records(records, args.out)
    counts = {}
    for record in records:
        counts[record.split] = counts.get(record.split, 0) + 1
    print(f"wrote {report.generated} records to {args.out} "
          f"(splits: {counts}, skipped targets: {len(report.skipped)})")
    return 0


def _model_config(args) -> ModelConfig:
    return ModelConfig(dim=args.dim, heads=args.heads)


def cmd_train(args) -> int:
    graph = load_site(args.site_dir)
    records = [r for r in simulator.read_records(args.dataset)
               if not args.split or r.split == args.split]
    if not records:
        print(f"no records in split {args.split!r}", file=sys.stderr)
        return 1
    model_config = _model_config(args)
    vocab = vocab_from_dataset(records, graph)
    params = init_params(model_config, len(vocab), seed=args.seed)
    config = train_mod.TrainConfig(
        learning_rate=args.lr,
        iterations=args.iterations,
        batch_size=args.batch_size,
        eta=args.eta,
        lam=args.lam,
        seed=args.seed,
        checkpoint_every=args.checkpoint_every,
    )
    history = train_mod.train(
        records, graph, params,
        vocab=vocab, model_config=model_config, config=config,
        assets=SiteAssets(args.site_dir, model_config),
        log_path=args.log, checkpoint_path=args.checkpoint,
    )
    print(f"trained {len(history)} steps; "
          f"first loss {history[0].loss:.4f}, last loss {history[-1].loss:.4f}; "
          f"checkpoint -> {args.checkpoint}")
    return 0


def cmd_eval(args) -> int:
    graph = load_site(args.site_dir)
    records = simulator.read_records(args.dataset)
    tax = load_taxonomy(args.taxonomy) if args.taxonomy else toy_taxonomy()
    agent = harness.make_agent(
        args.agent,
        seed=args.seed,
        checkpoint=args.checkpoint,
        assets=SiteAssets(args.site_dir, load_checkpoint(args.checkpoint)[1])
        if args.agent == "learned" and args.checkpoint else None,
        mock_dir=args.mock_dir,
    )
    result = harness.run_eval(
        agent, records, graph, tax=tax, split=args.split,
        max_steps=args.max_steps, out_dir=args.out_dir, label=args.agent,
    )
    from .metrics import format_report_table

    print(format_report_table(result.report, label=args.agent))
    if result.errors:
        print(f"{len(result.errors)} episodes failed", file=sys.stderr)
    return 0


def cmd_serve(args) -> int:
    from .service import ServiceConfig, serve

    if args.config:
        config = ServiceConfig.from_file(
            args.config,
            site_dir=args.site_dir, dataset_path=args.dataset,
            runs_dir=args.runs_dir, ui_dist=args.ui,
            auth_token=args.token,
        )
    else:
        config = ServiceConfig(
            site_dir=Path(args.site_dir),
            dataset_path=Path(args.dataset),
            runs_dir=Path(args.runs_dir or _env_default("runs_dir", "runs")),
            ui_dist=Path(args.ui) if args.ui else None,
            auth_token=args.token or _env_default("token", "") or "",
        )
    serve(config, host=args.host, port=args.port)
    return 0


def cmd_gradcheck(args) -> int:
    graph = fixtures.graph_from_adjacency(
        {"home": ["a", "b"], "a": ["t"], "b": ["t", "home"], "t": []}, "home"
    )
    record = simulator.EpisodeRecord(
        record_id="gc", site_id="toy", question="where are the socks",
        description="", answer="on page t", path=("home", "a", "t"),
    )
    model_config = ModelConfig(
        dim=args.dim, heads=args.heads, max_text_len=16, max_answer_len=8, ffn_mult=2
    )
    vocab = vocab_from_dataset([record], graph)
    params = init_params(model_config, len(vocab), seed=args.seed)
    err = train_mod.grad_check(
        params, record, graph,
        vocab=vocab, model_config=model_config, n_coords=args.coords, seed=args.seed,
    )
    print(f"max relative gradient error over >={args.coords} coordinates: {err:.3e}")
    return 0 if err <= 1e-4 else 1


def cmd_quality_sample(args) -> int:
    records = simulator.read_records(args.dataset)
    sample = datagen.quality_sample(records, k=args.k, seed=args.seed)
    for record in sample:
        print(json.dumps(record.to_json()))
    return 0


def cmd_fixture_site(args) -> int:
    site_dir = fixtures.make_fixture_site(args.out_dir, n_products=args.products, seed=args.seed)
    fixtures.make_mock_llm_responses(site_dir, n_products=args.products,
                                     pairs_per_product=args.pairs)
    print(f"fixture site with {args.products} products -> {site_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="webnavkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="parse a snapshot into graph.json")
    p.add_argument("site_dir")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("pathgen", help="sample shortest ground-truth paths")
    p.add_argument("site_dir")
    p.add_argument("-n", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="paths.json")
    p.set_defaults(func=cmd_pathgen)

    p = sub.add_parser("qagen", help="generate QA records via an LLM client")
    p.add_argument("site_dir")
    p.add_argument("--paths")
    p.add_argument("-n", type=int, default=20)
    p.add_argument("--llm", choices=["mock", "http"], default="mock")
    p.add_argument("--mock-dir")
    p.add_argument("--rules")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="dataset.jsonl")
    p.set_defaults(func=cmd_qagen)

    p = sub.add_parser("train", help="train the toy model")
    p.add_argument("site_dir")
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", default="train")
    p.add_argument("--iterations", type=int, default=2000)
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--dim", type=int, default=64)
    p.add_argument("--heads", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--checkpoint", default="model.ckpt")
    p.add_argument("--checkpoint-every", type=int, default=0)
    p.add_argument("--log")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="run an agent over a split and score it")
    p.add_argument("site_dir")
    p.add_argument("--dataset", required=True)
    p.add_argument("--split", default="val")
    p.add_argument("--agent", default="oracle",
                   choices=["oracle", "random", "greedy", "learned", "llm"])
    p.add_argument("--checkpoint")
    p.add_argument("--mock-dir")
    p.add_argument("--taxonomy")
    p.add_argument("--max-steps", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="start the HTTP session service")
    p.add_argument("site_dir")
    p.add_argument("--dataset", required=True)
    p.add_argument("--config")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--runs-dir")
    p.add_argument("--ui")
    p.add_argument("--token")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("gradcheck", help="finite-difference gradient check")
    p.add_argument("--dim", type=int, default=16)
    p.add_argument("--heads", type=int, default=2)
    p.add_argument("--coords", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("quality-sample", help="sample records for manual review")
    p.add_argument("--dataset", required=True)
    p.add_argument("-k", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_quality_sample)

    p = sub.add_parser("fixture-site", help="write a synthetic snapshot site")
    p.add_argument("out_dir")
    p.add_argument("--products", type=int, default=24)
    p.add_argument("--pairs", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_fixture_site)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
