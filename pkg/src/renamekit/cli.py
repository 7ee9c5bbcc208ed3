"""Command-line pipeline driver.

Commands: mine-context, gen-candidates, train, rename, evaluate,
serve-verify, export, demo-synthetic. Exit codes: 0 success,
2 configuration error, 3 data error, 4 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import ConfigurationError, DataError, RenamekitError

log = logging.getLogger("renamekit")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_RUNTIME = 4


def _cmd_mine_context(args) -> int:
    from .mining import rank_context_names, read_corpus_dir, write_context_names

    corpora = read_corpus_dir(args.captions)
    items = [
        rank_context_names(c, k=args.k, include_adjectives=args.adjectives)
        for c in corpora
    ]
    write_context_names(items, args.out)
    log.info("mined context names for %d classes -> %s", len(items), args.out)
    return EXIT_OK


def _cmd_gen_candidates(args) -> int:
    from .candidates import (
        FixtureClient,
        LiveClient,
        build_prompt,
        generate_candidates,
        write_pools,
    )
    from .mining import read_context_names
    from .store.dataset import load_class_table

    if args.llm == "fixture":
        if not args.recordings:
            raise ConfigurationError("--llm fixture requires --recordings")
        client = FixtureClient(args.recordings)
        provenance = "fixture"
    else:
        client = LiveClient()
        provenance = "llm"
    table = load_class_table(args.dataset)
    contexts = read_context_names(args.names)
    pools = []
    for class_id in table.ids():
        context = contexts.get(class_id)
        prompt = build_prompt(table[class_id], context, use_context=context is not None)
        pools.append(generate_candidates(prompt, client, class_id, provenance=provenance))
    write_pools(pools, args.out, table, contexts)
    log.info("generated candidate pools for %d classes -> %s", len(pools), args.out)
    return EXIT_OK


def _cmd_train(args) -> int:
    from .candidates import read_pools
    from .demo import load_images
    from .model.config import ModelConfig, RunConfig, TrainConfig
    from .model.training import TrainingData, train
    from .names.encoders import TableTextEncoder
    from .store.dataset import load_dataset

    table, segments = load_dataset(args.dataset, args.kind)
    pools = read_pools(args.names)
    encoder = TableTextEncoder.load(args.encoder_table)
    images = load_images(Path(args.dataset), sorted({s.image_id for s in segments}))
    data = TrainingData.build(table, segments, images, pools)
    if args.config:
        config = RunConfig.load(args.config)
    else:
        config = RunConfig(
            model=ModelConfig(channels=encoder.dim, num_classes=len(table)),
            train=TrainConfig(),
        )
    if args.steps is not None:
        config.train.steps = args.steps
    if args.seed is not None:
        config.train.seed = args.seed
    loss_curve = args.loss_curve or str(Path(args.checkpoint).with_suffix(".loss.csv"))
    _, result = train(
        data,
        encoder,
        config,
        checkpoint_path=args.checkpoint,
        loss_curve_path=loss_curve,
        backbone_seed=args.backbone_seed,
    )
    log.info(
        "trained %d steps; final loss %.4f; checkpoint %s",
        config.train.steps,
        result.loss_curve[-1][1],
        args.checkpoint,
    )
    return EXIT_OK


def _cmd_rename(args) -> int:
    from .candidates import read_pools
    from .demo import load_images
    from .model.training import load_checkpoint
    from .names.encoders import TableTextEncoder
    from .relabel import rename_dataset
    from .store.assignments import write_assignments
    from .store.dataset import load_dataset

    if not Path(args.checkpoint).exists():
        raise DataError(f"checkpoint not found: {args.checkpoint}; run train first")
    model, _, _ = load_checkpoint(args.checkpoint)
    table, segments = load_dataset(args.dataset, args.kind)
    pools = read_pools(args.names)
    encoder = TableTextEncoder.load(args.encoder_table)
    images = load_images(Path(args.dataset), sorted({s.image_id for s in segments}))
    assignments, failures = rename_dataset(
        segments, pools, model, encoder, images, top_k=args.top_k
    )
    write_assignments(assignments, args.out)
    log.info(
        "renamed %d segments (%d failures) -> %s", len(assignments), len(failures), args.out
    )
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    from .candidates import read_pools
    from .metrics.io import gt_eval_segments, load_predictions, load_semantic_maps
    from .metrics.report import evaluate_merged, evaluate_segments, evaluate_semantic, render_table
    from .names.vectors import load_word_vectors
    from .store.dataset import load_dataset

    similarity = None
    if args.metric == "open":
        if not args.similarity:
            raise ConfigurationError("--metric open requires --similarity <vectors>")
        similarity = load_word_vectors(args.similarity)

    table, segments = load_dataset(args.dataset, args.kind)
    if args.kind == "semantic":
        image_ids = sorted({s.image_id for s in segments})
        gt_maps = load_semantic_maps(args.dataset, image_ids)
        pred_maps = load_semantic_maps(args.pred, image_ids)
        labels = [""] + [
            table[cid].primary_name if cid in table else str(cid)
            for cid in range(1, max(table.ids()) + 1)
        ]
        report = evaluate_semantic(
            gt_maps, pred_maps, mode=args.metric, similarity=similarity, labels=labels
        )
    else:
        gt = gt_eval_segments(table, segments)
        predictions = load_predictions(args.pred)
        if args.protocol == "grouped":
            name_sets = [{cid: table[cid].original_names for cid in table.ids()}]
            if args.names:
                pools = read_pools(args.names)
                name_sets.append({cid: pools[cid].candidates for cid in pools})
            report = evaluate_merged(
                gt, predictions, name_sets, table, mode=args.metric, similarity=similarity
            )
        else:
            protocol = "plain" if args.protocol == "plain" else "merged_names"
            thing_labels = {
                table[cid].primary_name for cid in table.ids() if table[cid].is_thing
            }
            report = evaluate_segments(
                gt,
                predictions,
                mode=args.metric,
                similarity=similarity,
                protocol=protocol,
                thing_labels=thing_labels,
            )
    report.save(args.out)
    print(render_table(report))
    log.info("report -> %s", args.out)
    return EXIT_OK


def _build_store(args):
    from .candidates import read_pools
    from .service.store import VerificationStore
    from .store.assignments import read_assignments
    from .store.dataset import load_dataset

    table, segments = load_dataset(args.dataset, args.kind)
    assignments = read_assignments(args.assignments)
    pools = read_pools(args.names)
    return VerificationStore(table, segments, assignments, pools, args.log)


def _cmd_serve_verify(args) -> int:
    import uvicorn

    from .service.app import create_app

    store = _build_store(args)
    app = create_app(
        store,
        images_root=Path(args.dataset) / "images",
        export_path=args.export_to,
    )
    log.info("serving verification on port %d", args.port)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def _cmd_export(args) -> int:
    store = _build_store(args)
    stats = store.export(args.out)
    print(json.dumps(stats, indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_demo_synthetic(args) -> int:
    from .demo import run_demo

    summary = run_demo(args.out, seed=args.seed, steps=args.steps)
    print(json.dumps(summary, indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="renamekit", description="Benchmark renaming pipeline"
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine-context", help="rank caption nouns per class")
    p.add_argument("--captions", required=True, help="directory of <class_id>.txt files")
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--adjectives", action="store_true", help="pass adjectives through")
    p.set_defaults(fn=_cmd_mine_context)

    p = sub.add_parser("gen-candidates", help="generate candidate names per class")
    p.add_argument("--dataset", required=True)
    p.add_argument("--names", required=True, help="context names document")
    p.add_argument("--llm", choices=("fixture", "live"), default="fixture")
    p.add_argument("--recordings", help="recorded responses for --llm fixture")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_gen_candidates)

    p = sub.add_parser("train", help="train the renaming model")
    p.add_argument("--dataset", required=True)
    p.add_argument("--kind", choices=("panoptic", "semantic"), default="panoptic")
    p.add_argument("--names", required=True, help="candidate pools document")
    p.add_argument("--encoder-table", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--config")
    p.add_argument("--steps", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--backbone-seed", type=int, default=0)
    p.add_argument("--loss-curve")
    p.set_defaults(fn=_cmd_train)

    p = sub.add_parser("rename", help="assign best candidate names to segments")
    p.add_argument("--dataset", required=True)
    p.add_argument("--kind", choices=("panoptic", "semantic"), default="panoptic")
    p.add_argument("--names", required=True)
    p.add_argument("--encoder-table", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--top-k", type=int, default=3)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_rename)

    p = sub.add_parser("evaluate", help="score predictions against a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--kind", choices=("panoptic", "semantic"), default="panoptic")
    p.add_argument("--pred", required=True, help="prediction root")
    p.add_argument("--metric", choices=("standard", "open"), default="standard")
    p.add_argument("--protocol", choices=("plain", "merged", "grouped"), default="plain")
    p.add_argument("--similarity", help="word-vector file for --metric open")
    p.add_argument("--names", help="candidate pools for the grouped protocol")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_evaluate)

    p = sub.add_parser("serve-verify", help="serve the verification API")
    p.add_argument("--dataset", required=True)
    p.add_argument("--kind", choices=("panoptic", "semantic"), default="panoptic")
    p.add_argument("--assignments", required=True)
    p.add_argument("--names", required=True)
    p.add_argument("--log", required=True, help="append-only decision event log")
    p.add_argument("--export-to", default="verified.jsonl")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(fn=_cmd_serve_verify)

    p = sub.add_parser("export", help="export verified assignments")
    p.add_argument("--dataset", required=True)
    p.add_argument("--kind", choices=("panoptic", "semantic"), default="panoptic")
    p.add_argument("--assignments", required=True)
    p.add_argument("--names", required=True)
    p.add_argument("--log", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_export)

    p = sub.add_parser("demo-synthetic", help="full pipeline on synthetic data")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--steps", type=int, default=600)
    p.set_defaults(fn=_cmd_demo_synthetic)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, matching our configuration code.
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.fn(args)
    except ConfigurationError as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except DataError as exc:
        log.error("data error: %s", exc)
        return EXIT_DATA
    except RenamekitError as exc:
        log.error("runtime failure: %s", exc)
        return EXIT_RUNTIME
    except KeyboardInterrupt:
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
