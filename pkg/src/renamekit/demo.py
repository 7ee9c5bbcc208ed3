"""End-to-end pipeline on the synthetic planted-name dataset.

Runs every stage against generated artifacts: caption mining, candidate
generation through the recorded-fixture client, model training, per-segment
renaming, and evaluation under the grouped and open protocols. Everything
is a pure function of the seed, so two runs produce byte-identical
assignment files.
"""
from __future__ import annotations

import csv
import json
import logging
from pathlib import Path

import numpy as np
from PIL import Image

from . import synthetic
from .candidates import FixtureClient, build_prompt, generate_candidates, read_pools, write_pools
from .metrics.io import gt_eval_segments, load_predictions
from .metrics.report import evaluate_merged, evaluate_segments, render_table
from .mining import rank_context_names, read_corpus_dir, write_context_names
from .model.config import ModelConfig, RunConfig, TrainConfig
from .model.training import TrainingData, train
from .names.encoders import TableTextEncoder
from .names.vectors import load_word_vectors
from .relabel import build_upgraded_class_table, name_distribution, rename_dataset
from .store.assignments import write_assignments
from .store.dataset import image_path, load_dataset
from .store.types import ClassTable

log = logging.getLogger(__name__)


def load_images(root: Path, image_ids: list[str]) -> dict[str, np.ndarray]:
    images = {}
    for image_id in image_ids:
        with Image.open(image_path(root, image_id)) as img:
            rgb = np.asarray(img.convert("RGB"), dtype=np.float32) / 255.0
        images[image_id] = np.ascontiguousarray(rgb.transpose(2, 0, 1))
    return images


def _write_prediction_root(
    out: Path, val_root: Path, table: ClassTable, segments, assignments
) -> None:
    """Predictions = ground-truth masks relabeled with the chosen names."""
    chosen = {a.segment_id: a for a in assignments}
    index = json.loads((val_root / "index.json").read_text())
    pred_index = {"images": index["images"], "annotations": []}
    (out / "labelmaps").mkdir(parents=True, exist_ok=True)
    for ann in index["annotations"]:
        image_id = str(ann["image_id"])
        src = val_root / "labelmaps" / f"{image_id}.png"
        (out / "labelmaps" / f"{image_id}.png").write_bytes(src.read_bytes())
        rows = []
        for info in ann.get("segments", []):
            seg_id = int(info["id"])
            if seg_id not in chosen:
                continue
            a = chosen[seg_id]
            rows.append({"id": seg_id, "name": a.chosen, "score": a.ranked[0][1]})
        pred_index["annotations"].append({"image_id": image_id, "segments": rows})
    (out / "index.json").write_text(json.dumps(pred_index, indent=2))


def run_demo(out_dir: str | Path, seed: int = 0, steps: int = 600) -> dict:
    """Generate, mine, prompt, train, rename, evaluate. Returns a summary."""
    out = Path(out_dir)
    spec = synthetic.SyntheticSpec(seed=seed)
    meta = synthetic.generate(out, spec)
    table, train_segments = load_dataset(out / "data" / "train", "panoptic")

    # Stage 1: context mining over the caption corpora.
    corpora = read_corpus_dir(out / "captions")
    contexts = {c.class_id: rank_context_names(c, k=10) for c in corpora}
    write_context_names(list(contexts.values()), out / "context.json")

    # Stage 2: candidate generation via the recorded fixture client.
    client = FixtureClient(out / "recordings.json")
    pools = []
    for class_id in table.ids():
        prompt = build_prompt(table[class_id], contexts[class_id], use_context=True)
        pools.append(generate_candidates(prompt, client, class_id, provenance="fixture"))
    write_pools(pools, out / "pools.json", table, contexts)
    pool_map = read_pools(out / "pools.json")

    # Stage 3: train the renaming model on the train split.
    encoder = TableTextEncoder.load(out / "encoder_table.json")
    train_images = load_images(out / "data" / "train", sorted({s.image_id for s in train_segments}))
    data = TrainingData.build(table, train_segments, train_images, pool_map)
    config = RunConfig(
        model=ModelConfig(channels=spec.channels, num_classes=len(table)),
        train=TrainConfig(steps=steps, seed=seed),
    )
    config.save(out / "config.json")
    model, result = train(
        data,
        encoder,
        config,
        checkpoint_path=out / "checkpoint.pt",
        loss_curve_path=out / "loss_curve.csv",
        backbone_seed=meta["backbone_seed"],
    )

    # Stage 4: rename the validation split.
    _, val_segments = load_dataset(out / "data" / "val", "panoptic")
    val_images = load_images(out / "data" / "val", sorted({s.image_id for s in val_segments}))
    assignments, failures = rename_dataset(
        val_segments, pool_map, model, encoder, val_images, top_k=3
    )
    write_assignments(assignments, out / "assignments.jsonl")
    if failures:
        log.warning("%d segments failed to rename", len(failures))

    # Renamed-class bookkeeping: upgraded table and name distributions.
    segment_classes = {s.segment_id: s.class_id for s in val_segments}
    upgraded = build_upgraded_class_table(assignments, table, segment_classes)
    (out / "upgraded_classes.json").write_text(
        json.dumps(
            {
                "classes": upgraded.table.to_json()["classes"],
                "original_to_new": {str(k): v for k, v in upgraded.original_to_new.items()},
            },
            indent=2,
        )
    )
    with (out / "distribution.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["class_id", "name", "count"])
        for class_id in table.ids():
            if class_id not in set(segment_classes.values()):
                continue
            for name, count in name_distribution(assignments, segment_classes, class_id):
                writer.writerow([class_id, name, count])

    # Stage 5: evaluation. Predictions are the ground-truth masks under the
    # chosen names; grouped scoring collapses them back to original classes.
    pred_root = out / "predictions"
    _write_prediction_root(pred_root, out / "data" / "val", table, val_segments, assignments)
    predictions = load_predictions(pred_root)
    gt = gt_eval_segments(table, val_segments)
    name_sets = [
        {cid: table[cid].original_names for cid in table.ids()},
        {cid: pool_map[cid].candidates for cid in table.ids()},
    ]
    grouped = evaluate_merged(gt, predictions, name_sets, table, mode="standard")
    grouped.save(out / "report.grouped.json")

    provider = load_word_vectors(out / "vectors.vec")
    upgraded_gt = {
        image_id: [
            type(s)(
                segment_id=s.segment_id,
                label=chosen_name,
                mask=s.mask,
                image_id=s.image_id,
            )
            for s in segs
            for chosen_name in [
                next(a.chosen for a in assignments if a.segment_id == s.segment_id)
            ]
        ]
        for image_id, segs in gt.items()
    }
    open_report = evaluate_segments(
        upgraded_gt, predictions, mode="open", similarity=provider, with_ap=True
    )
    open_report.save(out / "report.open.json")

    summary = {
        "planted": meta["planted"],
        "segments_renamed": len(assignments),
        "failures": len(failures),
        "final_loss": result.loss_curve[-1][1] if result.loss_curve else None,
        "grouped_pq": grouped.pq,
        "open_pq": open_report.pq,
        "out": str(out),
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True))
    log.info("grouped report:\n%s", render_table(grouped))
    log.info("open report:\n%s", render_table(open_report))
    return summary
