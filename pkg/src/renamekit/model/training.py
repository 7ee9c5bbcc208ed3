"""Training loop, checkpoints, and the training-data bundle.

Only the transformer decoder and pixel decoder are optimized; the vision
backbone and the text encoder are frozen by contract and their checksums
must be unchanged by a training run.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from ..candidates import CandidatePool
from ..errors import ConfigurationError, DataError, TrainingDiverged
from ..names.encoders import TextEncoder
from ..store.types import ClassTable, SegmentRecord
from .config import ModelConfig, RunConfig, TrainConfig
from .losses import LossWeights, QueryBatch, compute_batch_loss
from .network import FrozenBackbone, RenamingModel, parameter_checksum

log = logging.getLogger(__name__)

CHECKPOINT_FORMAT_VERSION = 1


@dataclass
class TrainingData:
    images: dict[str, np.ndarray]                    # image_id -> [3, H, W] float32
    segments_by_image: dict[str, list[SegmentRecord]]
    pools: dict[int, CandidatePool]
    class_index: dict[int, int]                      # class_id -> 0..K-1

    @classmethod
    def build(
        cls,
        table: ClassTable,
        segments: list[SegmentRecord],
        images: dict[str, np.ndarray],
        pools: dict[int, CandidatePool],
    ) -> "TrainingData":
        missing = sorted({s.class_id for s in segments} - set(pools))
        if missing:
            raise DataError(f"no candidate pools for classes {missing}")
        by_image: dict[str, list[SegmentRecord]] = {}
        for seg in segments:
            if seg.image_id not in images:
                raise DataError(f"segment {seg.segment_id}: no image {seg.image_id}")
            by_image.setdefault(seg.image_id, []).append(seg)
        class_index = {cid: i for i, cid in enumerate(table.ids())}
        return cls(
            images=images,
            segments_by_image=by_image,
            pools=pools,
            class_index=class_index,
        )


def build_query_batch(
    segments: list[SegmentRecord],
    pools: dict[int, CandidatePool],
    class_index: dict[int, int],
    encoder: TextEncoder,
    rng: np.random.Generator,
    embed_fn=None,
) -> QueryBatch:
    """Queries for one image: per segment, its class pool plus one negative
    name freshly sampled from a different class."""
    embed = embed_fn or (lambda name: encoder.encode(name))
    other_classes = sorted(pools)
    rows, names, seg_ids, negflags = [], [], [], []
    gt_masks: dict[int, torch.Tensor] = {}
    gt_classes: dict[int, int] = {}
    for seg in segments:
        pool = pools[seg.class_id]
        candidates = [c for c in other_classes if c != seg.class_id]
        if not candidates:
            raise DataError("negative sampling needs at least two classes with pools")
        neg_class = int(rng.choice(candidates))
        neg_name = str(rng.choice(pools[neg_class].candidates))
        for name in pool.candidates:
            rows.append(np.asarray(embed(name), dtype=np.float32))
            names.append(name)
            seg_ids.append(seg.segment_id)
            negflags.append(False)
        rows.append(np.asarray(embed(neg_name), dtype=np.float32))
        names.append(neg_name)
        seg_ids.append(seg.segment_id)
        negflags.append(True)
        gt_masks[seg.segment_id] = torch.from_numpy(seg.mask.astype(np.float32))
        gt_classes[seg.segment_id] = class_index[seg.class_id]
    return QueryBatch(
        embeddings=torch.from_numpy(np.stack(rows)),
        names=names,
        segment_ids=seg_ids,
        is_negative=negflags,
        gt_masks=gt_masks,
        gt_classes=gt_classes,
    )


@dataclass
class TrainResult:
    loss_curve: list[tuple[int, float]] = field(default_factory=list)
    checkpoint_path: Path | None = None
    backbone_checksum_before: str = ""
    backbone_checksum_after: str = ""


def save_checkpoint(
    path: str | Path,
    model: RenamingModel,
    config: RunConfig,
    class_ids: list[int],
    backbone_seed: int | None = None,
) -> None:
    torch.save(
        {
            "format_version": CHECKPOINT_FORMAT_VERSION,
            "config": config.to_json(),
            "class_ids": class_ids,
            "backbone_seed": backbone_seed,
            "model_state": model.state_dict(),
        },
        path,
    )


def load_checkpoint(path: str | Path) -> tuple[RenamingModel, RunConfig, list[int]]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"checkpoint not found: {path}; run train first")
    payload = torch.load(path, map_location="cpu", weights_only=False)
    version = payload.get("format_version")
    if version != CHECKPOINT_FORMAT_VERSION:
        raise DataError(f"unsupported checkpoint format version: {version}")
    config = RunConfig.from_json(payload["config"])
    backbone_seed = payload.get("backbone_seed") or 0
    model = RenamingModel(
        config.model, backbone=FrozenBackbone(config.model.channels, seed=backbone_seed)
    )
    model.load_state_dict(payload["model_state"])
    model.eval()
    return model, config, [int(c) for c in payload["class_ids"]]


def write_loss_curve(curve: list[tuple[int, float]], path: str | Path) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "loss"])
        for step, loss in curve:
            writer.writerow([step, repr(loss)])


def train(
    data: TrainingData,
    encoder: TextEncoder,
    config: RunConfig,
    checkpoint_path: str | Path | None = None,
    loss_curve_path: str | Path | None = None,
    backbone_seed: int = 0,
    model: RenamingModel | None = None,
) -> tuple[RenamingModel, TrainResult]:
    """Train the decoder heads against the frozen encoders."""
    mc, tc = config.model, config.train
    if mc.num_classes != len(data.class_index):
        raise ConfigurationError(
            f"config declares {mc.num_classes} classes, dataset has {len(data.class_index)}"
        )
    torch.set_num_threads(tc.num_threads)
    torch.manual_seed(tc.seed)
    rng = np.random.default_rng(tc.seed)
    if model is None:
        model = RenamingModel(mc, backbone=FrozenBackbone(mc.channels, seed=backbone_seed))
    model.train()
    checksum_before = parameter_checksum(model.backbone)

    weights = LossWeights(bce=tc.bce_weight, dice=tc.dice_weight, cls=tc.class_weight)
    optimizer = torch.optim.AdamW(
        model.trainable_parameters(), lr=tc.lr, weight_decay=tc.weight_decay
    )
    milestones = [max(1, int(m * tc.steps)) for m in tc.lr_milestones]
    scheduler = torch.optim.lr_scheduler.MultiStepLR(
        optimizer, milestones=milestones, gamma=tc.lr_gamma
    )
    image_ids = sorted(data.segments_by_image)
    if not image_ids:
        raise DataError("training data holds no annotated images")
    warmup_steps = int(tc.warmup_fraction * tc.steps)

    result = TrainResult(backbone_checksum_before=checksum_before)
    order: list[str] = []
    for step in range(tc.steps):
        if not order:
            order = [image_ids[i] for i in rng.permutation(len(image_ids))]
        image_id = order.pop()
        segments = data.segments_by_image[image_id]
        batch = build_query_batch(
            segments, data.pools, data.class_index, encoder, rng
        )
        image = torch.from_numpy(data.images[image_id])
        p_replace = 0.0 if step < warmup_steps else tc.p_replace
        output = model(
            image, batch.embeddings, batch.bias_stack(), p_replace=p_replace, rng=rng
        )
        loss, _ = compute_batch_loss(
            output.mask_probs,
            output.class_probs,
            batch,
            mc.void_index,
            weights,
            mc.mask_threshold,
        )
        if not torch.isfinite(loss):
            if checkpoint_path is not None:
                save_checkpoint(checkpoint_path, model, config, sorted(data.class_index), backbone_seed)
            raise TrainingDiverged(f"non-finite loss at step {step}")
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()
        scheduler.step()
        result.loss_curve.append((step, float(loss.item())))
        if step % 200 == 0:
            log.info("step %d: loss %.4f", step, float(loss.item()))

    model.eval()
    result.backbone_checksum_after = parameter_checksum(model.backbone)
    if checkpoint_path is not None:
        save_checkpoint(checkpoint_path, model, config, sorted(data.class_index), backbone_seed)
        result.checkpoint_path = Path(checkpoint_path)
    if loss_curve_path is not None:
        write_loss_curve(result.loss_curve, loss_curve_path)
    return model, result
