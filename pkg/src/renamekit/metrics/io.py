"""Evaluation input loading: ground truth and prediction roots.

Predictions mirror the dataset layout: index.json lists per-image segments
``{id, name, score}`` whose masks live in id-coded label maps. Semantic
predictions are plain class-id label maps with a classes.json for names.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..errors import DataError
from ..store.codec import read_label_map
from ..store.dataset import labelmap_path
from ..store.types import ClassTable, SegmentRecord
from .matching import EvalSegment


def gt_eval_segments(
    table: ClassTable, segments: list[SegmentRecord]
) -> dict[str, list[EvalSegment]]:
    """Ground-truth segments keyed by image, labeled with primary class names."""
    out: dict[str, list[EvalSegment]] = {}
    for seg in segments:
        out.setdefault(seg.image_id, []).append(
            EvalSegment(
                segment_id=seg.segment_id,
                label=table[seg.class_id].primary_name,
                mask=seg.mask,
                image_id=seg.image_id,
            )
        )
    return out


def load_predictions(root: str | Path) -> dict[str, list[EvalSegment]]:
    """Load a panoptic prediction root (name- and score-labeled segments)."""
    root = Path(root)
    index_path = root / "index.json"
    if not index_path.exists():
        raise DataError(f"prediction index not found: {index_path}")
    index = json.loads(index_path.read_text())
    out: dict[str, list[EvalSegment]] = {}
    for ann in index.get("annotations", []):
        image_id = str(ann["image_id"])
        ids = read_label_map(labelmap_path(root, image_id))
        segments = []
        for info in ann.get("segments", []):
            seg_id = int(info["id"])
            mask = ids == seg_id
            if not mask.any():
                raise DataError(f"prediction {seg_id} (image {image_id}) has no pixels")
            segments.append(
                EvalSegment(
                    segment_id=seg_id,
                    label=str(info["name"]),
                    mask=mask,
                    score=float(info["score"]) if "score" in info else None,
                    image_id=image_id,
                )
            )
        out[image_id] = segments
    return out


def load_semantic_maps(
    root: str | Path, image_ids: list[str]
) -> list[np.ndarray]:
    root = Path(root)
    return [read_label_map(labelmap_path(root, image_id)) for image_id in image_ids]
