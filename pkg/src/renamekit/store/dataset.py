"""Dataset loading and persistence.

Layout convention under a dataset root:

    classes.json            class table
    index.json              image list + per-image segment index
    labelmaps/<image>.png   id-coded label maps (see codec)
    images/<image>.png      optional RGB images (model input / review UI)

Panoptic datasets store segment ids in the label maps and enumerate the
segments in index.json. Semantic datasets store class ids in the label maps;
segments are derived as connected components per class.
"""
from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np
from PIL import Image
from scipy import ndimage

from ..errors import DataError
from .codec import read_label_map, write_label_map
from .types import ClassTable, SegmentRecord

log = logging.getLogger(__name__)


def image_path(root: str | Path, image_id: str) -> Path:
    return Path(root) / "images" / f"{image_id}.png"


def labelmap_path(root: str | Path, image_id: str) -> Path:
    return Path(root) / "labelmaps" / f"{image_id}.png"


def load_class_table(root: str | Path) -> ClassTable:
    path = Path(root) / "classes.json"
    if not path.exists():
        raise DataError(f"class table not found: {path}")
    return ClassTable.from_json(json.loads(path.read_text()))


def _load_index(root: Path) -> dict:
    path = root / "index.json"
    if not path.exists():
        raise DataError(f"annotation index not found: {path}")
    return json.loads(path.read_text())


def _panoptic_segments(root: Path, index: dict, table: ClassTable) -> list[SegmentRecord]:
    segments: list[SegmentRecord] = []
    seen_ids: set[int] = set()
    for ann in index.get("annotations", []):
        image_id = str(ann["image_id"])
        ids = read_label_map(labelmap_path(root, image_id))
        declared = {int(s["id"]): s for s in ann.get("segments", [])}
        present = set(int(v) for v in np.unique(ids)) - {0}
        dangling_pixels = present - set(declared)
        if dangling_pixels:
            raise DataError(
                f"image {image_id}: label-map ids {sorted(dangling_pixels)} missing "
                "from the annotation index"
            )
        for seg_id, info in sorted(declared.items()):
            if seg_id in seen_ids:
                raise DataError(f"duplicate segment id {seg_id}")
            seen_ids.add(seg_id)
            class_id = int(info["class_id"])
            if class_id not in table:
                raise DataError(
                    f"segment {seg_id} references unknown class {class_id}"
                )
            mask = ids == seg_id
            area = int(np.count_nonzero(mask))
            if area == 0:
                if int(info.get("area", 0)) == 0:
                    log.warning("skipping zero-area segment %d (image %s)", seg_id, image_id)
                    continue
                raise DataError(f"dangling segment id {seg_id} (image {image_id})")
            is_thing = table[class_id].is_thing
            if "is_thing" in info and bool(info["is_thing"]) != is_thing:
                raise DataError(
                    f"segment {seg_id}: is_thing contradicts class {class_id}"
                )
            segments.append(
                SegmentRecord(
                    segment_id=seg_id,
                    image_id=image_id,
                    class_id=class_id,
                    mask=mask,
                    area=area,
                    is_thing=is_thing,
                )
            )
    return segments


def _semantic_segments(root: Path, index: dict, table: ClassTable) -> list[SegmentRecord]:
    # Class-id label maps; one segment per 4-connected class region.
    segments: list[SegmentRecord] = []
    next_id = 1
    for ann in index.get("annotations", []):
        image_id = str(ann["image_id"])
        ids = read_label_map(labelmap_path(root, image_id))
        for class_id in sorted(int(v) for v in np.unique(ids)):
            if class_id == 0:
                continue
            if class_id not in table:
                raise DataError(
                    f"image {image_id}: label map uses unknown class {class_id}"
                )
            components, count = ndimage.label(ids == class_id)
            for comp in range(1, count + 1):
                mask = components == comp
                segments.append(
                    SegmentRecord(
                        segment_id=next_id,
                        image_id=image_id,
                        class_id=class_id,
                        mask=mask,
                        area=int(np.count_nonzero(mask)),
                        is_thing=table[class_id].is_thing,
                    )
                )
                next_id += 1
    return segments


def load_dataset(root: str | Path, kind: str = "panoptic") -> tuple[ClassTable, list[SegmentRecord]]:
    """Load a dataset; returns the class table and all validated segments."""
    root = Path(root)
    if kind not in ("panoptic", "semantic"):
        raise DataError(f"unknown dataset kind: {kind}")
    table = load_class_table(root)
    index = _load_index(root)
    if kind == "panoptic":
        segments = _panoptic_segments(root, index, table)
    else:
        segments = _semantic_segments(root, index, table)
    for seg in segments:
        seg.validate()
    return table, segments


def save_dataset(
    root: str | Path,
    table: ClassTable,
    label_maps: dict[str, np.ndarray],
    segments_by_image: dict[str, list[dict]] | None = None,
    images: dict[str, np.ndarray] | None = None,
) -> None:
    """Persist a panoptic dataset (or a semantic one when segments are omitted).

    ``label_maps`` maps image_id -> (H, W) id array. ``segments_by_image``
    maps image_id -> [{id, class_id, area, is_thing}] and is required for
    panoptic data. ``images`` optionally holds (H, W, 3) uint8 RGB arrays.
    """
    root = Path(root)
    (root / "labelmaps").mkdir(parents=True, exist_ok=True)
    (root / "classes.json").write_text(json.dumps(table.to_json(), indent=2))
    annotations = []
    for image_id in sorted(label_maps):
        write_label_map(label_maps[image_id], labelmap_path(root, image_id))
        ann: dict = {"image_id": image_id, "label_map": f"labelmaps/{image_id}.png"}
        if segments_by_image is not None:
            ann["segments"] = segments_by_image.get(image_id, [])
        annotations.append(ann)
    index = {
        "images": [
            {"id": image_id, "file_name": f"images/{image_id}.png"}
            for image_id in sorted(label_maps)
        ],
        "annotations": annotations,
    }
    (root / "index.json").write_text(json.dumps(index, indent=2))
    if images:
        (root / "images").mkdir(parents=True, exist_ok=True)
        for image_id, rgb in images.items():
            Image.fromarray(rgb, mode="RGB").save(image_path(root, image_id))


def sample_segments(
    segments: list[SegmentRecord], fraction: float, seed: int
) -> list[SegmentRecord]:
    """Draw a deterministic round(fraction * N) subset, preserving input order."""
    if not segments:
        raise DataError("cannot sample from an empty segment list")
    if not 0.0 < fraction <= 1.0:
        raise DataError(f"fraction must lie in (0, 1], got {fraction}")
    n = len(segments)
    k = round(fraction * n)
    if k >= n:
        return list(segments)
    rng = np.random.default_rng(seed)
    picked = sorted(rng.choice(n, size=k, replace=False).tolist())
    return [segments[i] for i in picked]
