"""Apply a trained model to pick the best candidate name per segment.

One forward pass per segment scores every candidate of its class: the
query's predicted mask is thresholded and its IoU with the ground-truth
mask becomes the candidate's score. Candidates are ranked by score and the
top one becomes the segment's new name; the top-k ranking is kept for the
human verification stage.
"""
from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import torch

from .candidates import CandidatePool
from .errors import DataError
from .model.losses import threshold_iou
from .model.network import RenamingModel
from .names.encoders import TextEncoder
from .store.types import ClassEntry, ClassTable, NameAssignment, SegmentRecord

log = logging.getLogger(__name__)


def _forward_scores(
    model: RenamingModel,
    image: np.ndarray,
    mask: np.ndarray,
    names: list[str],
    encoder: TextEncoder,
) -> tuple[list[float], torch.Tensor]:
    embeddings = torch.from_numpy(
        np.stack([np.asarray(encoder.encode(n), dtype=np.float32) for n in names])
    )
    gt = torch.from_numpy(mask.astype(bool))
    biases = gt.unsqueeze(0).expand(len(names), -1, -1)
    with torch.no_grad():
        output = model(torch.from_numpy(image), embeddings, biases)
        gt_float = gt.to(torch.float32)
        scores = [
            threshold_iou(output.mask_probs[i], gt_float, model.config.mask_threshold)
            for i in range(len(names))
        ]
    return scores, output.class_probs


def rank_candidates(
    segment: SegmentRecord,
    pool: CandidatePool,
    model: RenamingModel,
    encoder: TextEncoder,
    image: np.ndarray,
) -> list[tuple[str, float]]:
    """Candidates of the segment's class ordered by predicted-mask IoU.

    Ties keep pool order, so the ranking is a stable reordering of the pool.
    """
    if not pool.candidates:
        raise DataError(f"empty candidate pool for class {pool.class_id}")
    scores, _ = _forward_scores(model, image, segment.mask, pool.candidates, encoder)
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    return [(pool.candidates[i], float(scores[i])) for i in order]


def suggest_cross_class(
    segment: SegmentRecord,
    pools: dict[int, CandidatePool],
    model: RenamingModel,
    encoder: TextEncoder,
    image: np.ndarray,
    class_ids: list[int],
    top_classes: int = 3,
) -> list[tuple[int, str, float]]:
    """Rank candidates from the model's top-scoring classes, not just the
    annotated one; surfaces likely annotation errors. Off the default path."""
    own_pool = pools[segment.class_id]
    scores, class_probs = _forward_scores(
        model, image, segment.mask, own_pool.candidates, encoder
    )
    best_query = int(np.argmax(scores))
    probs = class_probs[best_query, : len(class_ids)].numpy()
    ranked_classes = [class_ids[i] for i in np.argsort(-probs)[:top_classes]]
    out: list[tuple[int, str, float]] = []
    for class_id in ranked_classes:
        if class_id not in pools:
            continue
        for name, score in rank_candidates(
            segment, pools[class_id], model, encoder, image
        ):
            out.append((class_id, name, score))
    out.sort(key=lambda row: -row[2])
    return out


def rename_dataset(
    segments: list[SegmentRecord],
    pools: dict[int, CandidatePool],
    model: RenamingModel,
    encoder: TextEncoder,
    images: dict[str, np.ndarray],
    top_k: int = 3,
) -> tuple[list[NameAssignment], list[tuple[int, str]]]:
    """Assign every segment its best-ranked candidate name.

    Per-segment failures are recorded and the run continues; the second
    return value lists (segment_id, reason) for every skipped segment.
    """
    missing = sorted({s.class_id for s in segments} - set(pools))
    if missing:
        raise DataError(f"no candidate pools for classes {missing}")
    assignments: list[NameAssignment] = []
    failures: list[tuple[int, str]] = []
    for segment in segments:
        try:
            image = images[segment.image_id]
        except KeyError:
            failures.append((segment.segment_id, f"missing image {segment.image_id}"))
            continue
        try:
            ranked = rank_candidates(segment, pools[segment.class_id], model, encoder, image)
        except (DataError, RuntimeError) as exc:
            log.warning("segment %d failed: %s", segment.segment_id, exc)
            failures.append((segment.segment_id, str(exc)))
            continue
        assignments.append(
            NameAssignment(
                segment_id=segment.segment_id,
                ranked=ranked[: max(top_k, 1)],
                chosen=ranked[0][0],
            )
        )
    return assignments, failures


def name_distribution(
    assignments: list[NameAssignment],
    segment_classes: dict[int, int],
    class_id: int,
) -> list[tuple[str, int]]:
    """Chosen-name counts within one original class, most frequent first."""
    if class_id not in set(segment_classes.values()):
        raise DataError(f"no segments for class {class_id}")
    counts = Counter(
        a.chosen
        for a in assignments
        if segment_classes.get(a.segment_id) == class_id
    )
    return sorted(counts.items(), key=lambda item: (-item[1], item[0]))


@dataclass
class UpgradedClassTable:
    """Class table over the unique assigned names, plus the grouping maps."""

    table: ClassTable
    name_to_class: dict[str, int] = field(default_factory=dict)
    original_to_new: dict[int, list[int]] = field(default_factory=dict)


def build_upgraded_class_table(
    assignments: list[NameAssignment],
    original_table: ClassTable,
    segment_classes: dict[int, int],
) -> UpgradedClassTable:
    """One class per unique chosen name; deterministic and order-independent.

    New class ids follow sorted name order. A name chosen under several
    original classes becomes a single class, with every originating class
    recorded in the grouping map.
    """
    sources: dict[str, set[int]] = {}
    for a in assignments:
        if a.segment_id not in segment_classes:
            raise DataError(f"assignment {a.segment_id} has no known source class")
        sources.setdefault(a.chosen, set()).add(segment_classes[a.segment_id])
    table = ClassTable()
    name_to_class: dict[str, int] = {}
    original_to_new: dict[int, set[int]] = {}
    for new_id, name in enumerate(sorted(sources)):
        original_ids = sorted(sources[name])
        is_thing = any(original_table[cid].is_thing for cid in original_ids)
        flags = {original_table[cid].is_thing for cid in original_ids}
        if len(flags) > 1:
            log.warning("name %r mixes thing and stuff source classes", name)
        table.add(ClassEntry(class_id=new_id, original_names=[name], is_thing=is_thing))
        name_to_class[name] = new_id
        for cid in original_ids:
            original_to_new.setdefault(cid, set()).add(new_id)
    return UpgradedClassTable(
        table=table,
        name_to_class=name_to_class,
        original_to_new={cid: sorted(ids) for cid, ids in sorted(original_to_new.items())},
    )
