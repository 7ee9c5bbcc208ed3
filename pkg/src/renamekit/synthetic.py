"""Synthetic planted-name dataset.

Images contain non-overlapping colored shapes, one color per class. For
each class, one "planted" candidate name is embedded exactly at the class's
visual prototype (the frozen backbone's mean response to that color), while
the remaining candidates are embedded orthogonally to every prototype. A
model that truly ranks names by mask agreement must therefore recover the
planted name for nearly all segments, which is what the mechanism tests
check. The generator also writes the caption corpora, prompt recordings,
embedding table, and word vectors that let the full pipeline run offline
end to end.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .candidates import CandidatePool, build_prompt, record_response, write_recordings
from .mining import CaptionCorpus, rank_context_names
from .model.network import FrozenBackbone
from .names.vectors import save_word_vectors
from .store.dataset import save_dataset
from .store.types import ClassEntry, ClassTable

# Colors sit at signed corners of the centered RGB cube so that no two
# class prototypes are strongly correlated under the frozen backbone.
_THEMES = [
    # color word, rgb, shape noun, caption nouns (most to least frequent)
    ("scarlet", (0.88, 0.08, 0.12), "patch",
     ["patch", "wall", "brick", "fabric", "paint", "banner", "curtain", "rose", "carpet", "flag"]),
    ("emerald", (0.10, 0.82, 0.15), "meadow",
     ["meadow", "grass", "leaf", "hedge", "moss", "fern", "lawn", "vine", "shrub", "jade"]),
    ("cobalt", (0.10, 0.18, 0.90), "lagoon",
     ["lagoon", "water", "pool", "tile", "wave", "glass", "lake", "denim", "ink", "sapphire"]),
    ("ivory", (0.92, 0.90, 0.86), "dune",
     ["dune", "sand", "chalk", "straw", "wheat", "lamp", "resin", "pearl", "bone", "shell"]),
    ("onyx", (0.06, 0.06, 0.08), "boulder",
     ["boulder", "rock", "coal", "slate", "iron", "tar", "shadow", "cave", "ash", "soot"]),
]

_DECOY_NAMES = [
    "paper lantern", "harbor buoy", "copper kettle", "wicker basket",
    "market stall", "garden trellis", "canvas awning", "stone archway",
    "iron railing", "timber fence", "glass jar", "clay pot",
    "rope ladder", "tin roof", "brick chimney", "wooden crate",
    "steel drum", "velvet cushion", "linen sheet", "marble slab",
]


@dataclass
class SyntheticSpec:
    num_classes: int = 5
    image_size: int = 48
    train_images: int = 40
    val_images: int = 16
    channels: int = 32
    seed: int = 0
    min_segments: int = 2
    max_segments: int = 3
    captions_per_noun_base: int = 12  # frequency of a class's top caption noun

    def __post_init__(self):
        if not 2 <= self.num_classes <= len(_THEMES):
            raise ValueError(f"num_classes must lie in [2, {len(_THEMES)}]")


def planted_name(class_id: int) -> str:
    color, _, shape, _ = _THEMES[class_id]
    return f"{color} {shape}"


def _hash_vector(word: str, dim: int, seed: int) -> np.ndarray:
    digest = hashlib.sha256(f"{seed}\x00{word}".encode("utf-8")).digest()
    rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
    v = rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def _render_images(spec: SyntheticSpec, rng: np.random.Generator, count: int, start_id: int):
    """Returns (images, label_maps, segments_by_image, next_segment_id).

    Each image holds a few non-overlapping class-colored rectangles and
    ellipses over a noisy gray background.
    """
    size = spec.image_size
    images: dict[str, np.ndarray] = {}
    label_maps: dict[str, np.ndarray] = {}
    segments: dict[str, list[dict]] = {}
    seg_id = start_id
    for i in range(count):
        image_id = f"img{start_id:05d}_{i:03d}"
        rgb = rng.normal(0.45, 0.02, size=(size, size, 3))
        ids = np.zeros((size, size), dtype=np.uint32)
        n_seg = int(rng.integers(spec.min_segments, spec.max_segments + 1))
        classes = rng.permutation(spec.num_classes)[:n_seg]
        placed: list[dict] = []
        for class_id in classes:
            for _ in range(30):  # placement attempts
                h = int(rng.integers(9, 17))
                w = int(rng.integers(9, 17))
                top = int(rng.integers(0, size - h))
                left = int(rng.integers(0, size - w))
                yy, xx = np.mgrid[0:size, 0:size]
                if rng.random() < 0.5:
                    mask = (
                        (yy >= top) & (yy < top + h) & (xx >= left) & (xx < left + w)
                    )
                else:
                    cy, cx = top + h / 2, left + w / 2
                    mask = ((yy - cy) / (h / 2)) ** 2 + ((xx - cx) / (w / 2)) ** 2 <= 1.0
                if not mask.any() or (ids[mask] != 0).any():
                    continue
                color = np.array(_THEMES[int(class_id)][1])
                rgb[mask] = color + rng.normal(0.0, 0.02, size=(int(mask.sum()), 3))
                ids[mask] = seg_id
                placed.append(
                    {
                        "id": int(seg_id),
                        "class_id": int(class_id),
                        "area": int(mask.sum()),
                        "is_thing": bool(int(class_id) % 2 == 0),
                    }
                )
                seg_id += 1
                break
        images[image_id] = (np.clip(rgb, 0.0, 1.0) * 255).astype(np.uint8)
        label_maps[image_id] = ids
        segments[image_id] = placed
    return images, label_maps, segments, seg_id


def _class_table(spec: SyntheticSpec) -> ClassTable:
    table = ClassTable()
    for class_id in range(spec.num_classes):
        color = _THEMES[class_id][0]
        table.add(
            ClassEntry(
                class_id=class_id,
                original_names=[color],
                is_thing=class_id % 2 == 0,
            )
        )
    return table


def _visual_prototypes(spec: SyntheticSpec, backbone: FrozenBackbone) -> np.ndarray:
    """Mean backbone response to each class color over a flat probe patch."""
    protos = []
    for class_id in range(spec.num_classes):
        color = np.array(_THEMES[class_id][1], dtype=np.float32)
        probe = np.tile(color[:, None, None], (1, 16, 16))
        with torch.no_grad():
            feats = backbone(torch.from_numpy(probe)).numpy()
        mean = feats[:, 4:12, 4:12].mean(axis=(1, 2))
        protos.append(mean / np.linalg.norm(mean))
    return np.stack(protos)


def _orthogonal_decoys(
    prototypes: np.ndarray, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Unit vectors orthogonal to every prototype and to each other."""
    dim = prototypes.shape[1]
    basis = [p / np.linalg.norm(p) for p in prototypes]
    decoys = []
    while len(decoys) < count:
        v = rng.standard_normal(dim)
        for b in basis:
            v -= np.dot(v, b) * b
        norm = np.linalg.norm(v)
        if norm < 1e-6:
            continue
        v /= norm
        basis.append(v)
        decoys.append(v)
    return np.stack(decoys)


def _decoy_embedding(orthogonal: np.ndarray, prototype: np.ndarray, tilt: float = 0.3) -> np.ndarray:
    """Decoy for one class: orthogonal direction tilted away from the class
    prototype, so a decoy's initial mask response inside its own class's
    segments is suppressed rather than a coin flip."""
    u = prototype / np.linalg.norm(prototype)
    v = orthogonal - tilt * u
    return v / np.linalg.norm(v)


def _captions(spec: SyntheticSpec, class_id: int) -> list[str]:
    """Engineered corpus: noun frequencies strictly decrease down the list."""
    nouns = _THEMES[class_id][3]
    captions = []
    for rank, noun in enumerate(nouns):
        for _ in range(spec.captions_per_noun_base - rank):
            captions.append(f"the {noun}")
    return captions


def generate(out_root: str | Path, spec: SyntheticSpec) -> dict:
    """Write the full offline bundle; returns the meta document."""
    out = Path(out_root)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(spec.seed)
    table = _class_table(spec)

    train_imgs, train_maps, train_segs, next_id = _render_images(spec, rng, spec.train_images, 1)
    val_imgs, val_maps, val_segs, _ = _render_images(spec, rng, spec.val_images, next_id)
    save_dataset(out / "data" / "train", table, train_maps, train_segs, train_imgs)
    save_dataset(out / "data" / "val", table, val_maps, val_segs, val_imgs)

    # Caption corpora -> context names -> prompt recordings. The recorded
    # responses list each class's candidate pool, so the generation stage
    # replays deterministically.
    captions_dir = out / "captions"
    captions_dir.mkdir(exist_ok=True)
    pools: dict[int, CandidatePool] = {}
    recordings: list[dict] = []
    decoys_per_class = 4
    for class_id in range(spec.num_classes):
        captions = _captions(spec, class_id)
        (captions_dir / f"{class_id}.txt").write_text("\n".join(captions) + "\n")
        context = rank_context_names(CaptionCorpus(class_id, captions), k=10)
        decoys = _DECOY_NAMES[
            class_id * decoys_per_class : (class_id + 1) * decoys_per_class
        ]
        candidates = [planted_name(class_id), *decoys]
        pools[class_id] = CandidatePool(class_id, candidates, provenance="fixture")
        prompt = build_prompt(table[class_id], context, use_context=True)
        record_response(recordings, prompt, ", ".join(candidates))
    write_recordings(recordings, out / "recordings.json")

    # Embedding geometry: planted names at the visual prototypes, decoys in
    # the orthogonal complement.
    backbone_seed = spec.seed + 1
    backbone = FrozenBackbone(spec.channels, seed=backbone_seed)
    prototypes = _visual_prototypes(spec, backbone)
    decoy_vectors = _orthogonal_decoys(
        prototypes, spec.num_classes * decoys_per_class, rng
    )
    embedding_table: dict[str, list[float]] = {}
    decoy_cursor = 0
    for class_id in range(spec.num_classes):
        embedding_table[planted_name(class_id)] = prototypes[class_id].tolist()
        for name in pools[class_id].candidates[1:]:
            embedding_table[name] = _decoy_embedding(
                decoy_vectors[decoy_cursor], prototypes[class_id]
            ).tolist()
            decoy_cursor += 1
    (out / "encoder_table.json").write_text(json.dumps(embedding_table))

    # Word vectors for the similarity-weighted metrics.
    words = set()
    for pool in pools.values():
        for name in pool.candidates:
            words.update(name.split())
    for class_id in range(spec.num_classes):
        words.update(table[class_id].original_names)
    save_word_vectors(
        {w: _hash_vector(w, 16, spec.seed) for w in sorted(words)},
        out / "vectors.vec",
    )

    meta = {
        "spec": {
            "num_classes": spec.num_classes,
            "image_size": spec.image_size,
            "train_images": spec.train_images,
            "val_images": spec.val_images,
            "channels": spec.channels,
            "seed": spec.seed,
        },
        "backbone_seed": backbone_seed,
        "planted": {str(cid): planted_name(cid) for cid in range(spec.num_classes)},
    }
    (out / "meta.json").write_text(json.dumps(meta, indent=2))
    return meta
