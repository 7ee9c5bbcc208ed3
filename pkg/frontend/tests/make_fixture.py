"""Build a scratch verification dataset for the frontend e2e test.

Usage: python3 make_fixture.py <out_dir> [n_segments]
Writes data/ (dataset root with images), pools.json, assignments.jsonl.
"""
import sys
from pathlib import Path

import numpy as np

from renamekit.candidates import CandidatePool, write_pools
from renamekit.store.assignments import write_assignments
from renamekit.store.dataset import save_dataset
from renamekit.store.types import ClassEntry, ClassTable, NameAssignment

POOLS = {
    0: ["rural field", "sports field", "crop field", "grassland", "green field"],
    1: ["city street", "side street", "main road", "alley", "avenue"],
}


def main(out_dir: str, n_segments: int = 25) -> None:
    out = Path(out_dir)
    table = ClassTable()
    table.add(ClassEntry(class_id=0, original_names=["field"], is_thing=False))
    table.add(ClassEntry(class_id=1, original_names=["street"], is_thing=True))

    rng = np.random.default_rng(0)
    label_maps, segments_by_image, images, assignments = {}, {}, {}, []
    for i in range(n_segments):
        seg_id = i + 1
        image_id = f"img{i:03d}"
        ids = np.zeros((24, 24), dtype=np.uint32)
        r0, c0 = int(rng.integers(2, 10)), int(rng.integers(2, 10))
        ids[r0:r0 + 10, c0:c0 + 10] = seg_id
        class_id = i % 2
        label_maps[image_id] = ids
        segments_by_image[image_id] = [{
            "id": seg_id, "class_id": class_id,
            "area": int((ids == seg_id).sum()), "is_thing": class_id == 1,
        }]
        rgb = rng.integers(40, 215, size=(24, 24, 3), dtype=np.uint8)
        images[image_id] = rgb.astype(np.uint8)
        pool = POOLS[class_id]
        assignments.append(NameAssignment(
            segment_id=seg_id,
            ranked=[(pool[0], 0.9), (pool[1], 0.7), (pool[2], 0.5)],
            chosen=pool[0],
        ))

    save_dataset(out / "data", table, label_maps, segments_by_image, images)
    write_pools(
        [CandidatePool(cid, names, "manual") for cid, names in POOLS.items()],
        out / "pools.json",
        table,
    )
    write_assignments(assignments, out / "assignments.jsonl")
    print(out)


if __name__ == "__main__":
    main(sys.argv[1], int(sys.argv[2]) if len(sys.argv) > 2 else 25)
