import logging

import numpy as np
import pytest

from renamekit.store.dataset import save_dataset
from renamekit.store.types import ClassEntry, ClassTable

logging.getLogger("renamekit").setLevel(logging.ERROR)


class StubSimilarity:
    """Fixed similarity table for exact-arithmetic metric tests."""

    def __init__(self, table: dict[tuple[str, str], float]):
        self.table = table

    def similarity(self, a: str, b: str) -> float:
        if a == b:
            return 1.0
        return self.table.get((a, b), self.table.get((b, a), 0.0))


@pytest.fixture
def stub_similarity():
    return StubSimilarity


def make_class_table(spec: list[tuple[int, list[str], bool]]) -> ClassTable:
    table = ClassTable()
    for class_id, names, is_thing in spec:
        table.add(ClassEntry(class_id=class_id, original_names=names, is_thing=is_thing))
    return table


@pytest.fixture
def two_image_dataset(tmp_path):
    """Panoptic fixture: 2 images, 5 segments with known pixel geometry."""
    table = make_class_table(
        [(1, ["tree"], True), (2, ["rock", "stone"], False), (3, ["sky"], False)]
    )
    map_a = np.zeros((10, 12), dtype=np.uint32)
    map_a[0:3, 0:4] = 1     # 12 px, class 1
    map_a[5:9, 2:7] = 2     # 20 px, class 2
    map_a[0:2, 8:12] = 3    # 8 px, class 3
    map_b = np.zeros((10, 12), dtype=np.uint32)
    map_b[4:10, 0:6] = 4    # 36 px, class 1
    map_b[0:4, 6:11] = 5    # 20 px, class 3
    segments = {
        "a": [
            {"id": 1, "class_id": 1, "area": 12, "is_thing": True},
            {"id": 2, "class_id": 2, "area": 20, "is_thing": False},
            {"id": 3, "class_id": 3, "area": 8, "is_thing": False},
        ],
        "b": [
            {"id": 4, "class_id": 1, "area": 36, "is_thing": True},
            {"id": 5, "class_id": 3, "area": 20, "is_thing": False},
        ],
    }
    rng = np.random.default_rng(0)
    images = {
        name: rng.integers(30, 220, size=(10, 12, 3), dtype=np.uint8).astype(np.uint8)
        for name in ("a", "b")
    }
    root = tmp_path / "twoimg"
    save_dataset(root, table, {"a": map_a, "b": map_b}, segments, images)
    return root, table, {"a": map_a, "b": map_b}
