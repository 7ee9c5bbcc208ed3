from .assignments import read_assignments, write_assignments
from .codec import (
    MAX_SEGMENT_ID,
    decode_segment_id,
    encode_segment_id,
    ids_to_rgb,
    read_label_map,
    rgb_to_ids,
    write_label_map,
)
from .dataset import (
    image_path,
    labelmap_path,
    load_class_table,
    load_dataset,
    sample_segments,
    save_dataset,
)
from .types import ClassEntry, ClassTable, NameAssignment, SegmentRecord, VerificationState

__all__ = [
    "MAX_SEGMENT_ID",
    "ClassEntry",
    "ClassTable",
    "NameAssignment",
    "SegmentRecord",
    "VerificationState",
    "decode_segment_id",
    "encode_segment_id",
    "ids_to_rgb",
    "image_path",
    "labelmap_path",
    "load_class_table",
    "load_dataset",
    "read_assignments",
    "read_label_map",
    "rgb_to_ids",
    "sample_segments",
    "save_dataset",
    "write_assignments",
    "write_label_map",
]
