"""24-bit segment-id codec for label-map PNGs.

A label map stores one segment id per pixel, packed little-endian into the
three channels of an RGB image: id = R + 256*G + 65536*B.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from ..errors import DataError

MAX_SEGMENT_ID = 2**24


def encode_segment_id(segment_id: int) -> tuple[int, int, int]:
    """Pack an id into (R, G, B) channel values."""
    if not 0 <= segment_id < MAX_SEGMENT_ID:
        raise DataError(f"segment id {segment_id} outside [0, 2^24)")
    return (segment_id & 0xFF, (segment_id >> 8) & 0xFF, (segment_id >> 16) & 0xFF)


def decode_segment_id(channels: tuple[int, int, int]) -> int:
    """Inverse of :func:`encode_segment_id`."""
    ch0, ch1, ch2 = (int(c) for c in channels)
    for c in (ch0, ch1, ch2):
        if not 0 <= c < 256:
            raise DataError(f"channel value {c} outside [0, 256)")
    return ch0 + 256 * ch1 + 65536 * ch2


def ids_to_rgb(ids: np.ndarray) -> np.ndarray:
    """Vectorized encode: (H, W) integer ids -> (H, W, 3) uint8."""
    ids = np.asarray(ids)
    if ids.min(initial=0) < 0 or ids.max(initial=0) >= MAX_SEGMENT_ID:
        raise DataError("label map contains ids outside [0, 2^24)")
    ids = ids.astype(np.uint32)
    rgb = np.empty(ids.shape + (3,), dtype=np.uint8)
    rgb[..., 0] = ids & 0xFF
    rgb[..., 1] = (ids >> 8) & 0xFF
    rgb[..., 2] = (ids >> 16) & 0xFF
    return rgb


def rgb_to_ids(rgb: np.ndarray) -> np.ndarray:
    """Vectorized decode: (H, W, 3) uint8 -> (H, W) uint32 ids."""
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] < 3:
        raise DataError(f"label map must be H x W x 3, got shape {rgb.shape}")
    rgb = rgb.astype(np.uint32)
    return rgb[..., 0] + 256 * rgb[..., 1] + 65536 * rgb[..., 2]


def write_label_map(ids: np.ndarray, path: str | Path) -> None:
    Image.fromarray(ids_to_rgb(ids), mode="RGB").save(path)


def read_label_map(path: str | Path) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise DataError(f"label map not found: {path}")
    with Image.open(path) as img:
        rgb = np.asarray(img.convert("RGB"))
    return rgb_to_ids(rgb)
