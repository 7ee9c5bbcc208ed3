"""Crop and overlay rendering for the review UI.

The overlay dims the crop to 40% brightness and restores the segment's
pixels to full brightness, tracing the segment's inner boundary in red.
Every altered pixel lies inside the mask, so a pixel diff against the
dimmed crop recovers exactly the mask.
"""
from __future__ import annotations

import io

import numpy as np
from PIL import Image
from scipy import ndimage

DIM_FACTOR = 0.4
CONTOUR_COLOR = (255, 64, 64)


def crop_bbox(mask: np.ndarray, margin: int = 6) -> tuple[int, int, int, int]:
    """(top, bottom, left, right) of the mask plus a clamped margin."""
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    top = max(int(rows[0]) - margin, 0)
    bottom = min(int(rows[-1]) + margin + 1, mask.shape[0])
    left = max(int(cols[0]) - margin, 0)
    right = min(int(cols[-1]) + margin + 1, mask.shape[1])
    return top, bottom, left, right


def dim_image(rgb: np.ndarray) -> np.ndarray:
    return (rgb.astype(np.float64) * DIM_FACTOR).astype(np.uint8)


def render_crop(rgb: np.ndarray, mask: np.ndarray, margin: int = 6) -> np.ndarray:
    top, bottom, left, right = crop_bbox(mask, margin)
    return rgb[top:bottom, left:right].copy()


def render_overlay(rgb: np.ndarray, mask: np.ndarray, margin: int = 6) -> np.ndarray:
    top, bottom, left, right = crop_bbox(mask, margin)
    crop = rgb[top:bottom, left:right]
    mask_crop = mask[top:bottom, left:right]
    out = dim_image(crop)
    out[mask_crop] = crop[mask_crop]
    inner_border = mask_crop & ~ndimage.binary_erosion(mask_crop)
    out[inner_border] = CONTOUR_COLOR
    return out


def to_png_bytes(rgb: np.ndarray) -> bytes:
    buf = io.BytesIO()
    Image.fromarray(rgb, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()
