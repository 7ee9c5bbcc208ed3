"""Prompt-template ensembling for name embeddings.

A name is inserted into each template; every per-template embedding is
L2-normalized, the normalized vectors are averaged, and the mean is
re-normalized. Templates are summed in sorted order so the result is
exactly invariant to the order they were supplied in.
"""
from __future__ import annotations

from importlib import resources
from pathlib import Path

import numpy as np

from ..errors import DataError, EmbeddingError
from .encoders import TextEncoder

_VOWELS = "aeiou"


def fill_template(template: str, name: str) -> str:
    """Substitute {category} and {article} (and bare {}) placeholders."""
    article = "an" if name[:1].lower() in _VOWELS else "a"
    return template.replace("{article}", article).replace("{category}", name).replace("{}", name)


def load_templates(path: str | Path | None = None) -> list[str]:
    """Load prompt templates, one per line; default is the shipped 63-line set."""
    if path is None:
        text = resources.files("renamekit.resources").joinpath("vild_templates.txt").read_text()
    else:
        p = Path(path)
        if not p.exists():
            raise DataError(f"template file not found: {p}")
        text = p.read_text()
    templates = [line.strip() for line in text.splitlines() if line.strip()]
    if not templates:
        raise DataError("template file contains no templates")
    return templates


def embed_name_ensembled(
    name: str, templates: list[str], encoder: TextEncoder
) -> np.ndarray:
    """Unit-norm ensembled embedding of one name."""
    if not templates:
        raise EmbeddingError("template list must be non-empty")
    acc = np.zeros(encoder.dim, dtype=np.float64)
    for template in sorted(templates):
        v = np.asarray(encoder.encode(fill_template(template, name)), dtype=np.float64)
        norm = np.linalg.norm(v)
        if norm < 1e-12:
            raise EmbeddingError(f"encoder returned a zero vector for {name!r}")
        acc += v / norm
    mean = acc / len(templates)
    norm = np.linalg.norm(mean)
    if norm < 1e-12:
        raise EmbeddingError(f"degenerate ensemble for {name!r}: zero mean embedding")
    return mean / norm
