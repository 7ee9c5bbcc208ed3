"""Text encoders.

Encoders are frozen by contract: nothing in the toolkit ever updates them.
Two implementations ship here: a seeded hash encoder (arbitrary but
deterministic geometry) and a table encoder whose vectors are constructed
per scenario, e.g. planted next to visual prototypes in the synthetic
dataset. A thin adapter slot accepts a real vision-language text tower.
"""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Callable, Protocol

import numpy as np

from ..errors import DataError, EmbeddingError


class TextEncoder(Protocol):
    dim: int

    def encode(self, text: str) -> np.ndarray: ...


class HashTextEncoder:
    """Deterministic pseudo-random unit vector per text."""

    def __init__(self, dim: int = 32, seed: int = 0):
        self.dim = dim
        self.seed = seed

    def encode(self, text: str) -> np.ndarray:
        digest = hashlib.sha256(f"{self.seed}\x00{text}".encode("utf-8")).digest()
        rng = np.random.default_rng(int.from_bytes(digest[:8], "little"))
        v = rng.standard_normal(self.dim)
        return v / np.linalg.norm(v)


class TableTextEncoder:
    """Exact lookup table with an optional fallback encoder for misses."""

    def __init__(self, table: dict[str, np.ndarray], fallback: TextEncoder | None = None):
        if not table:
            raise EmbeddingError("empty embedding table")
        dims = {v.shape[-1] for v in table.values()}
        if len(dims) != 1:
            raise EmbeddingError(f"inconsistent table dimensions: {sorted(dims)}")
        self.dim = dims.pop()
        self.table = {k: np.asarray(v, dtype=np.float64) for k, v in table.items()}
        self.fallback = fallback

    def encode(self, text: str) -> np.ndarray:
        if text in self.table:
            return self.table[text].copy()
        if self.fallback is not None:
            return self.fallback.encode(text)
        raise EmbeddingError(f"no embedding for text: {text!r}")

    def checksum(self) -> str:
        h = hashlib.sha256()
        for key in sorted(self.table):
            h.update(key.encode("utf-8"))
            h.update(np.ascontiguousarray(self.table[key]).tobytes())
        return h.hexdigest()

    def save(self, path: str | Path) -> None:
        doc = {k: self.table[k].tolist() for k in sorted(self.table)}
        Path(path).write_text(json.dumps(doc))

    @classmethod
    def load(cls, path: str | Path, fallback: TextEncoder | None = None) -> "TableTextEncoder":
        path = Path(path)
        if not path.exists():
            raise DataError(f"embedding table not found: {path}")
        doc = json.loads(path.read_text())
        return cls({k: np.asarray(v, dtype=np.float64) for k, v in doc.items()}, fallback)


class ExternalTextEncoder:
    """Adapter for a real text tower: wraps any text -> vector callable."""

    def __init__(self, fn: Callable[[str], np.ndarray], dim: int):
        self._fn = fn
        self.dim = dim

    def encode(self, text: str) -> np.ndarray:
        v = np.asarray(self._fn(text), dtype=np.float64)
        if v.shape != (self.dim,):
            raise EmbeddingError(f"external encoder returned shape {v.shape}, expected ({self.dim},)")
        return v
