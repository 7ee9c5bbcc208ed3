"""Word-vector loading and pairwise name similarity.

The similarity function backs the soft ("open") metric variants: a phrase
maps to the mean of its in-vocabulary word vectors, and similarity is the
cosine clamped to [0, 1]. Identical strings always score 1; non-identical
phrases with no known words score 0.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Protocol

import numpy as np

from ..errors import DataError

log = logging.getLogger(__name__)

OOV_POLICIES = ("drop", "error")


class SimilarityFn(Protocol):
    def similarity(self, a: str, b: str) -> float: ...


class IndicatorSimilarity:
    """S(a, b) = 1 if a == b else 0; the standard-metric similarity."""

    def similarity(self, a: str, b: str) -> float:
        return 1.0 if a == b else 0.0


class SimilarityProvider:
    """Cosine similarity over a word-vector vocabulary, clamped to [0, 1]."""

    def __init__(self, vocabulary: dict[str, np.ndarray], oov_policy: str = "drop"):
        if oov_policy not in OOV_POLICIES:
            raise DataError(f"unknown oov policy: {oov_policy}")
        dims = {v.shape[-1] for v in vocabulary.values()}
        if len(dims) > 1:
            raise DataError(f"inconsistent vector dimensions: {sorted(dims)}")
        self.vocabulary = {w: np.asarray(v, dtype=np.float64) for w, v in vocabulary.items()}
        self.dim = dims.pop() if dims else 0
        self.oov_policy = oov_policy
        self._cache: dict[tuple[str, str], float] = {}

    def phrase_vector(self, phrase: str) -> np.ndarray | None:
        """Mean vector of the phrase's known words; None if fully unknown."""
        words = phrase.lower().split()
        vecs = []
        for w in words:
            if w in self.vocabulary:
                vecs.append(self.vocabulary[w])
            elif self.oov_policy == "error":
                raise DataError(f"word not in vocabulary: {w!r}")
        if not vecs:
            return None
        return np.mean(vecs, axis=0)

    def similarity(self, a: str, b: str) -> float:
        if a == b:
            return 1.0
        key = (a, b) if a <= b else (b, a)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        va, vb = self.phrase_vector(key[0]), self.phrase_vector(key[1])
        if va is None or vb is None:
            log.warning("similarity(%r, %r): no known words on one side, scoring 0", a, b)
            value = 0.0
        else:
            na, nb = np.linalg.norm(va), np.linalg.norm(vb)
            if na < 1e-12 or nb < 1e-12:
                value = 0.0
            else:
                value = float(np.dot(va, vb) / (na * nb))
                value = min(1.0, max(0.0, value))
        self._cache[key] = value
        return value


def load_word_vectors(path: str | Path, oov_policy: str = "drop") -> SimilarityProvider:
    """Parse a textual vector file: header "count dim", then "word v1 .. vd"."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"word-vector file not found: {path}")
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise DataError(f"{path}:1: header must be 'count dim'")
        try:
            count, dim = int(header[0]), int(header[1])
        except ValueError as exc:
            raise DataError(f"{path}:1: header must be two integers") from exc
        vocabulary: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(fh, start=2):
            parts = line.rstrip("\n").split(" ")
            if len(parts) != dim + 1:
                raise DataError(
                    f"{path}:{lineno}: expected word + {dim} values, got {len(parts)} fields"
                )
            word = parts[0]
            try:
                vec = np.array([float(x) for x in parts[1:]], dtype=np.float64)
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: non-numeric vector value") from exc
            vocabulary[word] = vec
    if len(vocabulary) != count:
        raise DataError(
            f"{path}: header declares {count} rows but file holds {len(vocabulary)}"
        )
    return SimilarityProvider(vocabulary, oov_policy=oov_policy)


def save_word_vectors(vocabulary: dict[str, np.ndarray], path: str | Path) -> None:
    words = sorted(vocabulary)
    dim = len(next(iter(vocabulary.values()))) if vocabulary else 0
    lines = [f"{len(words)} {dim}"]
    for w in words:
        values = " ".join(repr(float(x)) for x in vocabulary[w])
        lines.append(f"{w} {values}")
    Path(path).write_text("\n".join(lines) + "\n")
