"""Deterministic text embedder used for dataset-distance computations.

Feature-hashed bag of word 1- and 2-grams, 256 dimensions by default,
L2-normalized. Bucket index and sign come from a stable hash, so equal texts
map to equal vectors on every platform and run. Externally computed vectors
can be used instead wherever an embedded dataset is accepted.
"""

from __future__ import annotations

import re

import numpy as np

from ..types import stable_hash

DEFAULT_DIM = 256

_WORD = re.compile(r"[a-z0-9]+")


def _ngrams(text: str) -> list[str]:
    words = _WORD.findall(text.lower())
    return words + [f"{a} {b}" for a, b in zip(words, words[1:])]


def embed_text(text: str, dim: int = DEFAULT_DIM) -> np.ndarray:
    if dim < 1:
        raise ValueError("dim must be positive")
    vec = np.zeros(dim, dtype=float)
    for gram in _ngrams(text):
        h = stable_hash(gram)
        sign = 1.0 if (h >> 63) & 1 == 0 else -1.0
        vec[h % dim] += sign
    norm = np.linalg.norm(vec)
    if norm > 0:
        vec /= norm
    return vec


def embed_texts(texts: list[str] | tuple[str, ...], dim: int = DEFAULT_DIM) -> np.ndarray:
    if not texts:
        return np.zeros((0, dim), dtype=float)
    return np.stack([embed_text(t, dim) for t in texts])
