"""Optimal transport dataset distance over a label-augmented feature space.

The distance between two embedded, labeled datasets is computed in three
steps: (1) for every label pair, an inner OT problem between the
class-conditional point clouds under squared Euclidean ground cost gives a
label-to-label distance; (2) the point-to-point cost is the squared Euclidean
feature distance plus that label distance; (3) the overall value is the OT
cost between the full datasets under uniform weights, and the distance is its
square root. The exact solver is used whenever the instance fits its size
bound, otherwise the entropic solver takes over.

Absolute values depend on the embedding; only orderings and the metric's
structural properties (symmetry, zero on identical datasets) are meaningful
across embeddings.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..types import Label, NliExample
from .embed import DEFAULT_DIM, embed_texts
from .ot import EXACT_SIZE_LIMIT, exact_ot, sinkhorn_ot


@dataclass(frozen=True)
class EmbeddedDataset:
    """Fixed-dimension feature vectors with one label per point."""

    vectors: np.ndarray
    labels: tuple[Label, ...]

    def __post_init__(self) -> None:
        if self.vectors.ndim != 2:
            raise ValueError(f"vectors must be 2-D, got shape {self.vectors.shape}")
        if len(self.vectors) != len(self.labels):
            raise ValueError(f"{len(self.vectors)} vectors vs {len(self.labels)} labels")
        if len(self.vectors) == 0:
            raise ValueError("embedded dataset must contain at least one point")

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    @property
    def present_labels(self) -> tuple[Label, ...]:
        seen: dict[Label, None] = {}
        for lab in self.labels:
            seen.setdefault(lab, None)
        return tuple(seen)

    def class_cloud(self, label: Label) -> np.ndarray:
        mask = [i for i, lab in enumerate(self.labels) if lab == label]
        return self.vectors[mask]

    @classmethod
    def from_examples(cls, examples: Sequence[NliExample], dim: int = DEFAULT_DIM) -> "EmbeddedDataset":
        texts = [f"{ex.premise} {ex.hypothesis}" for ex in examples]
        return cls(vectors=embed_texts(texts, dim), labels=tuple(ex.label for ex in examples))


@dataclass(frozen=True)
class OtddConfig:
    exact_limit: int = EXACT_SIZE_LIMIT
    eps_scale: float = 1e-3   # entropic epsilon as a fraction of max cost
    max_iters: int = 5000
    tol: float = 1e-9


def squared_distances(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distances, clipped at zero."""
    sq = (x * x).sum(axis=1)[:, None] + (y * y).sum(axis=1)[None, :] - 2.0 * (x @ y.T)
    return np.maximum(sq, 0.0)


def _uniform(n: int) -> np.ndarray:
    return np.full(n, 1.0 / n)


def _ot_value(cost: np.ndarray, config: OtddConfig) -> float:
    n, m = cost.shape
    max_cost = float(cost.max()) if cost.size else 0.0
    if max_cost <= 0.0:
        return 0.0
    a, b = _uniform(n), _uniform(m)
    if n * m <= min(config.exact_limit, EXACT_SIZE_LIMIT):
        value = exact_ot(cost, a, b)
    else:
        value = sinkhorn_ot(cost, a, b, eps=config.eps_scale * max_cost, max_iters=config.max_iters, tol=config.tol).value
    # snap LP round-off to an exact zero; the square root taken downstream
    # would otherwise amplify 1e-16 solver noise into 1e-8 distances
    if value <= 1e-12 * (1.0 + max_cost):
        return 0.0
    return value


def label_distances(
    first: EmbeddedDataset, second: EmbeddedDataset, config: OtddConfig
) -> dict[tuple[Label, Label], float]:
    """Inner OT distance between class-conditional clouds for every label pair."""
    out: dict[tuple[Label, Label], float] = {}
    for y in first.present_labels:
        cloud_a = first.class_cloud(y)
        for y2 in second.present_labels:
            cloud_b = second.class_cloud(y2)
            out[(y, y2)] = _ot_value(squared_distances(cloud_a, cloud_b), config)
    return out


def otdd(first: EmbeddedDataset, second: EmbeddedDataset, config: OtddConfig | None = None) -> float:
    """Dataset distance; symmetric, nonnegative, zero on identical datasets."""
    config = config or OtddConfig()
    if first.dim != second.dim:
        raise ValueError(f"feature dimensions differ: {first.dim} vs {second.dim}")
    inner = label_distances(first, second, config)
    cost = squared_distances(first.vectors, second.vectors)
    label_cost = np.array(
        [[inner[(y, y2)] for y2 in second.labels] for y in first.labels]
    )
    value = _ot_value(cost + label_cost, config)
    return float(np.sqrt(max(0.0, value)))
