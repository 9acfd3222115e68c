"""Subset selection from precomputed cartography statistics and training-set assembly.

Cartography statistics (per-example confidence and variability) are consumed
from a stats file, never computed here. High-variability examples form the
"ambiguous" subset; the augmented training set is the deduplicated union of a
base set, the selected subset, and the distilled counterfactuals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from .dataio import iter_records, write_records
from .errors import DatasetError
from .types import NliExample


@dataclass(frozen=True)
class CartographyStats:
    example_id: str
    confidence: float
    variability: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.confidence <= 1.0):
            raise ValueError(f"confidence for {self.example_id} out of [0, 1]: {self.confidence}")
        if self.variability < 0.0:
            raise ValueError(f"variability for {self.example_id} must be >= 0: {self.variability}")


def read_stats(path: str | Path) -> dict[str, CartographyStats]:
    stats: dict[str, CartographyStats] = {}
    for line_no, obj in iter_records(path):
        try:
            record = CartographyStats(
                example_id=str(obj["id"]),
                confidence=float(obj["confidence"]),
                variability=float(obj["variability"]),
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise DatasetError(f"{Path(path)}:{line_no}: bad stats record: {exc}") from exc
        if record.example_id in stats:
            raise DatasetError(f"{Path(path)}:{line_no}: duplicate stats for id {record.example_id!r}")
        stats[record.example_id] = record
    return stats


def write_stats(stats: Sequence[CartographyStats], path: str | Path) -> None:
    write_records(
        (
            {"id": s.example_id, "confidence": round(s.confidence, 6), "variability": round(s.variability, 6)}
            for s in stats
        ),
        path,
    )


def _ceil_fraction(fraction: float, n: int) -> int:
    # guard against float noise pushing an exact product over the next integer
    return max(1, min(n, math.ceil(fraction * n - 1e-9)))


def select_ambiguous(
    dataset: Sequence[NliExample],
    stats: Mapping[str, CartographyStats],
    fraction: float,
) -> list[NliExample]:
    """The ceil(fraction * N) highest-variability examples, ties broken by id.

    The returned subset preserves the dataset's original order. Every example
    must have a stats record.
    """
    if not (0.0 < fraction <= 1.0):
        raise ValueError(f"fraction must lie in (0, 1], got {fraction}")
    if not dataset:
        return []
    for example in dataset:
        if example.id not in stats:
            raise DatasetError(f"no cartography stats record for example id {example.id!r}")
    k = _ceil_fraction(fraction, len(dataset))
    ranked = sorted(dataset, key=lambda ex: (-stats[ex.id].variability, ex.id))
    chosen = {ex.id for ex in ranked[:k]}
    return [ex for ex in dataset if ex.id in chosen]


def build_augmented(
    base: Sequence[NliExample],
    source_subset: Sequence[NliExample],
    counterfactuals: Sequence[NliExample],
) -> list[NliExample]:
    """Union of the three inputs with duplicates removed.

    The dedup key is (normalized premise, normalized hypothesis, label),
    case-sensitive; the first occurrence wins, so the output keeps base order
    followed by new items in input order. Idempotent. The number of dropped
    duplicates is len(base) + len(source_subset) + len(counterfactuals) minus
    the output length.
    """
    seen: dict[tuple[str, str, str], NliExample] = {}
    for example in (*base, *source_subset, *counterfactuals):
        seen.setdefault(example.dedup_key, example)
    return list(seen.values())
