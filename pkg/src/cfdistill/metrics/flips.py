"""Label-flip rates over human-annotated counterfactuals.

The strict rate counts annotations that landed on the intended target label;
the soft rate counts annotations that differ from the original label at all
(a valid counterfactual even when the exact target was missed). Strict never
exceeds soft because the target differs from the original by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..types import Direction, Label


@dataclass(frozen=True)
class FlipAnnotation:
    original_label: Label
    target_label: Label
    annotated_label: Label

    def __post_init__(self) -> None:
        if self.original_label == self.target_label:
            raise ValueError("original and target labels must differ")

    @property
    def direction(self) -> Direction:
        return Direction(self.original_label, self.target_label)


def flip_rate(annotations: Sequence[FlipAnnotation]) -> float:
    """Fraction of annotations matching the target label (strict)."""
    if not annotations:
        raise ValueError("flip rate undefined on an empty annotation set")
    return sum(1 for a in annotations if a.annotated_label == a.target_label) / len(annotations)


def soft_flip_rate(annotations: Sequence[FlipAnnotation]) -> float:
    """Fraction of annotations differing from the original label (soft)."""
    if not annotations:
        raise ValueError("soft flip rate undefined on an empty annotation set")
    return sum(1 for a in annotations if a.annotated_label != a.original_label) / len(annotations)
