"""Counterfactual sensitivity and counterfactual accuracy.

Sensitivity measures how confidently a model separates an original example
from its counterfactual: the mean of the predicted-label probability gains in
the two inputs. It is 0 whenever the predicted label does not change and
reaches 1 when the prediction flips with full confidence on both sides.
Counterfactual accuracy counts a pair as correct only when both members are
predicted correctly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from ..types import Direction, Label, LabelDistribution, NliExample


@dataclass(frozen=True)
class CounterfactualPair:
    """An (original, counterfactual) pair with gold labels and model predictions."""

    original: NliExample
    cf_premise: str
    cf_label: Label
    pred_orig: LabelDistribution
    pred_cf: LabelDistribution

    @property
    def hypothesis(self) -> str:
        return self.original.hypothesis

    @property
    def direction(self) -> Direction | None:
        if self.original.label == self.cf_label:
            return None
        return Direction(self.original.label, self.cf_label)


def sensitivity(pair: CounterfactualPair) -> float:
    """Mean probability shift between the two predicted labels.

    With predicted labels l on the original input x and l' on the
    counterfactual x', this is ((p(l'|x') - p(l'|x)) + (p(l|x) - p(l|x'))) / 2.
    """
    l_hat = pair.pred_orig.argmax()
    l_hat_cf = pair.pred_cf.argmax()
    gain_cf = pair.pred_cf[l_hat_cf] - pair.pred_orig[l_hat_cf]
    gain_orig = pair.pred_orig[l_hat] - pair.pred_cf[l_hat]
    return (gain_cf + gain_orig) / 2.0


def mean_sensitivity(pairs: Sequence[CounterfactualPair]) -> float:
    if not pairs:
        raise ValueError("sensitivity undefined on an empty pair set")
    return sum(sensitivity(p) for p in pairs) / len(pairs)


def counterfactual_accuracy(pairs: Sequence[CounterfactualPair]) -> float:
    """Fraction of pairs with both members predicted correctly."""
    if not pairs:
        raise ValueError("counterfactual accuracy undefined on an empty pair set")
    correct = sum(
        1
        for p in pairs
        if p.pred_orig.argmax() == p.original.label and p.pred_cf.argmax() == p.cf_label
    )
    return correct / len(pairs)
