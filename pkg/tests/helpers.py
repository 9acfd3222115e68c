"""Shared helpers for the test suite."""

from cfdistill.types import Label, LabelDistribution


def dist(e: float, n: float, c: float) -> LabelDistribution:
    return LabelDistribution({Label.ENTAILMENT: e, Label.NEUTRAL: n, Label.CONTRADICTION: c})
