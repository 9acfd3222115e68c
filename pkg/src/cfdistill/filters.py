"""Two-stage distillation filters.

Stage one is a heuristic artifact pruner: six checks run in a fixed order and
the first match becomes the rejection's primary reason. Stage two queries a
teacher scorer for the original and perturbed premise against the shared
hypothesis and keeps candidates whose target-label probability rises by at
least the threshold (optionally also requiring the target to be the teacher's
top prediction on the new input).
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Sequence

from .backend import CandidatePerturbation
from .scorer import Scorer
from .types import DistilledExample, Label, LabelDistribution, Provenance

logger = logging.getLogger(__name__)

_ALNUM_TOKEN = re.compile(r"[a-z0-9]+")

DEFAULT_NEGATION_WORDS = frozenset(
    "not no never n't none nothing nobody nowhere neither nor cannot without".split()
)


class RejectReason(str, Enum):
    """Primary reason a candidate was pruned, in check order."""

    INSTRUCTION_LEAK = "instruction_leak"
    ICL_COPY = "icl_copy"
    PREMISE_HYPOTHESIS_REPEAT = "premise_hypothesis_repeat"
    EXCESSIVE_OVERLAP = "excessive_overlap"
    NEGATION_SHORTCUT = "negation_shortcut"
    DEGENERATE_TEXT = "degenerate_text"
    BELOW_THRESHOLD = "below_threshold"  # teacher stage
    ARGMAX_MISMATCH = "argmax_mismatch"  # teacher stage

    @classmethod
    def heuristic_order(cls) -> tuple["RejectReason", ...]:
        return (
            cls.INSTRUCTION_LEAK,
            cls.ICL_COPY,
            cls.PREMISE_HYPOTHESIS_REPEAT,
            cls.EXCESSIVE_OVERLAP,
            cls.NEGATION_SHORTCUT,
            cls.DEGENERATE_TEXT,
        )


@dataclass(frozen=True)
class FilterConfig:
    ngram_window: int = 4          # contiguous-token window for leak/copy/repeat checks
    overlap_threshold: float = 0.8  # premise-vs-hypothesis lexical overlap cutoff
    negation_words: frozenset[str] = DEFAULT_NEGATION_WORDS
    tau: float = 0.5                # minimum target-label probability gain
    require_argmax: bool = True     # also require argmax(p_new) == target
    enabled: frozenset[RejectReason] | None = None  # None enables every heuristic check

    def __post_init__(self) -> None:
        if not (0.0 <= self.tau <= 1.0):
            raise ValueError("tau must lie in [0, 1]")

    def is_enabled(self, reason: RejectReason) -> bool:
        return self.enabled is None or reason in self.enabled


@dataclass(frozen=True)
class FilterContext:
    """Prompt boilerplate and demonstration text the replacement may leak from."""

    instruction_texts: tuple[str, ...] = ()
    icl_texts: tuple[str, ...] = ()


@dataclass(frozen=True)
class TeacherScore:
    """Teacher distributions for the original and perturbed inputs."""

    p_orig: LabelDistribution
    p_new: LabelDistribution
    target: Label
    delta: float

    def __post_init__(self) -> None:
        if self.delta != self.p_new[self.target] - self.p_orig[self.target]:
            raise ValueError("delta must equal p_new[target] - p_orig[target]")


def _tokens(text: str) -> list[str]:
    return _ALNUM_TOKEN.findall(text.lower())


def overlap_rate(a: str, b: str) -> float:
    """Jaccard similarity of lowercased alphanumeric token sets (0 when both empty)."""
    sa, sb = set(_tokens(a)), set(_tokens(b))
    if not sa and not sb:
        return 0.0
    return len(sa & sb) / len(sa | sb)


def _ngrams(tokens: Sequence[str], n: int) -> set[tuple[str, ...]]:
    return {tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)}


def _shares_window(text: str, sources: Iterable[str], window: int) -> bool:
    grams = _ngrams(_tokens(text), window)
    if not grams:
        return False
    return any(grams & _ngrams(_tokens(source), window) for source in sources)


def _negation_words_in(text: str, negation_words: frozenset[str]) -> set[str]:
    found = set()
    for raw in text.lower().split():
        word = raw.strip("\"'`.,;:!?()[]{}")
        if word in negation_words:
            found.add(word)
        elif word.endswith("n't") or word.endswith("n’t"):
            found.add("n't")
    return found


def heuristic_filter(
    candidate: CandidatePerturbation,
    hypothesis: str,
    context: FilterContext,
    config: FilterConfig | None = None,
) -> RejectReason | None:
    """Run the six ordered checks; return the first matching reason or None.

    Total and deterministic: never raises on well-formed candidates.
    """
    config = config or FilterConfig()
    replacement = candidate.replacement
    w = config.ngram_window

    if config.is_enabled(RejectReason.INSTRUCTION_LEAK):
        if _shares_window(replacement, context.instruction_texts, w):
            return RejectReason.INSTRUCTION_LEAK
    if config.is_enabled(RejectReason.ICL_COPY):
        if _shares_window(replacement, context.icl_texts, w):
            return RejectReason.ICL_COPY
    if config.is_enabled(RejectReason.PREMISE_HYPOTHESIS_REPEAT):
        if _shares_window(replacement, (candidate.premise, hypothesis), w):
            return RejectReason.PREMISE_HYPOTHESIS_REPEAT
    if config.is_enabled(RejectReason.EXCESSIVE_OVERLAP):
        if overlap_rate(candidate.new_premise, hypothesis) >= config.overlap_threshold:
            return RejectReason.EXCESSIVE_OVERLAP
    if config.is_enabled(RejectReason.NEGATION_SHORTCUT):
        introduced = _negation_words_in(replacement, config.negation_words) - _negation_words_in(
            candidate.premise, config.negation_words
        )
        if introduced:
            return RejectReason.NEGATION_SHORTCUT
    if config.is_enabled(RejectReason.DEGENERATE_TEXT):
        if not _tokens(replacement) or candidate.new_premise == candidate.premise:
            return RejectReason.DEGENERATE_TEXT
    return None


def teacher_delta(p_orig: LabelDistribution, p_new: LabelDistribution, target: Label) -> float:
    """Change in the target label's prediction probability, new minus original."""
    return p_new[target] - p_orig[target]


def score_candidate(candidate: CandidatePerturbation, hypothesis: str, scorer: Scorer) -> TeacherScore:
    p_orig, p_new = scorer.score_batch(
        [(candidate.premise, hypothesis), (candidate.new_premise, hypothesis)]
    )
    target = candidate.direction.target
    return TeacherScore(p_orig=p_orig, p_new=p_new, target=target, delta=teacher_delta(p_orig, p_new, target))


def accept_score(score: TeacherScore, tau: float, require_argmax: bool = True) -> RejectReason | None:
    if score.delta < tau:
        return RejectReason.BELOW_THRESHOLD
    if require_argmax and score.p_new.argmax() != score.target:
        return RejectReason.ARGMAX_MISMATCH
    return None


def distill(candidate: CandidatePerturbation, score: TeacherScore, distilled_id: str | None = None) -> DistilledExample:
    if candidate.new_premise == candidate.premise:
        raise ValueError(f"candidate {candidate.key} did not change the premise")
    return DistilledExample(
        id=distilled_id or f"{candidate.key}.cf",
        new_premise=candidate.new_premise,
        hypothesis=candidate.hypothesis,
        new_label=candidate.direction.target,
        provenance=Provenance(
            source_id=candidate.example_id,
            span_start=candidate.span.start,
            span_end=candidate.span.end,
            replacement=candidate.replacement,
            direction=candidate.direction,
            mode=candidate.mode,
            delta=score.delta,
        ),
    )


def teacher_filter(
    candidate: CandidatePerturbation,
    hypothesis: str,
    scorer: Scorer,
    tau: float = 0.5,
    require_argmax: bool = True,
) -> DistilledExample | None:
    """Score one candidate and accept it iff delta >= tau (and, by default,
    the target label is the teacher's argmax on the new input)."""
    if not (0.0 <= tau <= 1.0):
        raise ValueError("tau must lie in [0, 1]")
    score = score_candidate(candidate, hypothesis, scorer)
    if accept_score(score, tau, require_argmax) is not None:
        return None
    return distill(candidate, score)
