"""Shared domain types: labels, examples, directions, and label distributions.

All types here are immutable value objects and safe to share across threads.
Premise and hypothesis text is whitespace-normalized at construction time so
that comparisons, hashing, and dedup keys are stable regardless of how ragged
the upstream text was.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

_WS_RUN = re.compile(r"\s+")

#: Maximum tolerated deviation of a probability vector's sum from 1.
DISTRIBUTION_SUM_TOL = 1e-6


def normalize_ws(text: str) -> str:
    """Collapse whitespace runs to single spaces and trim both ends."""
    return _WS_RUN.sub(" ", text).strip()


class Label(str, Enum):
    """Three-way NLI verdict.

    The declaration order (entailment < neutral < contradiction) is the fixed
    total ordering used everywhere ties must be broken deterministically.
    """

    ENTAILMENT = "entailment"
    NEUTRAL = "neutral"
    CONTRADICTION = "contradiction"

    @property
    def order(self) -> int:
        return _LABEL_ORDER[self]

    @property
    def initial(self) -> str:
        return self.value[0].upper()

    def __lt__(self, other: object) -> bool:  # type: ignore[override]
        if not isinstance(other, Label):
            return NotImplemented
        return self.order < other.order

    @classmethod
    def parse(cls, raw: str) -> "Label":
        try:
            return cls(raw.strip().lower())
        except ValueError:
            raise ValueError(f"unknown label {raw!r}") from None


_LABEL_ORDER = {Label.ENTAILMENT: 0, Label.NEUTRAL: 1, Label.CONTRADICTION: 2}

ALL_LABELS = (Label.ENTAILMENT, Label.NEUTRAL, Label.CONTRADICTION)

#: Surface words used when a label is rendered inside a prompt.
LABEL_WORDS = {
    Label.ENTAILMENT: "true",
    Label.CONTRADICTION: "false",
    Label.NEUTRAL: "possible",
}

_WORD_LABELS = {word: label for label, word in LABEL_WORDS.items()}

_INITIAL_LABELS = {label.initial: label for label in ALL_LABELS}


def label_word(label: Label) -> str:
    """Map a label to its prompt surface word (true / false / possible)."""
    return LABEL_WORDS[label]


def word_label(word: str) -> Label:
    """Inverse of :func:`label_word`."""
    try:
        return _WORD_LABELS[word.strip().lower()]
    except KeyError:
        raise ValueError(f"unknown label word {word!r}") from None


class PromptMode(str, Enum):
    """How the generation backend is asked for a replacement."""

    MASKED = "masked"
    INSERTION = "insertion"


@dataclass(frozen=True, order=True)
class Direction:
    """An ordered source-to-target label transition, e.g. entailment -> contradiction."""

    source: Label
    target: Label

    def __post_init__(self) -> None:
        if self.source == self.target:
            raise ValueError(f"direction source and target must differ, got {self.source.value} twice")

    @property
    def short_name(self) -> str:
        return f"{self.source.initial}2{self.target.initial}"

    @classmethod
    def from_short_name(cls, name: str) -> "Direction":
        m = re.fullmatch(r"([ENC])2([ENC])", name.strip().upper())
        if not m:
            raise ValueError(f"not a direction short name: {name!r}")
        return cls(_INITIAL_LABELS[m.group(1)], _INITIAL_LABELS[m.group(2)])


def directions_from(source: Label) -> tuple[Direction, ...]:
    """Both valid directions leaving ``source``, in target-label order."""
    return tuple(Direction(source, t) for t in ALL_LABELS if t != source)


ALL_DIRECTIONS = tuple(d for s in ALL_LABELS for d in directions_from(s))


@dataclass(frozen=True)
class LabelDistribution:
    """A probability distribution over the three NLI labels.

    All three labels must be present, each probability must lie in [0, 1],
    and the sum must be 1 within ``DISTRIBUTION_SUM_TOL``. Argmax ties are
    broken by the fixed label ordering.
    """

    probs: Mapping[Label, float]

    def __post_init__(self) -> None:
        missing = [l.value for l in ALL_LABELS if l not in self.probs]
        if missing:
            raise ValueError(f"distribution missing labels: {missing}")
        for lab in ALL_LABELS:
            p = self.probs[lab]
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"probability for {lab.value} out of [0, 1]: {p}")
        total = sum(self.probs[lab] for lab in ALL_LABELS)
        # the tiny absolute slack keeps boundary sums like 3 * 0.333333 acceptable
        if abs(total - 1.0) > DISTRIBUTION_SUM_TOL + 1e-12:
            raise ValueError(f"probabilities sum to {total!r}, expected 1 within {DISTRIBUTION_SUM_TOL}")
        object.__setattr__(self, "probs", {lab: float(self.probs[lab]) for lab in ALL_LABELS})

    def __getitem__(self, label: Label) -> float:
        return self.probs[label]

    def argmax(self) -> Label:
        best = ALL_LABELS[0]
        for lab in ALL_LABELS[1:]:
            if self.probs[lab] > self.probs[best]:
                best = lab
        return best

    @classmethod
    def from_values(cls, entailment: float, neutral: float, contradiction: float) -> "LabelDistribution":
        return cls({Label.ENTAILMENT: entailment, Label.NEUTRAL: neutral, Label.CONTRADICTION: contradiction})

    def to_record(self) -> dict[str, float]:
        """Serialize with 6 decimal digits, nudging the argmax entry so the
        written values sum to exactly 1 (keeps round-trips valid and stable)."""
        rounded = {lab: round(self.probs[lab], 6) for lab in ALL_LABELS}
        top = self.argmax()
        rounded[top] = round(1.0 - sum(v for lab, v in rounded.items() if lab is not top), 6)
        return {lab.value: rounded[lab] for lab in ALL_LABELS}

    @classmethod
    def from_record(cls, record: Mapping[str, float]) -> "LabelDistribution":
        return cls({Label.parse(k): float(v) for k, v in record.items()})


@dataclass(frozen=True)
class NliExample:
    """One premise/hypothesis/label record.

    ``spans`` optionally carries precomputed perturbation locations as
    (start, end) character offsets into the normalized premise.
    """

    id: str
    premise: str
    hypothesis: str
    label: Label
    spans: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "premise", normalize_ws(self.premise))
        object.__setattr__(self, "hypothesis", normalize_ws(self.hypothesis))
        if not self.id:
            raise ValueError("example id must be non-empty")
        if not self.premise:
            raise ValueError(f"example {self.id}: premise empty after whitespace normalization")
        if not self.hypothesis:
            raise ValueError(f"example {self.id}: hypothesis empty after whitespace normalization")
        if self.spans is not None:
            object.__setattr__(self, "spans", tuple((int(s), int(e)) for s, e in self.spans))

    @property
    def dedup_key(self) -> tuple[str, str, str]:
        """Case-sensitive (premise, hypothesis, label) identity used for dedup."""
        return (self.premise, self.hypothesis, self.label.value)


@dataclass(frozen=True)
class Provenance:
    """Where a distilled counterfactual came from."""

    source_id: str
    span_start: int
    span_end: int
    replacement: str
    direction: Direction
    mode: PromptMode
    delta: float

    def to_record(self) -> dict:
        return {
            "source_id": self.source_id,
            "span_start": self.span_start,
            "span_end": self.span_end,
            "replacement": self.replacement,
            "direction": self.direction.short_name,
            "mode": self.mode.value,
            "delta": round(self.delta, 6),
        }

    @classmethod
    def from_record(cls, record: Mapping) -> "Provenance":
        return cls(
            source_id=str(record["source_id"]),
            span_start=int(record["span_start"]),
            span_end=int(record["span_end"]),
            replacement=str(record["replacement"]),
            direction=Direction.from_short_name(record["direction"]),
            mode=PromptMode(record["mode"]),
            delta=float(record["delta"]),
        )


@dataclass(frozen=True)
class DistilledExample:
    """A teacher-accepted counterfactual with its probability-shift score."""

    id: str
    new_premise: str
    hypothesis: str
    new_label: Label
    provenance: Provenance

    def __post_init__(self) -> None:
        object.__setattr__(self, "new_premise", normalize_ws(self.new_premise))
        object.__setattr__(self, "hypothesis", normalize_ws(self.hypothesis))
        if self.new_label != self.provenance.direction.target:
            raise ValueError(
                f"distilled example {self.id}: label {self.new_label.value} does not match "
                f"direction target {self.provenance.direction.target.value}"
            )

    def to_example(self) -> NliExample:
        return NliExample(id=self.id, premise=self.new_premise, hypothesis=self.hypothesis, label=self.new_label)


def stable_hash(*parts: str, digest_size: int = 8) -> int:
    """Platform-stable unsigned integer hash of the given string parts."""
    h = hashlib.blake2b(digest_size=digest_size)
    for part in parts:
        h.update(part.encode("utf-8"))
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "big")
