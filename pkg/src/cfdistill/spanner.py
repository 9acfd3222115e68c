"""Premise span extraction.

A premise is decomposed into non-overlapping candidate spans that serve as
perturbation locations. The default chunker is rule based: a new chunk starts
before every function word from a closed list, chunks shorter than two tokens
are merged into the previous chunk, and chunks longer than eight tokens are
split at the midpoint token boundary. Edge punctuation is excluded from span
text, so it survives as inter-span separator text.

Externally parsed spans can be passed through instead via a ``spans`` field
on the input record; offsets are validated against the normalized premise.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .types import NliExample

_TOKEN = re.compile(r"\S+")

DEFAULT_FUNCTION_WORDS = frozenset(
    "a an the in on at is are was were with and or to of".split()
)


@dataclass(frozen=True)
class Span:
    """A [start, end) character slice of a premise."""

    start: int
    end: int
    text: str

    def __post_init__(self) -> None:
        if self.start < 0 or self.end <= self.start:
            raise ValueError(f"invalid span offsets [{self.start}, {self.end})")

    @classmethod
    def from_offsets(cls, premise: str, start: int, end: int) -> "Span":
        if not (0 <= start < end <= len(premise)):
            raise ValueError(f"span [{start}, {end}) out of bounds for premise of length {len(premise)}")
        return cls(start=start, end=end, text=premise[start:end])


@dataclass(frozen=True)
class ChunkerConfig:
    function_words: frozenset[str] = DEFAULT_FUNCTION_WORDS
    merge_below: int = 2   # chunks with fewer tokens merge into the previous chunk
    max_tokens: int = 8    # longer chunks split at the midpoint token boundary


@dataclass(frozen=True)
class _Token:
    text: str
    start: int
    end: int

    @property
    def core(self) -> tuple[int, int]:
        """Offsets of the token with edge punctuation stripped (may be empty)."""
        lo, hi = 0, len(self.text)
        while lo < hi and not self.text[lo].isalnum():
            lo += 1
        while hi > lo and not self.text[hi - 1].isalnum():
            hi -= 1
        return self.start + lo, self.start + hi

    @property
    def core_word(self) -> str:
        lo, hi = self.core
        return self.text[lo - self.start : hi - self.start].lower()


def _split_long(chunk: list[_Token], max_tokens: int) -> list[list[_Token]]:
    if len(chunk) <= max_tokens:
        return [chunk]
    mid = (len(chunk) + 1) // 2
    return _split_long(chunk[:mid], max_tokens) + _split_long(chunk[mid:], max_tokens)


def extract_spans(premise: str, config: ChunkerConfig | None = None) -> list[Span]:
    """Decompose ``premise`` into candidate spans with the rule-based chunker.

    Deterministic for fixed config; returns at least one span; every span's
    text equals the premise substring at its offsets.
    """
    config = config or ChunkerConfig()
    tokens = [_Token(m.group(), m.start(), m.end()) for m in _TOKEN.finditer(premise)]
    if not tokens:
        raise ValueError("premise is empty after whitespace normalization")

    chunks: list[list[_Token]] = []
    for tok in tokens:
        starts_new = bool(chunks) and tok.core_word in config.function_words
        if not chunks or starts_new:
            chunks.append([tok])
        else:
            chunks[-1].append(tok)

    merged: list[list[_Token]] = []
    for chunk in chunks:
        if merged and len(chunk) < config.merge_below:
            merged[-1].extend(chunk)
        else:
            merged.append(chunk)
    if len(merged) > 1 and len(merged[0]) < config.merge_below:
        merged[1] = merged[0] + merged[1]
        merged.pop(0)

    sized: list[list[_Token]] = []
    for chunk in merged:
        sized.extend(_split_long(chunk, config.max_tokens))

    spans: list[Span] = []
    for chunk in sized:
        cores = [tok.core for tok in chunk if tok.core[0] < tok.core[1]]
        if not cores:
            continue  # punctuation-only chunk becomes separator text
        start, end = cores[0][0], cores[-1][1]
        spans.append(Span.from_offsets(premise, start, end))
    if not spans:
        # premise with no alphanumeric content at all: one span covering everything
        spans = [Span.from_offsets(premise, 0, len(premise))]
    return spans


def spans_from_offsets(premise: str, pairs: Sequence[tuple[int, int]]) -> list[Span]:
    """Validate and adopt precomputed spans (non-overlapping, sorted by start)."""
    spans = [Span.from_offsets(premise, start, end) for start, end in pairs]
    for prev, cur in zip(spans, spans[1:]):
        if cur.start < prev.end:
            raise ValueError(
                f"precomputed spans overlap or are unsorted: [{prev.start}, {prev.end}) then [{cur.start}, {cur.end})"
            )
    if not spans:
        raise ValueError("precomputed span list is empty")
    return spans


def spans_for_example(example: NliExample, config: ChunkerConfig | None = None) -> list[Span]:
    """Pass through the example's precomputed spans if present, else chunk."""
    if example.spans is not None:
        return spans_from_offsets(example.premise, example.spans)
    return extract_spans(example.premise, config)
