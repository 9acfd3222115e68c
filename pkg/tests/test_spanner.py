import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfdistill.spanner import ChunkerConfig, Span, extract_spans, spans_for_example, spans_from_offsets
from cfdistill.types import Label, NliExample

WORDS = st.sampled_from(
    "a an the cat dog man woman runs sits tall red blue on in at with near quietly "
    "bench park street bike car tree water is are was holding carrying large small".split()
)
SENTENCES = st.lists(WORDS, min_size=1, max_size=20).map(" ".join)


def test_single_chunk_sentence_strips_trailing_punctuation():
    spans = extract_spans("Dogs.")
    assert len(spans) == 1
    assert spans[0].text == "Dogs"
    assert (spans[0].start, spans[0].end) == (0, 4)


def test_default_rule_hand_derived_case():
    # hand application of the boundary rule: split before function words, then
    # merge the single-token chunk "in" into the previous chunk
    premise = "A man in a red shirt is riding a bike"
    spans = extract_spans(premise)
    assert [s.text for s in spans] == ["A man in", "a red shirt", "is riding", "a bike"]
    assert [(s.start, s.end) for s in spans] == [(0, 8), (9, 20), (21, 30), (31, 37)]


def test_empty_premise_is_an_error():
    with pytest.raises(ValueError):
        extract_spans("   ")


def test_precomputed_spans_passed_through_verbatim():
    ex = NliExample(
        id="x", premise="a dog runs fast", hypothesis="h text", label=Label.NEUTRAL, spans=((2, 5), (6, 10))
    )
    spans = spans_for_example(ex)
    assert [(s.start, s.end, s.text) for s in spans] == [(2, 5, "dog"), (6, 10, "runs")]


def test_precomputed_spans_validated():
    with pytest.raises(ValueError):
        spans_from_offsets("short", [(0, 99)])
    with pytest.raises(ValueError):
        spans_from_offsets("a dog runs", [(0, 5), (3, 8)])  # overlapping


def test_long_chunks_split_at_midpoint():
    # no function words anywhere: one chunk of 10 tokens -> 5 + 5
    premise = "w1 w2 w3 w4 w5 w6 w7 w8 w9 w10"
    config = ChunkerConfig(function_words=frozenset())
    spans = extract_spans(premise, config)
    assert [s.text for s in spans] == ["w1 w2 w3 w4 w5", "w6 w7 w8 w9 w10"]


def test_leading_short_chunk_merges_forward():
    # "The" starts the sentence; rule would isolate nothing before it, but a
    # 1-token first chunk must merge into the next chunk
    spans = extract_spans("The dog barks")
    assert [s.text for s in spans] == ["The dog barks"]


@settings(max_examples=200)
@given(SENTENCES)
def test_span_invariants_fuzz(premise):
    spans = extract_spans(premise)
    assert len(spans) >= 1
    assert len(spans) <= len(premise.split())
    last_end = -1
    for span in spans:
        assert 0 <= span.start < span.end <= len(premise)
        assert premise[span.start : span.end] == span.text
        assert span.start > last_end or last_end == -1
        assert span.start >= last_end
        last_end = span.end
    # spans plus inter-span separators reconstruct the premise
    rebuilt = premise[: spans[0].start]
    for i, span in enumerate(spans):
        rebuilt += span.text
        nxt = spans[i + 1].start if i + 1 < len(spans) else len(premise)
        rebuilt += premise[span.end : nxt]
    assert rebuilt == premise


@settings(max_examples=100)
@given(SENTENCES)
def test_determinism(premise):
    assert extract_spans(premise) == extract_spans(premise)


@settings(max_examples=100)
@given(SENTENCES, st.integers(2, 6))
def test_max_tokens_respected(premise, max_tokens):
    config = ChunkerConfig(max_tokens=max_tokens)
    for span in extract_spans(premise, config):
        assert len(span.text.split()) <= max_tokens
