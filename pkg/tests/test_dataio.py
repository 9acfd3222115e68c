import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfdistill.dataio import read_dataset, write_dataset
from cfdistill.errors import DatasetError
from cfdistill.types import Label, NliExample

LABELS = st.sampled_from(list(Label))
# texts that stay non-empty after whitespace normalization
TEXT = st.text(
    alphabet=st.characters(whitelist_categories=("Lu", "Ll", "Nd", "Zs"), whitelist_characters=".,'-"),
    min_size=1,
    max_size=60,
).filter(lambda s: s.strip())

EXAMPLES = st.builds(
    NliExample,
    id=st.uuids().map(str),
    premise=TEXT,
    hypothesis=TEXT,
    label=LABELS,
)


def test_empty_file_gives_empty_sequence(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("", encoding="utf-8")
    assert read_dataset(path) == []


def test_three_lines_preserve_order(tmp_path):
    path = tmp_path / "three.jsonl"
    rows = [
        {"id": "a", "premise": "A dog runs", "hypothesis": "An animal moves", "label": "entailment"},
        {"id": "b", "premise": "A cat sleeps", "hypothesis": "A cat is awake", "label": "contradiction"},
        {"id": "c", "premise": "A bird sings", "hypothesis": "The bird is happy", "label": "neutral"},
    ]
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    examples = read_dataset(path)
    assert [e.id for e in examples] == ["a", "b", "c"]
    assert examples[1].label == Label.CONTRADICTION


def test_missing_hypothesis_names_line_2(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(
        json.dumps({"premise": "p one", "hypothesis": "h one", "label": "neutral"})
        + "\n"
        + json.dumps({"premise": "p two", "label": "neutral"})
        + "\n",
        encoding="utf-8",
    )
    with pytest.raises(DatasetError, match=r":2"):
        read_dataset(path)


def test_malformed_json_names_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"premise": "a", "hypothesis": "b", "label": "neutral"}\n{oops\n', encoding="utf-8")
    with pytest.raises(DatasetError, match=r":2"):
        read_dataset(path)


def test_duplicate_id_rejected(tmp_path):
    path = tmp_path / "dup.jsonl"
    row = {"id": "same", "premise": "p", "hypothesis": "h", "label": "neutral"}
    path.write_text(json.dumps(row) + "\n" + json.dumps(row) + "\n", encoding="utf-8")
    with pytest.raises(DatasetError, match="duplicate id"):
        read_dataset(path)


def test_missing_file_names_path(tmp_path):
    missing = tmp_path / "nope.jsonl"
    with pytest.raises(DatasetError, match="nope.jsonl"):
        read_dataset(missing)


def test_ids_assigned_from_stem_and_line_index(tmp_path):
    path = tmp_path / "mystem.jsonl"
    rows = [{"premise": f"p {i}", "hypothesis": f"h {i}", "label": "neutral"} for i in range(3)]
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    assert [e.id for e in read_dataset(path)] == ["mystem#0", "mystem#1", "mystem#2"]


def test_no_gold_label_records_skipped_and_counted(tmp_path, caplog):
    path = tmp_path / "nogold.jsonl"
    rows = [
        {"premise": "p one", "hypothesis": "h", "label": "-"},
        {"premise": "p two", "hypothesis": "h", "label": "entailment"},
    ]
    path.write_text("".join(json.dumps(r) + "\n" for r in rows), encoding="utf-8")
    with caplog.at_level("WARNING"):
        examples = read_dataset(path)
    assert len(examples) == 1
    assert examples[0].id == "nogold#1"  # index advances past skipped records
    assert any("skipped 1" in r.message for r in caplog.records)


def test_write_then_read_identity(tmp_path):
    examples = [
        NliExample(id=f"e{i}", premise=f"premise {i} text", hypothesis=f"hypothesis {i}", label=lab)
        for i, lab in enumerate([Label.ENTAILMENT, Label.NEUTRAL, Label.CONTRADICTION] * 3 + [Label.NEUTRAL])
    ]
    path = tmp_path / "out.jsonl"
    write_dataset(examples, path)
    assert read_dataset(path) == examples


def test_two_writes_are_byte_identical(tmp_path):
    examples = [
        NliExample(id="a", premise="Un vélo rouge", hypothesis="Il y a un vélo", label=Label.ENTAILMENT),
        NliExample(id="b", premise="p text", hypothesis="h text", label=Label.NEUTRAL, spans=((0, 3),)),
    ]
    p1, p2 = tmp_path / "one.jsonl", tmp_path / "two.jsonl"
    write_dataset(examples, p1)
    write_dataset(examples, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_write_empty_sequence_gives_zero_byte_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    write_dataset([], path)
    assert path.read_bytes() == b""


@settings(max_examples=50)
@given(st.lists(EXAMPLES, max_size=12, unique_by=lambda e: e.id))
def test_read_write_round_trip_property(tmp_path_factory, examples):
    path = tmp_path_factory.mktemp("roundtrip") / "data.jsonl"
    write_dataset(examples, path)
    assert read_dataset(path) == examples


def test_spans_field_round_trips(tmp_path):
    ex = NliExample(id="s", premise="a dog runs fast", hypothesis="h here", label=Label.NEUTRAL, spans=((0, 5), (6, 10)))
    path = tmp_path / "spans.jsonl"
    write_dataset([ex], path)
    assert read_dataset(path)[0].spans == ((0, 5), (6, 10))
