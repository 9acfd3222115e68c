"""Line-record dataset I/O.

One JSON object per line, UTF-8, "\\n" terminators. Dataset records carry
``id``, ``premise``, ``hypothesis``, ``label`` (lowercase words), optionally
``spans`` (list of [start, end] pairs) and, for distilled records, a
``provenance`` object. Records whose label is the no-gold marker "-" are
skipped at ingestion and counted in a log message.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import DatasetError
from .types import DistilledExample, Label, NliExample, Provenance

logger = logging.getLogger(__name__)

NO_GOLD_LABEL = "-"

DATASET_KINDS = ("nli", "distilled")


def iter_records(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield (1-based line number, parsed object) per non-empty line."""
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"input file does not exist: {path}")
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path}:{line_no}: malformed record: {exc.msg}") from exc
            if not isinstance(obj, dict):
                raise DatasetError(f"{path}:{line_no}: expected an object, got {type(obj).__name__}")
            yield line_no, obj


def write_records(records: Iterable[dict], path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False))
            fh.write("\n")


def _parse_spans(raw, path: Path, line_no: int) -> tuple[tuple[int, int], ...]:
    try:
        spans = tuple((int(pair[0]), int(pair[1])) for pair in raw)
    except (TypeError, ValueError, IndexError):
        raise DatasetError(f"{path}:{line_no}: 'spans' must be a list of [start, end] pairs") from None
    return spans


def read_dataset(path: str | Path, kind: str = "nli") -> list[NliExample]:
    """Read a dataset file, assigning ids "<filestem>#<line index>" where absent.

    ``kind`` is "nli" for plain records or "distilled" to additionally require
    a well-formed provenance object on every record.
    """
    if kind not in DATASET_KINDS:
        raise ValueError(f"unknown dataset kind {kind!r}, expected one of {DATASET_KINDS}")
    path = Path(path)
    examples: list[NliExample] = []
    seen_ids: set[str] = set()
    skipped_no_gold = 0
    index = 0
    for line_no, obj in iter_records(path):
        for field in ("premise", "hypothesis", "label"):
            if field not in obj:
                raise DatasetError(f"{path}:{line_no}: record missing {field!r} field")
        if isinstance(obj["label"], str) and obj["label"].strip() == NO_GOLD_LABEL:
            skipped_no_gold += 1
            index += 1
            continue
        try:
            label = Label.parse(str(obj["label"]))
        except ValueError as exc:
            raise DatasetError(f"{path}:{line_no}: {exc}") from exc
        example_id = str(obj["id"]) if obj.get("id") else f"{path.stem}#{index}"
        if example_id in seen_ids:
            raise DatasetError(f"{path}:{line_no}: duplicate id {example_id!r}")
        seen_ids.add(example_id)
        spans = _parse_spans(obj["spans"], path, line_no) if obj.get("spans") is not None else None
        if kind == "distilled":
            if "provenance" not in obj:
                raise DatasetError(f"{path}:{line_no}: distilled record missing 'provenance'")
            try:
                Provenance.from_record(obj["provenance"])
            except (KeyError, ValueError, TypeError) as exc:
                raise DatasetError(f"{path}:{line_no}: bad provenance: {exc}") from exc
        try:
            examples.append(
                NliExample(id=example_id, premise=obj["premise"], hypothesis=obj["hypothesis"], label=label, spans=spans)
            )
        except ValueError as exc:
            raise DatasetError(f"{path}:{line_no}: {exc}") from exc
        index += 1
    if skipped_no_gold:
        logger.warning("%s: skipped %d record(s) with no gold label (%r)", path, skipped_no_gold, NO_GOLD_LABEL)
    return examples


def example_record(example: NliExample) -> dict:
    record: dict = {
        "id": example.id,
        "premise": example.premise,
        "hypothesis": example.hypothesis,
        "label": example.label.value,
    }
    if example.spans is not None:
        record["spans"] = [[s, e] for s, e in example.spans]
    return record


def write_dataset(examples: Sequence[NliExample], path: str | Path) -> None:
    """Write examples one record per line; read_dataset(write_dataset(x)) == x."""
    write_records((example_record(ex) for ex in examples), path)


def read_distilled(path: str | Path) -> list[DistilledExample]:
    distilled: list[DistilledExample] = []
    for line_no, obj in iter_records(path):
        try:
            provenance = Provenance.from_record(obj["provenance"])
            distilled.append(
                DistilledExample(
                    id=str(obj["id"]),
                    new_premise=obj["premise"],
                    hypothesis=obj["hypothesis"],
                    new_label=Label.parse(str(obj["label"])),
                    provenance=provenance,
                )
            )
        except (KeyError, ValueError, TypeError) as exc:
            raise DatasetError(f"{Path(path)}:{line_no}: bad distilled record: {exc}") from exc
    return distilled


def distilled_record(example: DistilledExample) -> dict:
    return {
        "id": example.id,
        "premise": example.new_premise,
        "hypothesis": example.hypothesis,
        "label": example.new_label.value,
        "provenance": example.provenance.to_record(),
    }


def write_distilled(examples: Sequence[DistilledExample], path: str | Path) -> None:
    write_records((distilled_record(ex) for ex in examples), path)
