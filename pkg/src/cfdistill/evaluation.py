"""Assembly of metric report records from pipeline artifacts.

Each metric is reported per perturbation direction (E2C ... C2E) plus an
overall row. Counterfactual pairs can be read from a pairs file with
precomputed predictions or derived from a distilled file, its source dataset,
and a scorer.
"""

from __future__ import annotations

from pathlib import Path
from typing import Mapping, Sequence

from .dataio import iter_records
from .errors import ConfigError, DatasetError
from .metrics import (
    CounterfactualPair,
    EmbeddedDataset,
    FlipAnnotation,
    OtddConfig,
    counterfactual_accuracy,
    flip_rate,
    mean_sensitivity,
    otdd,
    self_bleu,
    soft_flip_rate,
)
from .report import OVERALL, MetricRecord
from .scorer import CachingScorer, Scorer
from .types import ALL_DIRECTIONS, DistilledExample, Label, LabelDistribution, NliExample

EVAL_METRICS = ("flip-rate", "self-bleu", "otdd", "sensitivity", "cf-accuracy")


def read_annotations(path: str | Path) -> list[FlipAnnotation]:
    annotations = []
    for line_no, obj in iter_records(path):
        try:
            annotations.append(
                FlipAnnotation(
                    original_label=Label.parse(str(obj["original_label"])),
                    target_label=Label.parse(str(obj["target_label"])),
                    annotated_label=Label.parse(str(obj["annotated_label"])),
                )
            )
        except (KeyError, ValueError) as exc:
            raise DatasetError(f"{Path(path)}:{line_no}: bad annotation record: {exc}") from exc
    return annotations


def read_pairs(path: str | Path, scorer: Scorer | None = None) -> list[CounterfactualPair]:
    """Load counterfactual pairs; missing predictions are scored if a scorer is given."""
    raw = []
    for line_no, obj in iter_records(path):
        try:
            original = NliExample(
                id=str(obj.get("id") or f"{Path(path).stem}#{line_no - 1}"),
                premise=str(obj["premise"]),
                hypothesis=str(obj["hypothesis"]),
                label=Label.parse(str(obj["label"])),
            )
            cf_premise = str(obj["cf_premise"])
            cf_label = Label.parse(str(obj["cf_label"]))
            pred_orig = LabelDistribution.from_record(obj["pred_orig"]) if obj.get("pred_orig") else None
            pred_cf = LabelDistribution.from_record(obj["pred_cf"]) if obj.get("pred_cf") else None
        except (KeyError, ValueError, TypeError) as exc:
            raise DatasetError(f"{Path(path)}:{line_no}: bad pair record: {exc}") from exc
        raw.append((original, cf_premise, cf_label, pred_orig, pred_cf))

    needs_scoring = any(po is None or pc is None for _, _, _, po, pc in raw)
    if needs_scoring:
        if scorer is None:
            raise ConfigError("pairs file has records without predictions; a scorer is required")
        scorer = CachingScorer(scorer)
    pairs = []
    for original, cf_premise, cf_label, pred_orig, pred_cf in raw:
        if pred_orig is None:
            (pred_orig,) = scorer.score_batch([(original.premise, original.hypothesis)])
        if pred_cf is None:
            (pred_cf,) = scorer.score_batch([(cf_premise, original.hypothesis)])
        pairs.append(
            CounterfactualPair(
                original=original, cf_premise=cf_premise, cf_label=cf_label, pred_orig=pred_orig, pred_cf=pred_cf
            )
        )
    return pairs


def derive_pairs(
    distilled: Sequence[DistilledExample],
    source_by_id: Mapping[str, NliExample],
    scorer: Scorer,
) -> list[CounterfactualPair]:
    """Build pairs from distillation provenance, scoring both sides."""
    scorer = CachingScorer(scorer)
    requests = []
    for item in distilled:
        original = source_by_id.get(item.provenance.source_id)
        if original is None:
            raise DatasetError(f"distilled record {item.id} references unknown source id {item.provenance.source_id!r}")
        requests.append((original, item))
    flat: list[tuple[str, str]] = []
    for original, item in requests:
        flat.append((original.premise, original.hypothesis))
        flat.append((item.new_premise, item.hypothesis))
    distributions = scorer.score_batch(flat) if flat else []
    pairs = []
    for k, (original, item) in enumerate(requests):
        pairs.append(
            CounterfactualPair(
                original=original,
                cf_premise=item.new_premise,
                cf_label=item.new_label,
                pred_orig=distributions[2 * k],
                pred_cf=distributions[2 * k + 1],
            )
        )
    return pairs


def _group_by_direction(items, direction_of) -> dict[str, list]:
    groups: dict[str, list] = {}
    for item in items:
        direction = direction_of(item)
        if direction is not None:
            groups.setdefault(direction.short_name, []).append(item)
    ordered = {}
    for d in ALL_DIRECTIONS:
        if d.short_name in groups:
            ordered[d.short_name] = groups[d.short_name]
    return ordered


def flip_records(annotations: Sequence[FlipAnnotation]) -> list[MetricRecord]:
    if not annotations:
        raise DatasetError("annotation set is empty")
    records = []
    groups = _group_by_direction(annotations, lambda a: a.direction)
    for metric, fn in (("lfr", flip_rate), ("slfr", soft_flip_rate)):
        for name, group in groups.items():
            records.append(MetricRecord(metric=metric, direction=name, value=fn(group), count=len(group)))
        records.append(MetricRecord(metric=metric, direction=OVERALL, value=fn(annotations), count=len(annotations)))
    return records


def selfbleu_records(distilled: Sequence[DistilledExample], max_n: int = 4) -> list[MetricRecord]:
    records = []
    groups = _group_by_direction(distilled, lambda d: d.provenance.direction)
    for name, group in groups.items():
        corpus = [d.new_premise for d in group]
        value = self_bleu(corpus, max_n=max_n) if len(corpus) >= 2 else None
        records.append(MetricRecord(metric="self_bleu", direction=name, value=value, count=len(group)))
    corpus = [d.new_premise for d in distilled]
    value = self_bleu(corpus, max_n=max_n) if len(corpus) >= 2 else None
    records.append(MetricRecord(metric="self_bleu", direction=OVERALL, value=value, count=len(corpus)))
    return records


def _unique_sources(
    group: Sequence[DistilledExample], source_by_id: Mapping[str, NliExample]
) -> list[NliExample]:
    seen: dict[str, NliExample] = {}
    for item in group:
        source_id = item.provenance.source_id
        if source_id not in source_by_id:
            raise DatasetError(f"distilled record {item.id} references unknown source id {source_id!r}")
        seen.setdefault(source_id, source_by_id[source_id])
    return list(seen.values())


def otdd_records(
    distilled: Sequence[DistilledExample],
    source_by_id: Mapping[str, NliExample],
    config: OtddConfig | None = None,
) -> list[MetricRecord]:
    """Distance between the original examples and their counterfactuals, per direction."""
    records = []
    groups = _group_by_direction(distilled, lambda d: d.provenance.direction)
    for name, group in list(groups.items()) + [(OVERALL, list(distilled))]:
        if not group:
            continue
        originals = _unique_sources(group, source_by_id)
        first = EmbeddedDataset.from_examples(originals)
        second = EmbeddedDataset.from_examples([d.to_example() for d in group])
        records.append(
            MetricRecord(metric="otdd", direction=name, value=otdd(first, second, config), count=len(group))
        )
    return records


def pair_records(pairs: Sequence[CounterfactualPair], metrics: Sequence[str]) -> list[MetricRecord]:
    if not pairs:
        raise DatasetError("counterfactual pair set is empty")
    records = []
    groups = _group_by_direction(pairs, lambda p: p.direction)
    selected = []
    if "sensitivity" in metrics:
        selected.append(("sensitivity", mean_sensitivity))
    if "cf-accuracy" in metrics:
        selected.append(("cf_accuracy", counterfactual_accuracy))
    for metric, fn in selected:
        for name, group in groups.items():
            records.append(MetricRecord(metric=metric, direction=name, value=fn(group), count=len(group)))
        records.append(MetricRecord(metric=metric, direction=OVERALL, value=fn(pairs), count=len(pairs)))
    return records
