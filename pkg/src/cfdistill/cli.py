"""Command-line surface: select, generate, filter, augment, eval.

Exit codes: 0 success, 1 input or configuration error, 2 fatal backend or
scorer error. On a fatal error, whatever output was already accumulated is
flushed with a ``.partial`` suffix. Every command echoes its effective
configuration (flag > config file > default) into the output directory.
"""

from __future__ import annotations

import argparse
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import evaluation
from .augment import build_augmented, read_stats, select_ambiguous
from .backend import CandidatePerturbation, CounterClock, RequestLog, overgenerate
from .config import (
    RunConfig,
    chunker_config,
    filter_config,
    generation_params,
    load_config,
    make_backend,
    make_scorer,
)
from .dataio import read_dataset, read_distilled, write_dataset, write_distilled, write_records, iter_records
from .errors import BackendFatalError, ConfigError, DatasetError, PipelineError, ScorerUnavailableError, TransportError
from .filters import FilterContext, RejectReason, accept_score, distill, heuristic_filter, score_candidate
from .prompts import DEFAULT_MASKED_TEMPLATE, default_icl_examples, load_icl_file, load_template
from .report import format_table, render_figures, write_report
from .scorer import CachingScorer, HttpScorer
from .spanner import spans_for_example
from .types import Direction, PromptMode, directions_from, label_word, ALL_LABELS

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_FATAL = 2


def _prepare(args) -> tuple[RunConfig, Path]:
    config = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        config.seed = args.seed
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return config, out_dir


def _finish(config: RunConfig, out_dir: Path, touched_log: bool) -> None:
    config.dump(out_dir / "config.yaml")
    log_path = out_dir / "requests.log"
    if not touched_log and not log_path.exists():
        log_path.write_text("", encoding="utf-8")


def _parse_directions(spec_text: str) -> list[Direction] | None:
    if spec_text.strip().lower() == "all":
        return None
    try:
        return [Direction.from_short_name(part) for part in spec_text.split(",") if part.strip()]
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _icl_and_template(config: RunConfig):
    prompts = config.prompts
    template = load_template(prompts.template_path) if prompts.template_path else DEFAULT_MASKED_TEMPLATE
    if prompts.icl_path:
        icl = tuple(load_icl_file(prompts.icl_path)[: prompts.icl_count])
    else:
        icl = default_icl_examples(prompts.icl_count)
    return icl, template


def cmd_select(args) -> int:
    config, out_dir = _prepare(args)
    if args.fraction is not None:
        config.fraction = args.fraction
    dataset = read_dataset(args.dataset)
    stats = read_stats(args.stats)
    try:
        selected = select_ambiguous(dataset, stats, config.fraction)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    write_dataset(selected, out_dir / "selected.jsonl")
    _finish(config, out_dir, touched_log=False)
    print(f"selected {len(selected)} of {len(dataset)} examples -> {out_dir / 'selected.jsonl'}")
    return EXIT_OK


def cmd_generate(args) -> int:
    config, out_dir = _prepare(args)
    if args.mode is not None:
        config.prompts.mode = args.mode
    if args.backend is not None:
        config.backend.kind = args.backend
    if args.backend_url is not None:
        config.backend.base_url = args.backend_url
    if args.directions is not None:
        config.directions = args.directions
    mode = PromptMode(config.prompts.mode)
    wanted = _parse_directions(config.directions)

    examples = read_dataset(args.dataset)
    clock = CounterClock() if config.backend.kind == "mock" else time.time
    request_log = RequestLog(out_dir / "requests.log", clock=clock)
    backend = make_backend(config, request_log)
    params = generation_params(config)
    chunker = chunker_config(config)
    icl, template = _icl_and_template(config) if mode is PromptMode.MASKED else ((), DEFAULT_MASKED_TEMPLATE)

    units = []
    for example in examples:
        for direction in directions_from(example.label):
            if wanted is None or direction in wanted:
                units.append((example, direction))

    def run_unit(unit) -> list[CandidatePerturbation]:
        example, direction = unit
        spans = spans_for_example(example, chunker)
        return overgenerate(example, spans, direction, mode, params, backend, icl=icl, template=template)

    candidates: list[CandidatePerturbation] = []
    try:
        if config.backend.kind == "http" and config.backend.concurrency > 1:
            with ThreadPoolExecutor(max_workers=config.backend.concurrency) as pool:
                for unit_candidates in pool.map(run_unit, units):
                    candidates.extend(unit_candidates)
        else:
            for unit in units:
                candidates.extend(run_unit(unit))
    except BackendFatalError as exc:
        write_records((c.to_record() for c in candidates), out_dir / "candidates.jsonl.partial")
        request_log.close()
        _finish(config, out_dir, touched_log=True)
        print(f"fatal backend error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    finally:
        request_log.close()

    write_records((c.to_record() for c in candidates), out_dir / "candidates.jsonl")
    _finish(config, out_dir, touched_log=True)
    print(f"generated {len(candidates)} candidates from {len(examples)} examples -> {out_dir / 'candidates.jsonl'}")
    return EXIT_OK


def _filter_context(config: RunConfig) -> FilterContext:
    icl, template = _icl_and_template(config)
    instruction = [template.format(masked_premise="", hypothesis="", label_word="")]
    instruction += [
        template.format(masked_premise="", hypothesis="", label_word=label_word(lab)) for lab in ALL_LABELS
    ]
    instruction += [f"It is {label_word(lab)} that" for lab in ALL_LABELS]
    icl_texts = [demo.masked_premise for demo in icl] + [demo.replacement for demo in icl]
    return FilterContext(instruction_texts=tuple(instruction), icl_texts=tuple(icl_texts))


def cmd_filter(args) -> int:
    config, out_dir = _prepare(args)
    if args.tau is not None:
        config.filters.tau = args.tau
    if args.scorer is not None:
        config.scorer.kind = args.scorer
    if args.scorer_url is not None:
        config.scorer.base_url = args.scorer_url

    candidates = []
    for line_no, obj in iter_records(args.candidates):
        try:
            candidates.append(CandidatePerturbation.from_record(obj))
        except (KeyError, ValueError, TypeError) as exc:
            raise DatasetError(f"{Path(args.candidates)}:{line_no}: bad candidate record: {exc}") from exc

    fcfg = filter_config(config)
    context = _filter_context(config)
    rejections: list[dict] = []
    survivors: list[CandidatePerturbation] = []
    if args.skip_heuristic:
        survivors = candidates
    else:
        for candidate in candidates:
            reason = heuristic_filter(candidate, candidate.hypothesis, context, fcfg)
            if reason is None:
                survivors.append(candidate)
            else:
                rejections.append({"candidate": candidate.key, "stage": "heuristic", "reason": reason.value})

    distilled = []
    errors = 0
    if not args.skip_teacher and survivors:
        scorer = make_scorer(config)
        if isinstance(scorer, HttpScorer):
            try:
                scorer.check_health()
            except ScorerUnavailableError as exc:
                write_distilled(distilled, out_dir / "distilled.jsonl.partial")
                _finish(config, out_dir, touched_log=False)
                print(f"fatal scorer error: {exc}", file=sys.stderr)
                return EXIT_FATAL
        scorer = CachingScorer(scorer)
        for candidate in survivors:
            try:
                score = score_candidate(candidate, candidate.hypothesis, scorer)
            except TransportError as exc:
                errors += 1
                rejections.append({"candidate": candidate.key, "stage": "teacher", "reason": "scorer_error"})
                print(f"scorer error on {candidate.key}: {exc}", file=sys.stderr)
                continue
            verdict = accept_score(score, fcfg.tau, fcfg.require_argmax)
            if verdict is None:
                distilled.append(distill(candidate, score, distilled_id=candidate.key))
            else:
                rejections.append({"candidate": candidate.key, "stage": "teacher", "reason": verdict.value})
    elif args.skip_teacher:
        # keep heuristic survivors as unscored distilled output (delta 0 marker is not
        # meaningful here, so survivors are written as candidates instead)
        write_records((c.to_record() for c in survivors), out_dir / "survivors.jsonl")

    write_distilled(distilled, out_dir / "distilled.jsonl")
    write_records(iter(rejections), out_dir / "rejections.jsonl")
    _finish(config, out_dir, touched_log=False)

    counts: dict[str, int] = {}
    for record in rejections:
        counts[record["reason"]] = counts.get(record["reason"], 0) + 1
    summary = ", ".join(f"{reason}={count}" for reason, count in sorted(counts.items())) or "none"
    print(
        f"kept {len(distilled)} of {len(candidates)} candidates "
        f"({len(rejections)} rejected: {summary}; {errors} scorer errors) -> {out_dir / 'distilled.jsonl'}"
    )
    return EXIT_OK


def cmd_augment(args) -> int:
    config, out_dir = _prepare(args)
    base = read_dataset(args.base)
    subset = read_dataset(args.subset) if args.subset else []
    counterfactuals = read_dataset(args.counterfactuals) if args.counterfactuals else []
    merged = build_augmented(base, subset, counterfactuals)
    total = len(base) + len(subset) + len(counterfactuals)
    write_dataset(merged, out_dir / "train.jsonl")
    _finish(config, out_dir, touched_log=False)
    print(f"merged {total} records into {len(merged)} ({total - len(merged)} duplicates dropped) -> {out_dir / 'train.jsonl'}")
    return EXIT_OK


def cmd_eval(args) -> int:
    config, out_dir = _prepare(args)
    if args.scorer is not None:
        config.scorer.kind = args.scorer
    if args.scorer_url is not None:
        config.scorer.base_url = args.scorer_url
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    unknown = [m for m in metrics if m not in evaluation.EVAL_METRICS]
    if unknown:
        raise ConfigError(f"unknown metrics {unknown}; choose from {list(evaluation.EVAL_METRICS)}")

    distilled = read_distilled(args.distilled) if args.distilled else None
    source_by_id = None
    if args.source:
        source_by_id = {ex.id: ex for ex in read_dataset(args.source)}

    records = []
    if "flip-rate" in metrics:
        if not args.annotations:
            raise ConfigError("metric flip-rate requires --annotations")
        records.extend(evaluation.flip_records(evaluation.read_annotations(args.annotations)))
    if "self-bleu" in metrics:
        if distilled is None:
            raise ConfigError("metric self-bleu requires --distilled")
        records.extend(evaluation.selfbleu_records(distilled))
    if "otdd" in metrics:
        if distilled is None or source_by_id is None:
            raise ConfigError("metric otdd requires --distilled and --source")
        records.extend(evaluation.otdd_records(distilled, source_by_id))
    if "sensitivity" in metrics or "cf-accuracy" in metrics:
        if args.pairs:
            pairs = evaluation.read_pairs(args.pairs, scorer=make_scorer(config))
        else:
            if distilled is None or source_by_id is None:
                raise ConfigError("sensitivity/cf-accuracy require --pairs or --distilled with --source")
            pairs = evaluation.derive_pairs(distilled, source_by_id, make_scorer(config))
        records.extend(evaluation.pair_records(pairs, metrics))

    write_report(records, out_dir / "report.jsonl")
    print(format_table(records))
    if not args.no_figures:
        render_figures(records, out_dir)
    _finish(config, out_dir, touched_log=False)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cfdistill", description="Counterfactual NLI data distillation pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="YAML config file")
        p.add_argument("--seed", type=int, help="seed for all run randomness")
        p.add_argument("--out-dir", required=True, help="output directory")

    p = sub.add_parser("select", help="select the ambiguous subset by cartography variability")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--stats", required=True, help="line records {id, confidence, variability}")
    p.add_argument("--fraction", type=float, help="subset size as a fraction of the dataset")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("generate", help="build prompts per span and overgenerate candidates")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--mode", choices=["masked", "insertion"])
    p.add_argument("--directions", help="'all' or comma-separated short names like E2C,N2E")
    p.add_argument("--backend", choices=["mock", "http"])
    p.add_argument("--backend-url", help="base URL for the http backend")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("filter", help="heuristic pruning then teacher filtering")
    common(p)
    p.add_argument("--candidates", required=True)
    p.add_argument("--scorer", choices=["mock", "http"])
    p.add_argument("--scorer-url", help="base URL for the http scorer")
    p.add_argument("--tau", type=float, help="minimum target-label probability gain")
    p.add_argument("--skip-heuristic", action="store_true")
    p.add_argument("--skip-teacher", action="store_true")
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("augment", help="merge base, subset, and counterfactuals with dedup")
    common(p)
    p.add_argument("--base", required=True)
    p.add_argument("--subset")
    p.add_argument("--counterfactuals")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("eval", help="compute metrics and write the report and figures")
    common(p)
    p.add_argument("--metrics", required=True, help=f"comma-separated subset of {list(evaluation.EVAL_METRICS)}")
    p.add_argument("--distilled")
    p.add_argument("--source")
    p.add_argument("--annotations")
    p.add_argument("--pairs")
    p.add_argument("--scorer", choices=["mock", "http"])
    p.add_argument("--scorer-url")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_eval)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DatasetError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (BackendFatalError, ScorerUnavailableError) as exc:
        print(f"fatal error: {exc}", file=sys.stderr)
        return EXIT_FATAL
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
