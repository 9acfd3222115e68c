"""Run configuration: defaults, YAML file loading, and CLI overrides.

Precedence is CLI flag > config file > built-in default. The effective
configuration of every command is echoed into the output directory so a run
can be reproduced from its artifacts alone.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field, fields
from pathlib import Path

import yaml

from .backend import Backend, GenerationParams, HttpBackend, MockBackend, RequestLog
from .errors import ConfigError
from .filters import DEFAULT_NEGATION_WORDS, FilterConfig
from .scorer import HttpScorer, MockScorer, Scorer
from .spanner import ChunkerConfig, DEFAULT_FUNCTION_WORDS

DEFAULT_TOKEN_ENV = "CFDISTILL_API_TOKEN"


@dataclass
class BackendSettings:
    kind: str = "mock"            # "mock" or "http"
    base_url: str | None = None
    token_env: str = DEFAULT_TOKEN_ENV
    model: str | None = None
    rate_limit: float = 10.0      # requests per second
    concurrency: int = 4
    max_attempts: int = 5
    backoff_base: float = 1.0
    backoff_factor: float = 2.0
    timeout: float = 60.0


@dataclass
class ScorerSettings:
    kind: str = "mock"            # "mock" or "http"
    base_url: str | None = None
    batch_size: int = 8
    max_attempts: int = 5
    backoff_base: float = 1.0
    backoff_factor: float = 2.0
    timeout: float = 60.0


@dataclass
class GenerationSettings:
    temperature: float = 0.8
    frequency_penalty: float = 0.8
    presence_penalty: float = 0.8
    n_samples: int = 1
    max_tokens: int = 24
    stop: list[str] = field(default_factory=lambda: ["\n"])


@dataclass
class FilterSettings:
    tau: float = 0.5
    require_argmax: bool = True
    ngram_window: int = 4
    overlap_threshold: float = 0.8
    negation_words: list[str] = field(default_factory=lambda: sorted(DEFAULT_NEGATION_WORDS))


@dataclass
class ChunkerSettings:
    function_words: list[str] = field(default_factory=lambda: sorted(DEFAULT_FUNCTION_WORDS))
    merge_below: int = 2
    max_tokens: int = 8


@dataclass
class PromptSettings:
    mode: str = "masked"          # "masked" or "insertion"
    template_path: str | None = None
    icl_path: str | None = None
    icl_count: int = 4


@dataclass
class RunConfig:
    seed: int = 0
    fraction: float = 1.0 / 3.0   # ambiguous-subset size as a fraction of the dataset
    directions: str = "all"       # "all" or comma-separated short names (E2C,...)
    backend: BackendSettings = field(default_factory=BackendSettings)
    scorer: ScorerSettings = field(default_factory=ScorerSettings)
    generation: GenerationSettings = field(default_factory=GenerationSettings)
    filters: FilterSettings = field(default_factory=FilterSettings)
    chunker: ChunkerSettings = field(default_factory=ChunkerSettings)
    prompts: PromptSettings = field(default_factory=PromptSettings)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def dump(self, path: str | Path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(yaml.safe_dump(self.to_dict(), sort_keys=False), encoding="utf-8")


def _merge_section(instance, data: dict, section: str):
    valid = {f.name for f in fields(instance)}
    for key, value in data.items():
        if key not in valid:
            raise ConfigError(f"unknown key {key!r} in config section {section!r}")
        setattr(instance, key, value)
    return instance


def config_from_dict(data: dict) -> RunConfig:
    config = RunConfig()
    sections = {f.name: f for f in fields(RunConfig)}
    for key, value in data.items():
        if key not in sections:
            raise ConfigError(f"unknown config key {key!r}")
        current = getattr(config, key)
        if dataclasses.is_dataclass(current):
            if not isinstance(value, dict):
                raise ConfigError(f"config section {key!r} must be a mapping")
            _merge_section(current, value, key)
        else:
            setattr(config, key, value)
    return config


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file does not exist: {path}")
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config file {path} must hold a mapping at top level")
    return config_from_dict(data)


def generation_params(config: RunConfig) -> GenerationParams:
    gen = config.generation
    return GenerationParams(
        temperature=gen.temperature,
        frequency_penalty=gen.frequency_penalty,
        presence_penalty=gen.presence_penalty,
        n_samples=gen.n_samples,
        max_tokens=gen.max_tokens,
        stop=tuple(gen.stop),
        seed=config.seed,
    )


def filter_config(config: RunConfig) -> FilterConfig:
    f = config.filters
    return FilterConfig(
        ngram_window=f.ngram_window,
        overlap_threshold=f.overlap_threshold,
        negation_words=frozenset(f.negation_words),
        tau=f.tau,
        require_argmax=f.require_argmax,
    )


def chunker_config(config: RunConfig) -> ChunkerConfig:
    c = config.chunker
    return ChunkerConfig(
        function_words=frozenset(c.function_words),
        merge_below=c.merge_below,
        max_tokens=c.max_tokens,
    )


def make_backend(config: RunConfig, request_log: RequestLog | None = None) -> Backend:
    b = config.backend
    if b.kind == "mock":
        return MockBackend(seed=config.seed, request_log=request_log)
    if b.kind == "http":
        if not b.base_url:
            raise ConfigError("backend.base_url is required for the http backend")
        return HttpBackend(
            base_url=b.base_url,
            token=os.environ.get(b.token_env),
            model=b.model,
            rate_limit=b.rate_limit,
            max_attempts=b.max_attempts,
            backoff_base=b.backoff_base,
            backoff_factor=b.backoff_factor,
            timeout=b.timeout,
            request_log=request_log,
        )
    raise ConfigError(f"unknown backend kind {b.kind!r} (expected 'mock' or 'http')")


def make_scorer(config: RunConfig) -> Scorer:
    s = config.scorer
    if s.kind == "mock":
        return MockScorer(seed=config.seed)
    if s.kind == "http":
        if not s.base_url:
            raise ConfigError("scorer.base_url is required for the http scorer")
        return HttpScorer(
            base_url=s.base_url,
            batch_size=s.batch_size,
            max_attempts=s.max_attempts,
            backoff_base=s.backoff_base,
            backoff_factor=s.backoff_factor,
            timeout=s.timeout,
        )
    raise ConfigError(f"unknown scorer kind {s.kind!r} (expected 'mock' or 'http')")
