"""Text-generation backends and the per-span overgeneration loop.

Two backends share one interface: a deterministic mock used for tests and
offline runs (completion is a pure function of prompt text, seed, and sample
index), and an HTTP client speaking the completion/insertion API convention
(prompt, suffix, temperature, penalties, n, stop) against a configurable base
URL with bearer-token auth, token-bucket rate limiting, and exponential
backoff on transient failures.
"""

from __future__ import annotations

import json
import logging
import threading
import time
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, Protocol, Sequence

import requests

from .errors import BackendFatalError, TransportError
from .prompts import PromptRequest, build_prompt, DEFAULT_MASKED_TEMPLATE
from .spanner import Span
from .types import Direction, NliExample, PromptMode, normalize_ws, stable_hash

logger = logging.getLogger(__name__)

MOCK_LEXICON_RESOURCE = "mock_lexicon.txt"


@dataclass(frozen=True)
class GenerationParams:
    """Sampling parameters sent with every generation request."""

    temperature: float = 0.8
    frequency_penalty: float = 0.8
    presence_penalty: float = 0.8
    n_samples: int = 1
    max_tokens: int = 24
    stop: tuple[str, ...] = ("\n",)
    seed: int | None = None  # consumed by the mock backend only

    def __post_init__(self) -> None:
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.n_samples < 1:
            raise ValueError("n_samples must be positive")
        if self.max_tokens < 1:
            raise ValueError("max_tokens must be positive")

    def fingerprint(self) -> str:
        payload = json.dumps(
            {
                "temperature": self.temperature,
                "frequency_penalty": self.frequency_penalty,
                "presence_penalty": self.presence_penalty,
                "n_samples": self.n_samples,
                "max_tokens": self.max_tokens,
                "stop": list(self.stop),
                "seed": self.seed,
            },
            sort_keys=True,
        )
        return f"{stable_hash(payload):016x}"


@dataclass(frozen=True)
class CandidatePerturbation:
    """A generated span replacement with provenance, before any filtering."""

    example_id: str
    premise: str
    hypothesis: str
    span: Span
    direction: Direction
    mode: PromptMode
    replacement: str
    new_premise: str
    raw_completion: str
    params_fingerprint: str
    sample_index: int = 0

    def __post_init__(self) -> None:
        expected = normalize_ws(
            self.premise[: self.span.start] + self.replacement + self.premise[self.span.end :]
        )
        if self.new_premise != expected:
            raise ValueError(
                f"candidate for {self.example_id}: new_premise is not the premise with the span replaced"
            )

    @property
    def key(self) -> str:
        return (
            f"{self.example_id}.{self.direction.short_name}."
            f"{self.span.start}-{self.span.end}.{self.mode.value}.{self.sample_index}"
        )

    def to_record(self) -> dict:
        return {
            "example_id": self.example_id,
            "premise": self.premise,
            "hypothesis": self.hypothesis,
            "span_start": self.span.start,
            "span_end": self.span.end,
            "span_text": self.span.text,
            "direction": self.direction.short_name,
            "mode": self.mode.value,
            "replacement": self.replacement,
            "new_premise": self.new_premise,
            "raw_completion": self.raw_completion,
            "params_fingerprint": self.params_fingerprint,
            "sample_index": self.sample_index,
        }

    @classmethod
    def from_record(cls, record: dict) -> "CandidatePerturbation":
        return cls(
            example_id=str(record["example_id"]),
            premise=str(record["premise"]),
            hypothesis=str(record["hypothesis"]),
            span=Span(int(record["span_start"]), int(record["span_end"]), str(record["span_text"])),
            direction=Direction.from_short_name(record["direction"]),
            mode=PromptMode(record["mode"]),
            replacement=str(record["replacement"]),
            new_premise=str(record["new_premise"]),
            raw_completion=str(record["raw_completion"]),
            params_fingerprint=str(record["params_fingerprint"]),
            sample_index=int(record.get("sample_index", 0)),
        )


class Backend(Protocol):
    def complete(self, request: PromptRequest, params: GenerationParams) -> list[str]:
        """Return up to params.n_samples raw completion strings."""
        ...


class RequestLog:
    """Append-only per-attempt log written beside the output file.

    The clock is injectable so mock runs produce byte-identical logs; live
    runs use wall-clock time.
    """

    def __init__(self, path: str | Path, clock: Callable[[], float] = time.time):
        self.path = Path(path)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        self._clock = clock
        self._lock = threading.Lock()
        self._fh = self.path.open("w", encoding="utf-8", newline="\n")

    def log(self, example_id: str, span: Span, attempt: int, status: str) -> None:
        record = {
            "ts": round(self._clock(), 3),
            "example_id": example_id,
            "span_start": span.start,
            "span_end": span.end,
            "attempt": attempt,
            "status": status,
        }
        with self._lock:
            self._fh.write(json.dumps(record, ensure_ascii=False) + "\n")
            self._fh.flush()

    def close(self) -> None:
        with self._lock:
            self._fh.close()


class CounterClock:
    """Deterministic clock: returns 0, 1, 2, ... on successive calls."""

    def __init__(self) -> None:
        self._n = -1
        self._lock = threading.Lock()

    def __call__(self) -> float:
        with self._lock:
            self._n += 1
            return float(self._n)


class TokenBucket:
    """Simple token-bucket rate limiter (tokens per second)."""

    def __init__(
        self,
        rate: float,
        capacity: float | None = None,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if rate <= 0:
            raise ValueError("rate must be positive")
        self.rate = rate
        self.capacity = capacity if capacity is not None else max(1.0, rate)
        self._tokens = self.capacity
        self._clock = clock
        self._sleep = sleep
        self._last = clock()
        self._lock = threading.Lock()

    def acquire(self) -> None:
        while True:
            with self._lock:
                now = self._clock()
                self._tokens = min(self.capacity, self._tokens + (now - self._last) * self.rate)
                self._last = now
                if self._tokens >= 1.0:
                    self._tokens -= 1.0
                    return
                wait = (1.0 - self._tokens) / self.rate
            self._sleep(wait)


def _load_mock_lexicon() -> tuple[str, ...]:
    resource = resources.files("cfdistill.data").joinpath(MOCK_LEXICON_RESOURCE)
    lines = resource.read_text(encoding="utf-8").splitlines()
    return tuple(line.strip() for line in lines if line.strip())


class MockBackend:
    """Deterministic offline backend.

    Each completion is a phrase from a fixture lexicon selected by a stable
    64-bit hash of (prompt text, seed, sample index); two runs with the same
    inputs produce byte-identical output.
    """

    def __init__(self, seed: int = 0, lexicon: Sequence[str] | None = None, request_log: RequestLog | None = None):
        self.seed = seed
        self.lexicon = tuple(lexicon) if lexicon is not None else _load_mock_lexicon()
        if not self.lexicon:
            raise ValueError("mock lexicon is empty")
        self.request_log = request_log

    def complete(self, request: PromptRequest, params: GenerationParams) -> list[str]:
        seed = params.seed if params.seed is not None else self.seed
        completions = []
        for index in range(params.n_samples):
            pick = stable_hash(request.cache_key, str(seed), str(index)) % len(self.lexicon)
            completions.append(self.lexicon[pick])
        if self.request_log is not None:
            self.request_log.log(request.example_id, request.span, attempt=1, status="mock")
        return completions


_RETRYABLE_STATUS = {429, 500, 502, 503, 504}
_FATAL_STATUS = {401, 403}


class HttpBackend:
    """Completion/insertion API client with retries, rate limiting, and logging."""

    def __init__(
        self,
        base_url: str,
        token: str | None = None,
        model: str | None = None,
        extra_headers: dict[str, str] | None = None,
        rate_limit: float = 10.0,
        max_attempts: int = 5,
        backoff_base: float = 1.0,
        backoff_factor: float = 2.0,
        timeout: float = 60.0,
        session: requests.Session | None = None,
        sleep: Callable[[float], None] = time.sleep,
        request_log: RequestLog | None = None,
    ):
        self.base_url = base_url.rstrip("/")
        self.token = token
        self.model = model
        self.extra_headers = dict(extra_headers or {})
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.backoff_factor = backoff_factor
        self.timeout = timeout
        self.session = session or requests.Session()
        self._sleep = sleep
        self._bucket = TokenBucket(rate_limit)
        self.request_log = request_log

    def _headers(self) -> dict[str, str]:
        headers = {"Content-Type": "application/json", **self.extra_headers}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        return headers

    def _payload(self, request: PromptRequest, params: GenerationParams) -> dict:
        payload: dict = {
            "temperature": params.temperature,
            "frequency_penalty": params.frequency_penalty,
            "presence_penalty": params.presence_penalty,
            "n": params.n_samples,
            "max_tokens": params.max_tokens,
            "stop": list(params.stop),
        }
        if self.model:
            payload["model"] = self.model
        if request.mode is PromptMode.MASKED:
            payload["prompt"] = request.prompt
        else:
            payload["prompt"] = request.prefix
            payload["suffix"] = request.suffix
        return payload

    def complete(self, request: PromptRequest, params: GenerationParams) -> list[str]:
        payload = self._payload(request, params)
        last_error = "unknown"
        for attempt in range(1, self.max_attempts + 1):
            self._bucket.acquire()
            try:
                response = self.session.post(
                    self.base_url, json=payload, headers=self._headers(), timeout=self.timeout
                )
                status: int | str = response.status_code
            except requests.RequestException as exc:
                status = f"error:{type(exc).__name__}"
                response = None
            if self.request_log is not None:
                self.request_log.log(request.example_id, request.span, attempt=attempt, status=str(status))
            if response is not None:
                if response.status_code == 200:
                    body = response.json()
                    return [str(choice.get("text", "")) for choice in body.get("choices", [])][: params.n_samples]
                if response.status_code in _FATAL_STATUS:
                    raise BackendFatalError(f"backend rejected credentials (HTTP {response.status_code})")
                if response.status_code not in _RETRYABLE_STATUS:
                    raise BackendFatalError(f"backend returned non-retryable HTTP {response.status_code}")
                last_error = f"HTTP {response.status_code}"
            else:
                last_error = str(status)
            if attempt < self.max_attempts:
                delay = self.backoff_base * self.backoff_factor ** (attempt - 1)
                logger.warning("request for %s failed (%s), retrying in %.1fs", request.example_id, last_error, delay)
                self._sleep(delay)
        raise TransportError(f"backend request failed after {self.max_attempts} attempts: {last_error}")


def generate(request: PromptRequest, params: GenerationParams, backend: Backend) -> list[str]:
    """Issue one generation request; returns up to n_samples completions."""
    return backend.complete(request, params)


def clean_completion(raw: str, stop: Sequence[str]) -> str:
    """Strip stop sequences (truncate at the first occurrence) and trim."""
    text = raw
    for token in stop:
        if token:
            cut = text.find(token)
            if cut != -1:
                text = text[:cut]
    return text.strip()


def overgenerate(
    example: NliExample,
    spans: Sequence[Span],
    direction: Direction,
    mode: PromptMode,
    params: GenerationParams,
    backend: Backend,
    icl: tuple = (),
    template: str = DEFAULT_MASKED_TEMPLATE,
) -> list[CandidatePerturbation]:
    """One request per span; one candidate per non-empty cleaned completion.

    Transient per-span failures are logged and skipped (partial results are
    allowed); fatal backend errors propagate and abort the run.
    """
    fingerprint = params.fingerprint()
    candidates: list[CandidatePerturbation] = []
    for span in spans:
        request = build_prompt(example, span, direction, mode, icl=icl, template=template)
        try:
            completions = generate(request, params, backend)
        except TransportError as exc:
            logger.warning("skipping span [%d, %d) of %s: %s", span.start, span.end, example.id, exc)
            continue
        for index, raw in enumerate(completions):
            replacement = clean_completion(raw, params.stop)
            if not replacement:
                continue
            new_premise = normalize_ws(
                example.premise[: span.start] + replacement + example.premise[span.end :]
            )
            candidates.append(
                CandidatePerturbation(
                    example_id=example.id,
                    premise=example.premise,
                    hypothesis=example.hypothesis,
                    span=span,
                    direction=direction,
                    mode=mode,
                    replacement=replacement,
                    new_premise=new_premise,
                    raw_completion=raw,
                    params_fingerprint=fingerprint,
                    sample_index=index,
                )
            )
    return candidates
