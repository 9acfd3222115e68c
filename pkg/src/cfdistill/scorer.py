"""Teacher scorer clients.

The wire protocol is shared with the standalone scorer service:
POST /score with {"pairs": [{"premise": ..., "hypothesis": ...}, ...]}
returns {"distributions": [{"entailment": p, "neutral": p, "contradiction": p}, ...]}
in request order; GET /health returns 200 when the service is up.

A deterministic mock scorer (rule table keyed by a stable hash of the pair)
ships for tests and offline runs.
"""

from __future__ import annotations

import logging
import math
import time
from typing import Callable, Protocol, Sequence

import requests

from .errors import ScorerUnavailableError, TransportError
from .types import Label, LabelDistribution, ALL_LABELS, stable_hash

logger = logging.getLogger(__name__)


class Scorer(Protocol):
    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[LabelDistribution]:
        """Label distributions for (premise, hypothesis) pairs, in request order."""
        ...


class MockScorer:
    """Pure function of (premise, hypothesis, seed): a pseudo-random point on
    the probability simplex, identical across runs and platforms."""

    def __init__(self, seed: int = 0):
        self.seed = seed

    def _distribution(self, premise: str, hypothesis: str) -> LabelDistribution:
        weights = []
        for lab in ALL_LABELS:
            h = stable_hash(premise, hypothesis, str(self.seed), lab.value)
            u = (h % (2**53)) / float(2**53)
            weights.append(-math.log(max(u, 1e-16)))
        total = sum(weights)
        return LabelDistribution({lab: w / total for lab, w in zip(ALL_LABELS, weights)})

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[LabelDistribution]:
        return [self._distribution(p, h) for p, h in pairs]


class HttpScorer:
    """Client for a scorer service; batches requests and retries transient failures."""

    def __init__(
        self,
        base_url: str,
        batch_size: int = 8,
        max_attempts: int = 5,
        backoff_base: float = 1.0,
        backoff_factor: float = 2.0,
        timeout: float = 60.0,
        session: requests.Session | None = None,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.base_url = base_url.rstrip("/")
        self.batch_size = batch_size
        self.max_attempts = max_attempts
        self.backoff_base = backoff_base
        self.backoff_factor = backoff_factor
        self.timeout = timeout
        self.session = session or requests.Session()
        self._sleep = sleep

    def check_health(self) -> None:
        try:
            response = self.session.get(f"{self.base_url}/health", timeout=self.timeout)
        except requests.RequestException as exc:
            raise ScorerUnavailableError(f"scorer at {self.base_url} unreachable: {exc}") from exc
        if response.status_code != 200:
            raise ScorerUnavailableError(f"scorer health check failed: HTTP {response.status_code}")

    def _post_batch(self, pairs: Sequence[tuple[str, str]]) -> list[LabelDistribution]:
        payload = {"pairs": [{"premise": p, "hypothesis": h} for p, h in pairs]}
        last_error = "unknown"
        for attempt in range(1, self.max_attempts + 1):
            try:
                response = self.session.post(f"{self.base_url}/score", json=payload, timeout=self.timeout)
                if response.status_code == 200:
                    body = response.json()
                    distributions = [LabelDistribution.from_record(d) for d in body["distributions"]]
                    if len(distributions) != len(pairs):
                        raise TransportError(
                            f"scorer returned {len(distributions)} distributions for {len(pairs)} pairs"
                        )
                    return distributions
                last_error = f"HTTP {response.status_code}"
                if 400 <= response.status_code < 500 and response.status_code != 429:
                    raise TransportError(f"scorer rejected request: {last_error}")
            except requests.RequestException as exc:
                last_error = f"{type(exc).__name__}: {exc}"
            if attempt < self.max_attempts:
                self._sleep(self.backoff_base * self.backoff_factor ** (attempt - 1))
        raise TransportError(f"scorer request failed after {self.max_attempts} attempts: {last_error}")

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[LabelDistribution]:
        out: list[LabelDistribution] = []
        for start in range(0, len(pairs), self.batch_size):
            out.extend(self._post_batch(pairs[start : start + self.batch_size]))
        return out


class CachingScorer:
    """Wrapper that memoizes per-pair scores within a run (the original
    premise pair repeats once per candidate)."""

    def __init__(self, inner: Scorer):
        self.inner = inner
        self._cache: dict[tuple[str, str], LabelDistribution] = {}

    def score_batch(self, pairs: Sequence[tuple[str, str]]) -> list[LabelDistribution]:
        todo = [pair for pair in dict.fromkeys(pairs) if pair not in self._cache]
        if todo:
            for pair, dist in zip(todo, self.inner.score_batch(todo)):
                self._cache[pair] = dist
        return [self._cache[pair] for pair in pairs]
