"""Self-BLEU corpus diversity.

For each sentence, BLEU is computed against all other sentences as the
reference set (uniform n-gram weights up to ``max_n``, brevity penalty,
additive-epsilon smoothing so zero-match precisions do not collapse the
geometric mean), and the corpus score is the mean. Lower means more diverse.
"""

from __future__ import annotations

import math
from collections import Counter
from typing import Sequence

SMOOTHING_EPS = 1e-9


def _tokenize(sentence: str) -> list[str]:
    return sentence.split()


def _ngram_counts(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def sentence_bleu(
    candidate: str,
    references: Sequence[str],
    max_n: int = 4,
    eps: float = SMOOTHING_EPS,
) -> float:
    """BLEU of one sentence against a reference set.

    Modified n-gram precision clips by the maximum reference count; the
    effective reference length is the one closest to the candidate length
    (shorter wins ties).
    """
    if not references:
        raise ValueError("reference set must be non-empty")
    cand = _tokenize(candidate)
    refs = [_tokenize(r) for r in references]
    if not cand:
        return 0.0

    log_precision_sum = 0.0
    for n in range(1, max_n + 1):
        cand_counts = _ngram_counts(cand, n)
        total = sum(cand_counts.values())
        max_ref_counts: Counter = Counter()
        for ref in refs:
            for gram, count in _ngram_counts(ref, n).items():
                if count > max_ref_counts[gram]:
                    max_ref_counts[gram] = count
        matches = sum(min(count, max_ref_counts[gram]) for gram, count in cand_counts.items())
        log_precision_sum += math.log((matches + eps) / (total + eps))

    ref_len = min((len(r) for r in refs), key=lambda rl: (abs(rl - len(cand)), rl))
    brevity = 1.0 if len(cand) >= ref_len else math.exp(1.0 - ref_len / len(cand))
    return brevity * math.exp(log_precision_sum / max_n)


def self_bleu(corpus: Sequence[str], max_n: int = 4) -> float:
    """Mean BLEU of every sentence against all the others."""
    if len(corpus) < 2:
        raise ValueError("self-BLEU needs a corpus of at least 2 sentences")
    if not (1 <= max_n <= 4):
        raise ValueError("max_n must lie in 1..4")
    total = 0.0
    for i, sentence in enumerate(corpus):
        references = [s for j, s in enumerate(corpus) if j != i]
        total += sentence_bleu(sentence, references, max_n=max_n)
    return total / len(corpus)
