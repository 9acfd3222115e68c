"""cfdistill: counterfactual NLI data distillation.

Span-based prompt construction, overgeneration against a pluggable text
generation backend, heuristic and teacher-model filtering, augmentation-set
assembly, and a metrics suite (flip rates, Self-BLEU, optimal transport
dataset distance, counterfactual sensitivity and accuracy).
"""

from .augment import CartographyStats, build_augmented, select_ambiguous
from .backend import CandidatePerturbation, GenerationParams, HttpBackend, MockBackend, generate, overgenerate
from .dataio import read_dataset, read_distilled, write_dataset, write_distilled
from .filters import (
    FilterConfig,
    FilterContext,
    RejectReason,
    TeacherScore,
    heuristic_filter,
    overlap_rate,
    teacher_delta,
    teacher_filter,
)
from .prompts import IclExample, PromptRequest, build_insertion_prompt, build_masked_prompt
from .scorer import CachingScorer, HttpScorer, MockScorer
from .spanner import ChunkerConfig, Span, extract_spans, spans_for_example
from .types import (
    ALL_DIRECTIONS,
    ALL_LABELS,
    Direction,
    DistilledExample,
    Label,
    LabelDistribution,
    NliExample,
    PromptMode,
    Provenance,
    label_word,
    normalize_ws,
    word_label,
)

__version__ = "0.1.0"
