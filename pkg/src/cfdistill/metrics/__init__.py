"""Quality and diversity measurements for distilled counterfactual data."""

from .embed import DEFAULT_DIM, embed_text, embed_texts
from .flips import FlipAnnotation, flip_rate, soft_flip_rate
from .ot import EXACT_SIZE_LIMIT, SinkhornResult, exact_ot, sinkhorn_ot
from .otdd import EmbeddedDataset, OtddConfig, label_distances, otdd, squared_distances
from .selfbleu import self_bleu, sentence_bleu
from .sensitivity import CounterfactualPair, counterfactual_accuracy, mean_sensitivity, sensitivity

__all__ = [
    "DEFAULT_DIM",
    "EXACT_SIZE_LIMIT",
    "CounterfactualPair",
    "EmbeddedDataset",
    "FlipAnnotation",
    "OtddConfig",
    "SinkhornResult",
    "counterfactual_accuracy",
    "embed_text",
    "embed_texts",
    "exact_ot",
    "flip_rate",
    "label_distances",
    "mean_sensitivity",
    "otdd",
    "self_bleu",
    "sensitivity",
    "sentence_bleu",
    "sinkhorn_ot",
    "soft_flip_rate",
    "squared_distances",
]
