"""Prompt construction for masked-completion and insertion generation.

Masked mode renders an instruction plus the premise with the chosen span
replaced by the mask token, optionally preceded by in-context demonstrations
in the same template. Insertion mode splits the premise around the span and
appends a natural-language statement of the target label and hypothesis to
the suffix; it uses no in-context examples.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .dataio import iter_records
from .errors import DatasetError
from .spanner import Span
from .types import Direction, Label, NliExample, PromptMode, label_word

MASK_TOKEN = "[blank]"

DEFAULT_MASKED_TEMPLATE = (
    "Fill in the blank so that the conclusion is {label_word}.\n"
    "Premise: {masked_premise}\n"
    "Conclusion: {hypothesis}\n"
    "Answer:"
)

DEFAULT_ICL_RESOURCE = "icl_default.jsonl"


@dataclass(frozen=True)
class IclExample:
    """One in-context demonstration for masked mode."""

    masked_premise: str
    hypothesis: str
    label_word: str
    replacement: str

    def __post_init__(self) -> None:
        if self.masked_premise.count(MASK_TOKEN) != 1:
            raise ValueError(f"demonstration premise must contain exactly one {MASK_TOKEN}")
        if MASK_TOKEN in self.replacement:
            raise ValueError(f"demonstration replacement must not contain {MASK_TOKEN}")


@dataclass(frozen=True)
class PromptRequest:
    """A fully rendered generation request for one (example, span, direction)."""

    mode: PromptMode
    example_id: str
    span: Span
    direction: Direction
    prompt: str | None = None   # masked mode
    prefix: str | None = None   # insertion mode
    suffix: str | None = None
    icl_examples: tuple[IclExample, ...] = ()

    def __post_init__(self) -> None:
        if self.mode is PromptMode.MASKED:
            if self.prompt is None:
                raise ValueError("masked request needs a prompt")
            count = self.prompt.count(MASK_TOKEN)
            if count != 1:
                raise ValueError(f"masked prompt must contain exactly one {MASK_TOKEN}, found {count}")
        else:
            if self.prefix is None or self.suffix is None:
                raise ValueError("insertion request needs prefix and suffix")
            if self.icl_examples:
                raise ValueError("insertion requests take no in-context examples")

    @property
    def cache_key(self) -> str:
        """Stable text identity of the request, independent of metadata."""
        if self.mode is PromptMode.MASKED:
            return self.prompt  # type: ignore[return-value]
        return f"{self.prefix}\x1f{self.suffix}"


def _check_span(example: NliExample, span: Span) -> None:
    if not (0 <= span.start < span.end <= len(example.premise)):
        raise ValueError(
            f"span [{span.start}, {span.end}) out of bounds for premise of length {len(example.premise)}"
        )
    if example.premise[span.start : span.end] != span.text:
        raise ValueError(f"span text {span.text!r} does not match premise at [{span.start}, {span.end})")


def _check_direction(example: NliExample, direction: Direction) -> None:
    if direction.source != example.label:
        raise ValueError(
            f"direction source {direction.source.value} does not match example label {example.label.value}"
        )


def mask_span(premise: str, span: Span) -> str:
    return premise[: span.start] + MASK_TOKEN + premise[span.end :]


def build_masked_prompt(
    example: NliExample,
    span: Span,
    direction: Direction,
    icl: tuple[IclExample, ...] = (),
    template: str = DEFAULT_MASKED_TEMPLATE,
) -> PromptRequest:
    """Render the masked-completion prompt for one span and target label.

    Demonstrations are rendered in the same template with their blank already
    filled, so the query's mask token is the only one in the prompt.
    """
    _check_span(example, span)
    _check_direction(example, direction)
    blocks = []
    for demo in icl:
        filled = demo.masked_premise.replace(MASK_TOKEN, demo.replacement)
        blocks.append(
            template.format(masked_premise=filled, hypothesis=demo.hypothesis, label_word=demo.label_word)
            + " "
            + demo.replacement
        )
    blocks.append(
        template.format(
            masked_premise=mask_span(example.premise, span),
            hypothesis=example.hypothesis,
            label_word=label_word(direction.target),
        )
    )
    return PromptRequest(
        mode=PromptMode.MASKED,
        example_id=example.id,
        span=span,
        direction=direction,
        prompt="\n\n".join(blocks),
        icl_examples=tuple(icl),
    )


def insertion_tail(direction: Direction, hypothesis: str) -> str:
    return f". It is {label_word(direction.target)} that {hypothesis}"


def build_insertion_prompt(example: NliExample, span: Span, direction: Direction) -> PromptRequest:
    """Split the premise around the span; the suffix states the target label."""
    _check_span(example, span)
    _check_direction(example, direction)
    return PromptRequest(
        mode=PromptMode.INSERTION,
        example_id=example.id,
        span=span,
        direction=direction,
        prefix=example.premise[: span.start],
        suffix=example.premise[span.end :] + insertion_tail(direction, example.hypothesis),
    )


def build_prompt(
    example: NliExample,
    span: Span,
    direction: Direction,
    mode: PromptMode,
    icl: tuple[IclExample, ...] = (),
    template: str = DEFAULT_MASKED_TEMPLATE,
) -> PromptRequest:
    if mode is PromptMode.MASKED:
        return build_masked_prompt(example, span, direction, icl=icl, template=template)
    return build_insertion_prompt(example, span, direction)


def load_icl_file(path: str | Path) -> list[IclExample]:
    """Load demonstrations from a dataset-format file with a ``replacement`` field."""
    demos = []
    for line_no, obj in iter_records(path):
        try:
            demos.append(
                IclExample(
                    masked_premise=str(obj["premise"]),
                    hypothesis=str(obj["hypothesis"]),
                    label_word=label_word(Label.parse(str(obj["label"]))),
                    replacement=str(obj["replacement"]),
                )
            )
        except (KeyError, ValueError) as exc:
            raise DatasetError(f"{Path(path)}:{line_no}: bad demonstration record: {exc}") from exc
    return demos


def default_icl_examples(count: int = 4) -> tuple[IclExample, ...]:
    """First ``count`` demonstrations from the curated file shipped with the package."""
    resource = resources.files("cfdistill.data").joinpath(DEFAULT_ICL_RESOURCE)
    with resources.as_file(resource) as path:
        demos = load_icl_file(path)
    return tuple(demos[:count])


def load_template(path: str | Path) -> str:
    """Read a masked-prompt template override ({masked_premise}, {hypothesis}, {label_word})."""
    text = Path(path).read_text(encoding="utf-8")
    for placeholder in ("{masked_premise}", "{hypothesis}", "{label_word}"):
        if placeholder not in text:
            raise DatasetError(f"template {path} missing placeholder {placeholder}")
    return text
