"""Exception hierarchy for the pipeline.

Input and configuration problems map to CLI exit code 1, fatal
backend/scorer conditions to exit code 2.
"""


class PipelineError(Exception):
    """Base class for all pipeline errors."""


class DatasetError(PipelineError):
    """Malformed or inconsistent input data (carries file/line context in the message)."""


class ConfigError(PipelineError):
    """Invalid run configuration."""


class TransportError(PipelineError):
    """A request failed after exhausting retries; the run may continue without it."""


class BackendFatalError(PipelineError):
    """Authentication or quota failure on the generation backend; aborts the run."""


class ScorerUnavailableError(PipelineError):
    """The teacher scorer cannot be reached at all; aborts the filter stage."""


class SizeLimitError(PipelineError):
    """Problem instance exceeds the exact solver's size bound."""
