"""Exception types shared across the pipeline."""


class PipelineError(Exception):
    """Base class for all toolchain errors."""


class ParseError(PipelineError):
    """Input file is malformed for the declared format."""


class SpanValidationError(PipelineError):
    """An answer span does not slice to its answer text."""

    def __init__(self, record_id: str, message: str):
        super().__init__(f"record {record_id}: {message}")
        self.record_id = record_id


class DegenerateScores(PipelineError):
    """Score set too small or too uniform for mixture fitting."""


class EmptyGraphError(PipelineError):
    """Graph construction was asked to run on zero triples."""


class ConfigError(PipelineError):
    """Invalid pipeline configuration."""


class AdapterError(PipelineError):
    """Base class for adapter transport failures."""


class AdapterTimeout(AdapterError):
    """The sidecar did not answer within the deadline."""


class AdapterProtocolError(AdapterError):
    """Malformed response or request/response id mismatch."""


class AdapterTransportError(AdapterError):
    """Connection or process-level failure while talking to the sidecar."""


class AlignmentError(PipelineError):
    """Prediction/gold question ids do not line up."""

    def __init__(self, missing_ids):
        self.missing_ids = list(missing_ids)
        super().__init__(f"unaligned question ids: {self.missing_ids[:20]}")
