from __future__ import annotations


class QuasiStateError(Exception):
    """Base class for every failure raised by the pipeline."""

    stage: str = "pipeline"


class ParseError(QuasiStateError, ValueError):
    stage = "parse"


class ParameterError(QuasiStateError, ValueError):
    stage = "parameters"


class DomainError(QuasiStateError, ValueError):
    stage = "geometry"


class SamplingError(DomainError):
    stage = "sample"

    def __init__(self, vertex: int, message: str) -> None:
        super().__init__(f"vertex {vertex}: {message}")
        self.vertex = vertex


class SpectrumError(ParameterError):
    """Raised when 1/2 lies in the spectrum of a node-supported measure."""

    stage = "spectrum"


class InvariantViolation(QuasiStateError, RuntimeError):
    stage = "invariant"


class ResourceLimitError(QuasiStateError, RuntimeError):
    stage = "resources"
