"""Exception types shared across the pipeline.

Validation problems (bad parameters, broken invariants, schema mismatches)
map to CLI exit code 1; I/O failures (plain OSError) map to exit code 2.
"""


class TubeSynthError(Exception):
    """Base class for all pipeline errors."""


class ValidationError(TubeSynthError):
    """Input violates a documented constraint."""


class EmptySupportError(ValidationError):
    """A projection with no positive values cannot be sampled."""


class OutOfBoundsError(ValidationError):
    """Geometry would leave the image canvas."""


class SchemaError(ValidationError):
    """A metadata table is missing required columns."""


class ShortfallError(ValidationError):
    """Not enough eligible source cases for the requested counts."""


class LandmarkExtractionError(TubeSynthError):
    """Clavicle mask unusable for landmark extraction.

    Carries the source case id so the caller can skip and log the case.
    """

    def __init__(self, source_id: str, reason: str):
        self.source_id = source_id
        self.reason = reason
        super().__init__(f"{source_id}: {reason}")
