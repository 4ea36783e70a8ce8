"""Exception hierarchy with machine-readable categories.

Every error raised by the library carries a ``category`` string that the CLI
maps to its exit status, so scripted callers can dispatch on failures without
parsing prose.  Categories: ``parse``, ``validation``, ``degenerate-shift``,
``precision``, ``geometry``.
"""


class GenThetaError(Exception):
    """Base class for all library errors."""

    category = "error"


class ParseError(GenThetaError):
    """Malformed input document (schema violation, bad field)."""

    category = "parse"


class ValidationError(GenThetaError):
    """Well-formed input violating a model invariant."""

    category = "validation"


class ChartError(ValidationError):
    """A coordinate at infinity was requested in a finite trivialisation."""


class SizeError(ValidationError):
    """Subset enumeration would exceed the configured term cap."""


class DegenerateShiftError(GenThetaError):
    """Shift parameters put a section zero on top of a special point."""

    category = "degenerate-shift"


class PrecisionError(GenThetaError):
    """Requested tolerance is not achievable within configured limits."""

    category = "precision"


class GeometryError(GenThetaError):
    """Geometric search (zero isolation, contour placement) failed."""

    category = "geometry"


class PoleError(GeometryError):
    """Evaluation requested at a pole of a differential or primitive.

    Carries the singular point so the caller can switch trivialisation chart.
    """

    def __init__(self, message, point=None, index=None):
        super().__init__(message)
        self.point = point
        self.index = index
