"""
Exception hierarchy shared by every stage of the scoring flow.
"""
from typing import Any, Dict, Optional


class ScoringFlowError(Exception):
    """Base exception for scoring flow errors"""
    exit_code = 1

    def __init__(self, message: str, step: str = "", details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.step = step
        self.details = details or {}
        super().__init__(self.message)


class ValidationError(ScoringFlowError):
    """Raised when input data or parameters fail validation"""
    pass


class ParsingError(ValidationError):
    """Raised when an input line or document cannot be parsed"""
    def __init__(self, message: str, step: str = "parse", details: Optional[Dict[str, Any]] = None,
                 line_number: Optional[int] = None):
        super().__init__(message, step, details)
        self.line_number = line_number
        if line_number is not None:
            self.details.setdefault("line_number", line_number)


class InvalidCoordinateError(ValidationError):
    """Raised for non-finite or out-of-range coordinates"""
    pass


class InvalidParameterError(ValidationError):
    """Raised when a numeric parameter is outside its domain"""
    pass


class EmptyInputError(ValidationError):
    """Raised when an operation needs at least one element"""
    pass


class DuplicateKeyError(ValidationError):
    """Raised when an id occurs twice in one dataset"""
    pass


class GeometryError(ValidationError):
    """Raised for malformed geometries"""
    pass


class ReferentialIntegrityError(ValidationError):
    """Raised when an assignment references an unknown id"""
    pass


class UnreachableOriginError(ValidationError):
    """Raised when a walkhood origin is too far from the street network"""
    pass


class ConfigError(ValidationError):
    """Raised for unknown or invalid configuration values"""
    pass


class InputFileError(ScoringFlowError):
    """Raised when an input file is missing or unreadable"""
    pass


class EmptyResultError(ScoringFlowError):
    """Raised when a run has no usable segments"""
    pass


class DegenerateStatisticsError(ScoringFlowError):
    """Base class for statistics that are undefined on the given data"""
    exit_code = 2


class DegenerateMetricError(DegenerateStatisticsError):
    """Raised when a z-pair metric has a constant fraction"""
    pass


class UndefinedCorrelationError(DegenerateStatisticsError):
    """Raised when a correlation involves a constant series"""
    pass


class InsufficientDataError(DegenerateStatisticsError):
    """Raised when there are too few observations for a statistic"""
    pass


class CollinearityError(DegenerateStatisticsError):
    """Raised when a regression design is rank deficient"""
    pass
