"""
Error Hierarchy
Exceptions raised by the phase-noise receiver library
"""

from typing import Optional


class PhaseNoiseError(Exception):
    """Base class for every error raised by the library"""


class DomainError(PhaseNoiseError, ValueError):
    """Numeric input outside the domain of an operation"""


class NumericalError(PhaseNoiseError, ArithmeticError):
    """
    Non-finite intermediate value inside a recursion

    Attributes:
        frame_index: Index of the frame being processed, if known
        step: Time index k at which the value appeared, if known
    """

    def __init__(self, message: str, frame_index: Optional[int] = None, step: Optional[int] = None):
        self.frame_index = frame_index
        self.step = step
        location = []
        if frame_index is not None:
            location.append(f"frame {frame_index}")
        if step is not None:
            location.append(f"k={step}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)


class FrameLayoutError(PhaseNoiseError, ValueError):
    """Bit counts or array dimensions inconsistent with the frame layout"""


class AlistParseError(PhaseNoiseError, ValueError):
    """Malformed alist text; carries the 1-indexed offending line"""

    def __init__(self, message: str, line_number: int):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


class ConfigError(PhaseNoiseError, ValueError):
    """Invalid simulation configuration"""


class UnsupportedOperationError(PhaseNoiseError):
    """Requested operation is outside the supported size range"""
