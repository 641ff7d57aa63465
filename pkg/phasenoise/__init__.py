"""
Phase Noise
Joint phase estimation and data detection for MIMO links with Wiener
oscillator phase noise
"""

from phasenoise.errors import (
    AlistParseError,
    ConfigError,
    DomainError,
    FrameLayoutError,
    NumericalError,
    PhaseNoiseError,
    UnsupportedOperationError,
)

__version__ = '1.0.0'

__all__ = [
    'AlistParseError',
    'ConfigError',
    'DomainError',
    'FrameLayoutError',
    'NumericalError',
    'PhaseNoiseError',
    'UnsupportedOperationError',
    '__version__',
]
