"""
Detector Diagnostics
Counters for numerical repairs performed while running a receiver
"""

from dataclasses import asdict, dataclass
from typing import Dict


@dataclass
class DetectorDiagnostics:
    """Per-run counts of numerical repairs; none of them abort a run"""
    psd_repairs: int = 0
    skipped_updates: int = 0
    i0_clamps: int = 0
    u_tilde_fallbacks: int = 0
    overflow_rescales: int = 0

    def merge(self, other: 'DetectorDiagnostics') -> 'DetectorDiagnostics':
        for name, value in asdict(other).items():
            setattr(self, name, getattr(self, name) + value)
        return self

    def to_dict(self) -> Dict[str, int]:
        return asdict(self)

    @property
    def total(self) -> int:
        return sum(asdict(self).values())
