"""
Sweep Results
Error counters, Wilson confidence intervals, result rows and their CSV and
metadata serialization.
"""

import csv
import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Tuple, Union

from loguru import logger
from scipy.stats import norm

from phasenoise.errors import DomainError


def wilson_interval(errors: int, trials: int, confidence: float = 0.95) -> Tuple[float, float]:
    """
    Wilson score interval of a binomial proportion

    Returns (0, 1) when there are no trials.
    """
    if errors < 0 or trials < 0 or errors > trials:
        raise DomainError(f"Need 0 <= errors <= trials, got errors={errors}, trials={trials}")
    if not 0.0 < confidence < 1.0:
        raise DomainError(f"confidence must lie in (0, 1), got {confidence}")
    if trials == 0:
        return 0.0, 1.0
    z = float(norm.ppf(0.5 + confidence / 2.0))
    p = errors / trials
    denominator = 1.0 + z * z / trials
    centre = (p + z * z / (2.0 * trials)) / denominator
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials)) / denominator
    return max(0.0, centre - half), min(1.0, centre + half)


@dataclass
class ErrorCounts:
    """Trials and errors accumulated over frames; pilots are never counted"""
    bits: int = 0
    bit_errors: int = 0
    symbols: int = 0
    symbol_errors: int = 0
    frames: int = 0
    frame_errors: int = 0

    def add(self, other: 'ErrorCounts') -> 'ErrorCounts':
        for name in ('bits', 'bit_errors', 'symbols', 'symbol_errors', 'frames', 'frame_errors'):
            setattr(self, name, getattr(self, name) + getattr(other, name))
        return self


@dataclass
class ResultRow:
    """
    One (detector, E_b/N_0) point of a sweep

    Rates carry 95% Wilson intervals. status is 'ok' or 'failed'; partial marks
    a point cut short by an interrupt.
    """
    detector: str
    ebn0_db: float
    bits: int
    bit_errors: int
    symbols: int
    symbol_errors: int
    frames: int
    frame_errors: int
    ber: float
    ber_low: float
    ber_high: float
    ser: float
    ser_low: float
    ser_high: float
    fer: float
    fer_low: float
    fer_high: float
    status: str = 'ok'
    partial: bool = False

    @classmethod
    def from_counts(
        cls,
        detector: str,
        ebn0_db: float,
        counts: ErrorCounts,
        status: str = 'ok',
        partial: bool = False,
    ) -> 'ResultRow':
        def rate(errors: int, trials: int) -> Tuple[float, float, float]:
            low, high = wilson_interval(errors, trials)
            return (errors / trials if trials else 0.0), low, high

        ber = rate(counts.bit_errors, counts.bits)
        ser = rate(counts.symbol_errors, counts.symbols)
        fer = rate(counts.frame_errors, counts.frames)
        return cls(
            detector, float(ebn0_db),
            counts.bits, counts.bit_errors, counts.symbols, counts.symbol_errors,
            counts.frames, counts.frame_errors,
            *ber, *ser, *fer,
            status=status, partial=partial,
        )

    @classmethod
    def failed(cls, detector: str, ebn0_db: float) -> 'ResultRow':
        return cls.from_counts(detector, ebn0_db, ErrorCounts(), status='failed')

    @classmethod
    def columns(cls) -> List[str]:
        return [f.name for f in fields(cls)]

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def csv_values(self) -> List[str]:
        values = []
        for value in asdict(self).values():
            if isinstance(value, bool):
                values.append('true' if value else 'false')
            elif isinstance(value, float):
                values.append(repr(value))
            else:
                values.append(str(value))
        return values


@dataclass
class SweepResult:
    """Rows of a sweep plus the metadata echoed into the sidecar file"""
    rows: List[ResultRow] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def sorted_rows(self) -> List[ResultRow]:
        return sorted(self.rows, key=lambda row: (row.detector, row.ebn0_db))

    def row(self, detector: str, ebn0_db: float) -> ResultRow:
        for row in self.rows:
            if row.detector == detector and row.ebn0_db == float(ebn0_db):
                return row
        raise KeyError(f"No row for {detector} at {ebn0_db} dB")

    def write_csv(self, path: Union[str, Path]) -> Path:
        """Rows sorted by (detector, E_b/N_0); content depends only on config and seed"""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w', newline='') as handle:
            writer = csv.writer(handle, lineterminator='\n')
            writer.writerow(ResultRow.columns())
            for row in self.sorted_rows():
                writer.writerow(row.csv_values())
        logger.info(f"Wrote {len(self.rows)} row(s) to {path}")
        return path

    def write_metadata(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.metadata, indent=2, sort_keys=True, default=str) + '\n')
        logger.info(f"Wrote metadata to {path}")
        return path

    @staticmethod
    def metadata_path(csv_path: Union[str, Path]) -> Path:
        csv_path = Path(csv_path)
        return csv_path.with_name(csv_path.stem + '.meta.json')
