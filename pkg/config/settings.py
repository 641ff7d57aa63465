"""
Simulation Configuration Settings
Centralized configuration for the phase-noise link simulator: process-level
runtime settings, experiment configs and the named experiment presets.
"""

import hashlib
import json
import math
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import yaml
from dotenv import load_dotenv

from phasenoise.channel import CONSTELLATIONS, PilotPattern
from phasenoise.detectors.base_detector import DetectorKind, DetectorSettings
from phasenoise.detectors.gauss_map import GAUSS_CROSS_TERM_MODES
from phasenoise.errors import ConfigError
from phasenoise.spa import CROSS_TERM_MODES

load_dotenv()

CHANNEL_MODES = ('unit', 'rayleigh-known')


@dataclass
class RuntimeSettings:
    """Process-level knobs, read from the environment (and an optional .env)"""
    log_level: str = field(default_factory=lambda: os.getenv('PHASENOISE_LOG_LEVEL', 'INFO').upper())
    reports_dir: str = field(default_factory=lambda: os.getenv('PHASENOISE_REPORTS_DIR', './reports'))
    codes_dir: str = field(default_factory=lambda: os.getenv('PHASENOISE_CODES_DIR', './data/codes'))
    threads: int = field(default_factory=lambda: int(os.getenv('PHASENOISE_THREADS', '1')))
    log_file: Optional[str] = field(default_factory=lambda: os.getenv('PHASENOISE_LOG_FILE') or None)

    def __post_init__(self):
        if self.threads < 1:
            raise ConfigError(f"PHASENOISE_THREADS must be at least 1, got {self.threads}")


@dataclass
class SimConfig:
    """
    One experiment: link geometry, phase noise, sweep grid, receivers, stop rules

    Angles are in degrees, E_b/N_0 in dB. Every field is echoed into the
    metadata sidecar of a sweep.
    """
    name: str = 'custom'
    n_tx: int = 2
    n_rx: int = 2
    constellation: str = 'bpsk'
    pilots: Union[str, Dict[str, int]] = '1/20'
    frame_length: int = 1000
    sigma_t_deg: float = 4.0
    sigma_r_deg: float = 4.0
    ebn0_db: List[float] = field(default_factory=lambda: [2.0, 4.0, 6.0, 8.0, 10.0])
    detectors: List[str] = field(default_factory=lambda: ['spa-map', 'euc-map'])
    channel: str = 'unit'

    # Coded mode
    coded: bool = False
    code: Optional[str] = None
    n_global: int = 2
    coded_inner_iters: int = 2
    bp_max_iters: int = 50
    interleaver_seed: int = 7

    # Receivers
    n_iters: int = 2
    cross_term: str = 'projected'
    gauss_cross_term: str = 'projected'
    strict_vb: bool = False
    genie_phases: bool = False

    # Stop rules
    min_bit_errors: int = 2000
    min_frame_errors: int = 200
    min_frames: int = 0
    max_frames: int = 2000
    batch_frames: int = 20

    # Reproducibility
    seed: int = 1
    pilot_seed: int = 0x5EED_0F_A11

    def __post_init__(self):
        if self.n_tx < 1 or self.n_rx < 1:
            raise ConfigError(f"Antenna counts must be positive, got {self.n_tx}x{self.n_rx}")
        if self.constellation.lower() not in CONSTELLATIONS:
            raise ConfigError(f"Unknown constellation '{self.constellation}'. Available: {sorted(CONSTELLATIONS)}")
        try:
            PilotPattern.parse(self.pilots)
        except TypeError as exc:
            raise ConfigError(f"Invalid pilot layout {self.pilots!r}: {exc}") from exc
        if self.frame_length < 1:
            raise ConfigError(f"frame_length must be positive, got {self.frame_length}")
        if self.sigma_t_deg < 0 or self.sigma_r_deg < 0:
            raise ConfigError("Phase-noise standard deviations must be nonnegative")
        if not self.ebn0_db:
            raise ConfigError("ebn0_db grid is empty")
        self.ebn0_db = [float(x) for x in self.ebn0_db]
        if not self.detectors:
            raise ConfigError("At least one detector is required")
        for name in self.detectors:
            DetectorKind.from_name(name)
        if self.channel not in CHANNEL_MODES:
            raise ConfigError(f"channel must be one of {CHANNEL_MODES}, got '{self.channel}'")
        if self.coded and not self.code:
            raise ConfigError("Coded mode needs a code (alist path or standard code name)")
        if self.cross_term not in CROSS_TERM_MODES:
            raise ConfigError(f"cross_term must be one of {CROSS_TERM_MODES}, got '{self.cross_term}'")
        if self.gauss_cross_term not in GAUSS_CROSS_TERM_MODES:
            raise ConfigError(f"gauss_cross_term must be one of {GAUSS_CROSS_TERM_MODES}, got '{self.gauss_cross_term}'")
        for label in ('n_global', 'coded_inner_iters', 'bp_max_iters', 'n_iters', 'max_frames', 'batch_frames'):
            if getattr(self, label) < 1:
                raise ConfigError(f"{label} must be at least 1, got {getattr(self, label)}")
        if self.min_frames > self.max_frames:
            raise ConfigError(f"min_frames ({self.min_frames}) exceeds max_frames ({self.max_frames})")

    @property
    def pilot_pattern(self) -> PilotPattern:
        return PilotPattern.parse(self.pilots)

    @property
    def sigma2_t(self) -> float:
        return math.radians(self.sigma_t_deg) ** 2

    @property
    def sigma2_r(self) -> float:
        return math.radians(self.sigma_r_deg) ** 2

    def detector_settings(self) -> DetectorSettings:
        """Receiver switches; coded runs use coded_inner_iters smoother passes per global round"""
        return DetectorSettings(
            sigma2_t=self.sigma2_t,
            sigma2_r=self.sigma2_r,
            n_iters=self.coded_inner_iters if self.coded else self.n_iters,
            cross_term=self.cross_term,
            gauss_cross_term=self.gauss_cross_term,
            strict_vb=self.strict_vb,
            genie_phases=self.genie_phases,
        )

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def config_hash(self) -> str:
        """SHA-256 of the canonical JSON dump"""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(',', ':'))
        return hashlib.sha256(canonical.encode()).hexdigest()

    def replace(self, **changes: Any) -> 'SimConfig':
        values = self.to_dict()
        values.update({key: value for key, value in changes.items() if value is not None})
        return SimConfig.from_dict(values)

    @classmethod
    def from_dict(cls, values: Dict[str, Any]) -> 'SimConfig':
        if not isinstance(values, dict):
            raise ConfigError(f"Configuration must be a mapping, got {type(values).__name__}")
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(f"Unknown configuration keys: {unknown}")
        try:
            return cls(**values)
        except TypeError as exc:
            raise ConfigError(f"Invalid configuration: {exc}") from exc

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> 'SimConfig':
        """Load a YAML or JSON config (JSON is valid YAML)"""
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"Config file not found: {path}")
        try:
            values = yaml.safe_load(path.read_text())
        except yaml.YAMLError as exc:
            raise ConfigError(f"Cannot parse {path}: {exc}") from exc
        return cls.from_dict(values or {})


class SimPresets:
    """Named experiment scenarios"""

    COHERENT_BASELINE = {
        'name': 'coherent-baseline',
        'n_tx': 1, 'n_rx': 1, 'constellation': 'bpsk', 'pilots': 'preamble-only',
        'sigma_t_deg': 0.0, 'sigma_r_deg': 0.0, 'ebn0_db': [4.0, 6.0, 8.0],
        'detectors': ['euc-map'], 'genie_phases': True, 'n_iters': 1,
        'min_frames': 1000, 'max_frames': 1000,
    }

    UNCODED_2X2 = {
        'name': 'uncoded-2x2',
        'n_tx': 2, 'n_rx': 2, 'constellation': 'bpsk', 'pilots': '1/20',
        'channel': 'rayleigh-known', 'ebn0_db': [2.0, 4.0, 6.0, 8.0, 10.0],
        'detectors': ['genie-spa-map', 'spa-map', 'gauss-map', 'vb-map', 'euc-map'],
    }

    UNCODED_4X4 = dict(UNCODED_2X2, name='uncoded-4x4', n_tx=4, n_rx=4)

    CODED_PILOTS_1_20 = {
        'name': 'coded-pilots-1-20',
        'n_tx': 2, 'n_rx': 1, 'constellation': 'bpsk', 'pilots': '1/20',
        'channel': 'rayleigh-known', 'ebn0_db': [2.0, 3.0, 4.0, 5.0],
        'detectors': ['genie-spa-map', 'spa-map', 'gauss-map', 'vb-map', 'euc-map'],
        'coded': True, 'code': 'regular-3-6-n2000',
        'min_bit_errors': 10**9, 'min_frame_errors': 100, 'max_frames': 1000,
    }

    CODED_PILOTS_5_100 = dict(CODED_PILOTS_1_20, name='coded-pilots-5-100', pilots='5/100')

    CODED_RATE_4_5 = dict(
        CODED_PILOTS_1_20, name='coded-rate-4-5', code='regular-3-15-n2000', ebn0_db=[5.0, 6.0, 7.0, 8.0],
    )

    UNCODED_16QAM = {
        'name': 'uncoded-16qam',
        'n_tx': 2, 'n_rx': 1, 'constellation': '16qam', 'pilots': '1/20',
        'channel': 'rayleigh-known', 'ebn0_db': [10.0, 14.0, 18.0, 22.0],
        'detectors': ['spa-map', 'gauss-map', 'vb-map', 'euc-map'],
    }

    CODED_16QAM = dict(
        CODED_RATE_4_5, name='coded-16qam', constellation='16qam', ebn0_db=[10.0, 11.0, 12.0, 13.0],
    )

    @classmethod
    def catalogue(cls) -> Dict[str, Dict[str, Any]]:
        return {
            preset['name']: preset
            for preset in (
                cls.COHERENT_BASELINE, cls.UNCODED_2X2, cls.UNCODED_4X4, cls.CODED_PILOTS_1_20,
                cls.CODED_PILOTS_5_100, cls.CODED_RATE_4_5, cls.UNCODED_16QAM, cls.CODED_16QAM,
            )
        }

    @classmethod
    def get(cls, name: str) -> SimConfig:
        """Build the SimConfig of a named preset"""
        catalogue = cls.catalogue()
        if name not in catalogue:
            raise ConfigError(f"Unknown preset '{name}'. Available: {sorted(catalogue)}")
        return SimConfig.from_dict(dict(catalogue[name]))


# Global runtime settings instance
runtime = RuntimeSettings()
