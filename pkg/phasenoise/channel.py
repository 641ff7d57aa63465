"""
Channel Model
Framed MIMO transmission with per-oscillator Wiener phase noise:
constellations, pilot layouts, phase trajectories and received samples.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Union

import numpy as np
from loguru import logger

from phasenoise.errors import ConfigError, DomainError, FrameLayoutError

# Seed of the fixed pilot sequence; recorded in every run's metadata
PILOT_SEED = 0x5EED_0F_A11

EBN0_FORMULA = "N0 = 1 / (bits_per_symbol * code_rate * data_fraction * 10^(EbN0_dB / 10)), Es = 1 per antenna"


# ====================
# CONSTELLATIONS
# ====================

@dataclass(frozen=True)
class Constellation:
    """
    Unit-energy signal set with Gray bit labels

    Point i carries the label given by the binary expansion of i (MSB first).
    """
    name: str
    points: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=complex)
        size = points.size
        if size < 2 or size & (size - 1):
            raise DomainError(f"Constellation size must be a power of two, got {size}")
        energy = float(np.mean(np.abs(points) ** 2))
        if abs(energy - 1.0) > 1e-12:
            raise DomainError(f"Constellation '{self.name}' has average energy {energy}, expected 1")
        object.__setattr__(self, 'points', points)

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def bits_per_symbol(self) -> int:
        return int(round(math.log2(self.size)))

    @property
    def labels(self) -> np.ndarray:
        """[M, bits] array of bit labels, MSB first"""
        shifts = np.arange(self.bits_per_symbol - 1, -1, -1)
        return ((np.arange(self.size)[:, None] >> shifts) & 1).astype(np.uint8)

    @property
    def energies(self) -> np.ndarray:
        return np.abs(self.points) ** 2

    def bits_to_indices(self, bits: np.ndarray) -> np.ndarray:
        """Map [..., bits_per_symbol] bit arrays to point indices"""
        bits = np.asarray(bits, dtype=np.int64)
        weights = 1 << np.arange(self.bits_per_symbol - 1, -1, -1)
        return bits @ weights

    def indices_to_bits(self, indices: np.ndarray) -> np.ndarray:
        return self.labels[np.asarray(indices, dtype=np.int64)]

    def __repr__(self) -> str:
        return f"Constellation({self.name}, M={self.size})"


def bpsk() -> Constellation:
    return Constellation('BPSK', np.array([1.0, -1.0]))


def qpsk() -> Constellation:
    axis = np.array([1.0, -1.0])
    points = (axis[:, None] + 1j * axis[None, :]).ravel() / math.sqrt(2.0)
    return Constellation('QPSK', points)


def qam16() -> Constellation:
    # Gray pairs 00, 01, 10, 11 -> -3, -1, +3, +1
    axis = np.array([-3.0, -1.0, 3.0, 1.0])
    points = (axis[:, None] + 1j * axis[None, :]).ravel() / math.sqrt(10.0)
    return Constellation('16QAM', points)


CONSTELLATIONS = {
    'bpsk': bpsk,
    'qpsk': qpsk,
    '16qam': qam16,
}


def get_constellation(name: str) -> Constellation:
    """Look up a constellation by case-insensitive name"""
    try:
        return CONSTELLATIONS[name.lower()]()
    except KeyError:
        raise ConfigError(f"Unknown constellation '{name}'. Available: {sorted(CONSTELLATIONS)}") from None


# ====================
# PILOT LAYOUTS
# ====================

@dataclass(frozen=True)
class PilotPattern:
    """
    Pilot layout: a preamble followed by cycles of (period - burst) data and burst pilots

    period = 0 disables periodic pilots; all_pilots marks every symbol as a pilot.
    """
    preamble_len: int = 10
    period: int = 21
    burst_len: int = 1
    all_pilots: bool = False

    def __post_init__(self):
        if self.preamble_len < 0:
            raise ConfigError(f"preamble_len must be nonnegative, got {self.preamble_len}")
        if self.period < 0:
            raise ConfigError(f"period must be nonnegative, got {self.period}")
        if self.period > 0 and not (self.period > self.burst_len >= 1):
            raise ConfigError(
                f"Periodic pilots need period > burst_len >= 1, got period={self.period}, burst={self.burst_len}"
            )

    NAMED = {
        '1/20': dict(preamble_len=10, period=21, burst_len=1),
        '5/100': dict(preamble_len=10, period=100, burst_len=5),
        'preamble-only': dict(preamble_len=10, period=0, burst_len=0),
        'none': dict(preamble_len=0, period=0, burst_len=0),
        'all': dict(preamble_len=0, period=0, burst_len=0, all_pilots=True),
    }

    @classmethod
    def from_name(cls, name: str) -> 'PilotPattern':
        """Build one of the named layouts ('1/20', '5/100', 'preamble-only', 'none', 'all')"""
        try:
            return cls(**cls.NAMED[name.lower()])
        except KeyError:
            raise ConfigError(f"Unknown pilot pattern '{name}'. Available: {sorted(cls.NAMED)}") from None

    @classmethod
    def parse(cls, layout: Union[str, Dict[str, int], 'PilotPattern']) -> 'PilotPattern':
        if isinstance(layout, PilotPattern):
            return layout
        if isinstance(layout, str):
            return cls.from_name(layout)
        return cls(**layout)

    def mask(self, length: int) -> np.ndarray:
        """Boolean pilot mask of a frame of the given length"""
        if length < 1:
            raise FrameLayoutError(f"Frame length must be positive, got {length}")
        if self.all_pilots:
            return np.ones(length, dtype=bool)
        k = np.arange(length)
        pilot = k < self.preamble_len
        if self.period > 0:
            j = k - self.preamble_len
            periodic = (j >= 0) & (np.mod(j, self.period) >= self.period - self.burst_len)
            pilot = pilot | periodic
        return pilot

    def density(self, length: int) -> float:
        """Closed-form pilot fraction preamble/L + (L - preamble) * burst / (period * L)"""
        if self.all_pilots:
            return 1.0
        preamble = min(self.preamble_len, length)
        periodic = 0.0
        if self.period > 0:
            periodic = (length - preamble) * self.burst_len / self.period
        return (preamble + periodic) / length

    def data_length_for(self, n_data: int) -> int:
        """Smallest frame length holding at least n_data data positions"""
        if self.all_pilots:
            raise FrameLayoutError("An all-pilot layout holds no data")
        if self.period == 0:
            return self.preamble_len + n_data
        per_cycle = self.period - self.burst_len
        cycles, remainder = divmod(n_data, per_cycle)
        return self.preamble_len + cycles * self.period + remainder

    def describe(self) -> str:
        if self.all_pilots:
            return "all"
        return f"preamble={self.preamble_len}, period={self.period}, burst={self.burst_len}"


def pilot_sequence(
    constellation: Constellation,
    n_pilots: int,
    n_tx: int,
    preamble_len: int,
    seed: int = PILOT_SEED,
    max_attempts: int = 100,
) -> np.ndarray:
    """
    Fixed pseudo-random pilot symbol indices

    Draws [n_pilots, n_tx] indices from a seeded generator; the preamble block is
    redrawn until it has full column rank so every link is identifiable.

    Returns:
        Integer array of constellation indices
    """
    rng = np.random.default_rng(seed)
    rank_rows = min(preamble_len, n_pilots)
    for attempt in range(max_attempts):
        indices = rng.integers(0, constellation.size, size=(n_pilots, n_tx))
        if n_tx == 1 or rank_rows < n_tx:
            return indices
        block = constellation.points[indices[:rank_rows]]
        if np.linalg.matrix_rank(block) == n_tx:
            if attempt:
                logger.debug(f"Pilot preamble redrawn {attempt} time(s) for full rank")
            return indices
    logger.warning("Pilot preamble could not reach full column rank; using last draw")
    return indices


# ====================
# PHASE NOISE
# ====================

@dataclass
class PhaseTrajectory:
    """Transmit and receive oscillator phase paths"""
    theta_t: np.ndarray
    theta_r: np.ndarray

    @property
    def length(self) -> int:
        return self.theta_t.shape[0]

    @property
    def link_phases(self) -> np.ndarray:
        """[L, N_t, N_r] array of theta_t[m] + theta_r[n]"""
        return self.theta_t[:, :, None] + self.theta_r[:, None, :]

    @classmethod
    def constant(cls, length: int, n_tx: int, n_rx: int) -> 'PhaseTrajectory':
        return cls(np.zeros((length, n_tx)), np.zeros((length, n_rx)))


def sample_phase_trajectories(
    length: int,
    n_tx: int,
    n_rx: int,
    sigma2_t: float,
    sigma2_r: float,
    rng: np.random.Generator,
) -> PhaseTrajectory:
    """
    Independent Wiener phase paths, one per oscillator

    Args:
        length: Frame length L
        n_tx: Transmit antennas
        n_rx: Receive antennas
        sigma2_t: Transmit increment variance (rad^2)
        sigma2_r: Receive increment variance (rad^2)
        rng: Random generator

    Returns:
        PhaseTrajectory with uniform initial phases on [0, 2pi)
    """
    if length < 1:
        raise DomainError(f"Frame length must be positive, got {length}")
    if sigma2_t < 0 or sigma2_r < 0:
        raise DomainError("Phase noise variances must be nonnegative")

    def paths(count: int, sigma2: float) -> np.ndarray:
        initial = rng.uniform(0.0, 2.0 * math.pi, size=(1, count))
        increments = rng.normal(0.0, math.sqrt(sigma2), size=(length - 1, count))
        return np.cumsum(np.vstack([initial, increments]), axis=0)

    theta_t = paths(n_tx, sigma2_t)
    theta_r = paths(n_rx, sigma2_r)
    return PhaseTrajectory(theta_t, theta_r)


# ====================
# FRAMES
# ====================

@dataclass
class Frame:
    """Transmitted frame: symbols, pilot mask and payload bits"""
    symbols: np.ndarray
    symbol_indices: np.ndarray
    pilot_mask: np.ndarray
    bits: np.ndarray
    constellation: Constellation
    pattern: PilotPattern = field(default_factory=PilotPattern)

    @property
    def length(self) -> int:
        return self.symbols.shape[0]

    @property
    def n_tx(self) -> int:
        return self.symbols.shape[1]

    @property
    def data_positions(self) -> np.ndarray:
        return np.flatnonzero(~self.pilot_mask)

    @property
    def n_data(self) -> int:
        return int(np.count_nonzero(~self.pilot_mask))


def build_frame(
    bits: Optional[np.ndarray],
    constellation: Constellation,
    pattern: PilotPattern,
    length: int,
    n_tx: int,
    rng: Optional[np.random.Generator] = None,
    pilot_seed: int = PILOT_SEED,
) -> Frame:
    """
    Assemble a frame of pilots and Gray-mapped data symbols

    Args:
        bits: Payload bits ordered (data position, antenna, bit), flat or shaped;
            None draws a random payload from rng
        constellation: Signal set
        pattern: Pilot layout
        length: Frame length L
        n_tx: Transmit antennas
        rng: Generator used only when bits is None
        pilot_seed: Seed of the fixed pilot sequence

    Returns:
        Frame

    Raises:
        FrameLayoutError: If the bit count does not fill the data positions
    """
    pilot_mask = pattern.mask(length)
    n_pilots = int(np.count_nonzero(pilot_mask))
    n_data = length - n_pilots
    bps = constellation.bits_per_symbol
    expected = n_data * n_tx * bps

    if bits is None:
        if rng is None:
            raise FrameLayoutError("Either payload bits or a random generator must be given")
        bits = rng.integers(0, 2, size=expected, dtype=np.uint8)
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.size != expected:
        raise FrameLayoutError(
            f"Frame needs {expected} bits ({n_data} data positions x {n_tx} antennas x {bps}), got {bits.size}"
        )
    bits = bits.reshape(n_data, n_tx, bps)

    indices = np.empty((length, n_tx), dtype=np.int64)
    indices[~pilot_mask] = constellation.bits_to_indices(bits)
    if n_pilots:
        indices[pilot_mask] = pilot_sequence(constellation, n_pilots, n_tx, pattern.preamble_len, pilot_seed)

    return Frame(
        symbols=constellation.points[indices],
        symbol_indices=indices,
        pilot_mask=pilot_mask,
        bits=bits,
        constellation=constellation,
        pattern=pattern,
    )


@dataclass
class ReceivedFrame:
    """Received samples with the channel parameters known to the receiver"""
    samples: np.ndarray
    n0: float
    gains: np.ndarray

    @property
    def length(self) -> int:
        return self.samples.shape[0]

    @property
    def n_rx(self) -> int:
        return self.samples.shape[1]

    @property
    def n_tx(self) -> int:
        return self.gains.shape[0]


def unit_gains(n_tx: int, n_rx: int) -> np.ndarray:
    return np.ones((n_tx, n_rx), dtype=complex)


def rayleigh_gains(n_tx: int, n_rx: int, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. unit-variance circular complex Gaussian gain matrix [N_t, N_r]"""
    return (rng.standard_normal((n_tx, n_rx)) + 1j * rng.standard_normal((n_tx, n_rx))) / math.sqrt(2.0)


def apply_channel(
    frame: Frame,
    trajectory: PhaseTrajectory,
    gains: np.ndarray,
    n0: float,
    rng: np.random.Generator,
) -> ReceivedFrame:
    """
    r[k, n] = sum_m h[m, n] c[k, m] e^{j theta[k, m, n]} + w[k, n]

    The noise has total variance n0, split evenly between real and imaginary parts.
    """
    if n0 < 0:
        raise DomainError(f"N0 must be nonnegative, got {n0}")
    gains = np.asarray(gains, dtype=complex)
    n_rx = trajectory.theta_r.shape[1]
    if trajectory.length != frame.length or trajectory.theta_t.shape[1] != frame.n_tx:
        raise FrameLayoutError("Phase trajectory does not match the frame dimensions")
    if gains.shape != (frame.n_tx, n_rx):
        raise FrameLayoutError(f"Gain matrix must be {(frame.n_tx, n_rx)}, got {gains.shape}")

    rotations = np.exp(1j * trajectory.link_phases)
    clean = np.einsum('km,mn,kmn->kn', frame.symbols, gains, rotations)
    noise = math.sqrt(n0 / 2.0) * (
        rng.standard_normal(clean.shape) + 1j * rng.standard_normal(clean.shape)
    )
    return ReceivedFrame(samples=clean + noise, n0=float(n0), gains=gains)


def ebn0_to_n0(ebn0_db: float, bits_per_symbol: int, code_rate: float = 1.0, data_fraction: float = 1.0) -> float:
    """
    Noise variance for a target Eb/N0 with unit symbol energy per antenna

    Pilot overhead and code rate both reduce the information bits per symbol.
    """
    if not 0 < code_rate <= 1 or not 0 < data_fraction <= 1:
        raise DomainError("code_rate and data_fraction must lie in (0, 1]")
    return 1.0 / (bits_per_symbol * code_rate * data_fraction * 10.0 ** (ebn0_db / 10.0))
