"""
Turbo Loop
Coded frame layout, interleaving over data positions and the
detector-decoder exchange of extrinsic information.
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np
from loguru import logger

from phasenoise.beliefs import SymbolPriors
from phasenoise.channel import Constellation, Frame, PilotPattern, PILOT_SEED, build_frame
from phasenoise.coding.ldpc import LLR_CLAMP, DecodeResult, LdpcCode, bp_decode
from phasenoise.coding.mapping import LlrFrame, belief_to_bit_llrs, llrs_to_symbol_priors
from phasenoise.detectors.base_detector import BaseDetector, DetectionResult, ReceiverContext
from phasenoise.errors import ConfigError, FrameLayoutError


class Interleaver:
    """Seeded pseudo-random permutation of a bit sequence"""

    def __init__(self, size: int, seed: int):
        if size <= 0:
            raise ConfigError(f"Interleaver size must be positive, got {size}")
        self.size = size
        self.seed = seed
        self.permutation = np.random.default_rng(seed).permutation(size)

    def interleave(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values)
        if values.shape[0] != self.size:
            raise FrameLayoutError(f"Interleaver expects {self.size} values, got {values.shape[0]}")
        return values[self.permutation]

    def deinterleave(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values)
        if values.shape[0] != self.size:
            raise FrameLayoutError(f"Interleaver expects {self.size} values, got {values.shape[0]}")
        out = np.empty_like(values)
        out[self.permutation] = values
        return out


@dataclass
class CodedLayout:
    """
    Placement of one interleaved codeword on the data positions of a frame

    The codeword fills (data position, antenna, bit) slots in order; the last
    data position is topped up with known zero filler bits.
    """
    code: LdpcCode
    constellation: Constellation
    pattern: PilotPattern
    n_tx: int
    interleaver_seed: int = 7
    interleaver: Interleaver = field(init=False)

    def __post_init__(self):
        if self.pattern.all_pilots:
            raise ConfigError("A coded frame needs data positions; the 'all' pilot layout has none")
        self.interleaver = Interleaver(self.code.n, self.interleaver_seed)

    @property
    def bits_per_position(self) -> int:
        return self.n_tx * self.constellation.bits_per_symbol

    @property
    def n_data(self) -> int:
        return math.ceil(self.code.n / self.bits_per_position)

    @property
    def filler_bits(self) -> int:
        return self.n_data * self.bits_per_position - self.code.n

    @property
    def frame_length(self) -> int:
        return self.pattern.data_length_for(self.n_data)

    @property
    def data_fraction(self) -> float:
        return self.n_data / self.frame_length

    def payload(self, codeword: np.ndarray) -> np.ndarray:
        """Interleaved codeword followed by the filler"""
        return np.concatenate([self.interleaver.interleave(codeword), np.zeros(self.filler_bits, dtype=np.uint8)])

    def channel_llrs(self, llrs: LlrFrame) -> np.ndarray:
        """Codeword-order LLRs with the filler stripped"""
        return self.interleaver.deinterleave(llrs.flat[:self.code.n])

    def prior_llrs(self, extrinsic: np.ndarray) -> LlrFrame:
        """Frame-shaped LLRs for symbol priors; filler bits are known zeros"""
        flat = np.concatenate([self.interleaver.interleave(extrinsic), np.full(self.filler_bits, LLR_CLAMP)])
        return LlrFrame(flat.reshape(self.n_data, self.n_tx, self.constellation.bits_per_symbol))

    def describe(self) -> Dict[str, Any]:
        return {
            'code': self.code.matrix.name,
            'n': self.code.n,
            'k': self.code.k,
            'rate': round(self.code.rate, 6),
            'n_data_positions': self.n_data,
            'frame_length': self.frame_length,
            'filler_bits': self.filler_bits,
            'interleaver_seed': self.interleaver_seed,
            'interleaving': 'coded bits permuted, then placed over data positions only',
        }


@dataclass
class CodedFrame:
    frame: Frame
    info_bits: np.ndarray
    codeword: np.ndarray


def build_coded_frame(
    layout: CodedLayout,
    rng: np.random.Generator,
    pilot_seed: int = PILOT_SEED,
) -> CodedFrame:
    """Draw k information bits, encode, interleave and map them onto a frame"""
    info_bits = rng.integers(0, 2, size=layout.code.k, dtype=np.uint8)
    codeword = layout.code.encode(info_bits)
    frame = build_frame(
        layout.payload(codeword), layout.constellation, layout.pattern, layout.frame_length,
        layout.n_tx, pilot_seed=pilot_seed,
    )
    return CodedFrame(frame, info_bits, codeword)


@dataclass
class TurboResult:
    """
    Attributes:
        info_bits: Decoded information bits
        codeword: Decoded codeword
        converged: Decoder syndrome check of the final round
        rounds: Decoder outputs per global round
        detection: Last detector output
    """
    info_bits: np.ndarray
    codeword: np.ndarray
    converged: bool
    rounds: List[DecodeResult]
    detection: DetectionResult


def turbo_run(
    ctx: ReceiverContext,
    detector: BaseDetector,
    layout: CodedLayout,
    n_global: int = 2,
    bp_max_iters: int = 50,
    priors: Optional[SymbolPriors] = None,
) -> TurboResult:
    """
    Alternate the detector and the LDPC decoder

    Each round turns the detector's extrinsic symbol beliefs into channel LLRs,
    decodes, and feeds the decoder extrinsics (posterior minus channel) back as
    symbol priors. Final decisions come from the last decoder posterior.
    """
    if n_global < 1:
        raise ConfigError(f"n_global must be at least 1, got {n_global}")
    data_positions = np.flatnonzero(~ctx.pilot_mask)
    if data_positions.size != layout.n_data:
        raise FrameLayoutError(f"Frame has {data_positions.size} data positions, layout needs {layout.n_data}")

    rounds: List[DecodeResult] = []
    detection: Optional[DetectionResult] = None
    for round_index in range(1, n_global + 1):
        detection = detector.detect(ctx, priors)
        llrs = belief_to_bit_llrs(detection.extrinsic, data_positions, layout.constellation)
        channel = layout.channel_llrs(llrs)
        decoded = bp_decode(channel, layout.code.matrix, bp_max_iters)
        rounds.append(decoded)
        logger.debug(
            f"Turbo round {round_index}/{n_global}, frame {ctx.frame_index}: "
            f"converged={decoded.converged}, bp_iters={decoded.iterations}"
        )
        if round_index < n_global:
            priors = llrs_to_symbol_priors(layout.prior_llrs(decoded.extrinsic(channel)), ctx.pilot_mask, layout.constellation)

    final = rounds[-1]
    return TurboResult(
        info_bits=layout.code.extract_info(final.bits),
        codeword=final.bits,
        converged=final.converged,
        rounds=rounds,
        detection=detection,
    )
