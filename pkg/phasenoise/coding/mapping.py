"""
Bit Mapping
Conversion between joint-symbol beliefs and per-bit LLRs, in both directions
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from phasenoise.beliefs import FrameBeliefs, SymbolPriors
from phasenoise.channel import Constellation
from phasenoise.coding.ldpc import LLR_CLAMP
from phasenoise.errors import FrameLayoutError


@dataclass
class LlrFrame:
    """
    Bit LLRs ln P(bit=0)/P(bit=1) of a frame's data, shape [n_data, N_t, bits_per_symbol]

    Values are clamped to +-50 on construction.
    """
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 3:
            raise FrameLayoutError(f"LLR frame must be [n_data, N_t, bps], got shape {values.shape}")
        self.values = np.clip(np.nan_to_num(values, nan=0.0), -LLR_CLAMP, LLR_CLAMP)

    @property
    def flat(self) -> np.ndarray:
        """LLRs in transmission order (data position, antenna, bit)"""
        return self.values.reshape(-1)

    def hard_bits(self) -> np.ndarray:
        return (self.values < 0).astype(np.uint8)


def belief_to_bit_llrs(
    beliefs: FrameBeliefs,
    data_positions: np.ndarray,
    constellation: Constellation,
) -> LlrFrame:
    """
    Marginalize joint beliefs at the data positions onto each labelled bit

    LLR = logsumexp over candidates whose bit is 0 minus logsumexp over those
    whose bit is 1, per antenna and bit.
    """
    log_pmf = beliefs.log_pmf[np.asarray(data_positions, dtype=np.int64)]       # [D, K]
    candidates = beliefs.candidates
    labels = constellation.labels                                                 # [M, bps]
    n_tx = candidates.n_tx
    bps = constellation.bits_per_symbol
    out = np.empty((log_pmf.shape[0], n_tx, bps))
    for antenna in range(n_tx):
        bit_of = labels[candidates.indices[:, antenna]]                           # [K, bps]
        for bit in range(bps):
            zero = bit_of[:, bit] == 0
            out[:, antenna, bit] = (
                logsumexp(log_pmf[:, zero], axis=1) - logsumexp(log_pmf[:, ~zero], axis=1)
            )
    return LlrFrame(out)


def llrs_to_symbol_priors(
    llrs: LlrFrame,
    pilot_mask: np.ndarray,
    constellation: Constellation,
) -> SymbolPriors:
    """
    Per-antenna symbol priors from independent bit probabilities

    ln P(point) = sum_b ln P(bit_b = label_b); pilot positions get uniform rows,
    which the detector replaces with its pilot deltas.
    """
    pilot_mask = np.asarray(pilot_mask, dtype=bool)
    values = llrs.values
    n_data = int(np.count_nonzero(~pilot_mask))
    if values.shape[0] != n_data:
        raise FrameLayoutError(f"{values.shape[0]} LLR rows for {n_data} data positions")
    n_tx = values.shape[1]
    labels = constellation.labels.astype(float)                                   # [M, bps]
    log_zero = -np.logaddexp(0.0, -values)                                        # ln P(bit=0)
    log_one = -np.logaddexp(0.0, values)                                          # ln P(bit=1)
    log_points = log_zero @ (1.0 - labels).T + log_one @ labels.T                 # [D, Nt, M]

    pmf = np.full((pilot_mask.size, n_tx, constellation.size), 1.0 / constellation.size)
    pmf[~pilot_mask] = np.exp(log_points - logsumexp(log_points, axis=-1, keepdims=True))
    return SymbolPriors(pmf)
