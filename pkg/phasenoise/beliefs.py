"""
Symbol Beliefs
Joint-symbol candidate sets, per-antenna symbol priors and normalized
log-domain symbol beliefs shared by all detectors.
"""

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import numpy as np
from scipy.special import logsumexp

from phasenoise.channel import Constellation
from phasenoise.errors import DomainError, FrameLayoutError

# Floor used when taking logs of probabilities; exp(-690) underflows to 0 against any real mass
LOG_FLOOR = -690.0


def safe_log(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide='ignore'):
        return np.maximum(np.log(p), LOG_FLOOR)


@dataclass(frozen=True)
class CandidateSet:
    """
    All joint transmit vectors c in C^{N_t}, in lexicographic index order

    Attributes:
        indices: [K, N_t] constellation indices, K = M^{N_t}
        symbols: [K, N_t] complex points
        onehot: [K, N_t, M] indicator of each antenna's point
    """
    constellation: Constellation
    n_tx: int
    indices: np.ndarray
    symbols: np.ndarray
    onehot: np.ndarray

    @property
    def size(self) -> int:
        return self.indices.shape[0]

    def index_of(self, symbol_indices: np.ndarray) -> np.ndarray:
        """Candidate index of [..., N_t] per-antenna point indices"""
        weights = self.constellation.size ** np.arange(self.n_tx - 1, -1, -1)
        return np.asarray(symbol_indices, dtype=np.int64) @ weights


@lru_cache(maxsize=32)
def _build_candidates(name: str, points_key: bytes, n_tx: int) -> tuple:
    points = np.frombuffer(points_key, dtype=complex)
    m = points.size
    indices = np.array(list(itertools.product(range(m), repeat=n_tx)), dtype=np.int64).reshape(-1, n_tx)
    onehot = np.zeros((indices.shape[0], n_tx, m))
    rows = np.arange(indices.shape[0])
    for antenna in range(n_tx):
        onehot[rows, antenna, indices[:, antenna]] = 1.0
    return indices, points[indices], onehot


def candidate_set(constellation: Constellation, n_tx: int) -> CandidateSet:
    """Enumerate (and cache) the joint candidates for a constellation and antenna count"""
    if n_tx < 1:
        raise DomainError(f"n_tx must be positive, got {n_tx}")
    indices, symbols, onehot = _build_candidates(constellation.name, constellation.points.tobytes(), n_tx)
    return CandidateSet(constellation, n_tx, indices, symbols, onehot)


# ====================
# PRIORS
# ====================

class SymbolPriors:
    """Per-antenna symbol pmfs for a whole frame, shape [L, N_t, M]"""

    def __init__(self, pmf: np.ndarray):
        pmf = np.asarray(pmf, dtype=float)
        if pmf.ndim != 3:
            raise FrameLayoutError(f"Prior pmf must be [L, N_t, M], got shape {pmf.shape}")
        if np.any(pmf < 0) or not np.all(np.isfinite(pmf)):
            raise DomainError("Prior pmf entries must be finite and nonnegative")
        totals = pmf.sum(axis=-1, keepdims=True)
        if np.any(totals <= 0):
            raise DomainError("Prior pmf rows must have positive mass")
        self.pmf = pmf / totals

    @classmethod
    def uniform(cls, length: int, n_tx: int, size: int) -> 'SymbolPriors':
        return cls(np.full((length, n_tx, size), 1.0 / size))

    @classmethod
    def delta(cls, symbol_indices: np.ndarray, size: int) -> 'SymbolPriors':
        """Point-mass priors at the given [L, N_t] indices"""
        symbol_indices = np.asarray(symbol_indices, dtype=np.int64)
        pmf = np.zeros(symbol_indices.shape + (size,))
        np.put_along_axis(pmf, symbol_indices[..., None], 1.0, axis=-1)
        return cls(pmf)

    @classmethod
    def with_pilots(
        cls,
        base: Optional['SymbolPriors'],
        pilot_mask: np.ndarray,
        symbol_indices: np.ndarray,
        size: int,
    ) -> 'SymbolPriors':
        """Copy of base (uniform if None) with delta priors at pilot positions"""
        length, n_tx = symbol_indices.shape
        pmf = cls.uniform(length, n_tx, size).pmf if base is None else base.pmf.copy()
        pilots = np.flatnonzero(pilot_mask)
        if pilots.size:
            delta = np.zeros((pilots.size, n_tx, size))
            np.put_along_axis(delta, symbol_indices[pilots][..., None], 1.0, axis=-1)
            pmf[pilots] = delta
        return cls(pmf)

    @property
    def length(self) -> int:
        return self.pmf.shape[0]

    def at(self, k: int) -> np.ndarray:
        return self.pmf[k]

    def joint_log_prior(self, candidates: CandidateSet) -> np.ndarray:
        """[L, K] log prior of each joint candidate under independent antennas"""
        log_pmf = safe_log(self.pmf)
        total = np.zeros((self.length, candidates.size))
        for antenna in range(candidates.n_tx):
            total += log_pmf[:, antenna, candidates.indices[:, antenna]]
        return total


# ====================
# BELIEFS
# ====================

def normalize_log(log_values: np.ndarray, axis: int = -1) -> np.ndarray:
    return log_values - logsumexp(log_values, axis=axis, keepdims=True)


@dataclass
class JointSymbolBelief:
    """Normalized log-pmf over the joint candidates at one time index"""
    log_pmf: np.ndarray
    candidates: CandidateSet

    def __post_init__(self):
        self.log_pmf = normalize_log(np.asarray(self.log_pmf, dtype=float))

    @property
    def pmf(self) -> np.ndarray:
        return np.exp(self.log_pmf)

    def marginals(self) -> np.ndarray:
        """[N_t, M] per-antenna marginal pmfs"""
        return np.einsum('k,kmq->mq', self.pmf, self.candidates.onehot)

    def hard_decision(self) -> np.ndarray:
        """Per-antenna indices of the most probable candidate (lowest index wins ties)"""
        return self.candidates.indices[int(np.argmax(self.log_pmf))]


class FrameBeliefs:
    """
    Normalized joint-symbol beliefs for every time index of a frame

    Attributes:
        log_pmf: [L, K] normalized log probabilities
        candidates: Candidate enumeration shared by all rows
    """

    def __init__(self, log_pmf: np.ndarray, candidates: CandidateSet, normalized: bool = False):
        log_pmf = np.asarray(log_pmf, dtype=float)
        if log_pmf.ndim != 2 or log_pmf.shape[1] != candidates.size:
            raise FrameLayoutError(
                f"Belief array must be [L, {candidates.size}], got shape {log_pmf.shape}"
            )
        self.log_pmf = log_pmf if normalized else normalize_log(log_pmf)
        self.candidates = candidates

    @classmethod
    def from_priors(cls, priors: SymbolPriors, candidates: CandidateSet) -> 'FrameBeliefs':
        return cls(priors.joint_log_prior(candidates), candidates)

    @property
    def length(self) -> int:
        return self.log_pmf.shape[0]

    @property
    def pmf(self) -> np.ndarray:
        return np.exp(self.log_pmf)

    def at(self, k: int) -> JointSymbolBelief:
        return JointSymbolBelief(self.log_pmf[k], self.candidates)

    def combine(self, log_weights: Union['FrameBeliefs', np.ndarray]) -> 'FrameBeliefs':
        """Product with another belief or [L, K] log-weight array, renormalized"""
        if isinstance(log_weights, FrameBeliefs):
            log_weights = log_weights.log_pmf
        return FrameBeliefs(self.log_pmf + log_weights, self.candidates)

    def marginals(self) -> np.ndarray:
        """[L, N_t, M] per-antenna marginal pmfs"""
        return np.einsum('lk,kmq->lmq', self.pmf, self.candidates.onehot)

    def hard_decisions(self) -> np.ndarray:
        """[L, N_t] decided point indices; argmax with lowest-index tie-break"""
        return self.candidates.indices[np.argmax(self.log_pmf, axis=1)]

    def max_change(self, other: 'FrameBeliefs') -> float:
        """Largest absolute pmf difference, used as a fixed-point test"""
        return float(np.max(np.abs(self.pmf - other.pmf)))
