"""
EUC-MAP Detector
Euclidean-distance symbol beliefs that take the smoothed phases as exact
"""

from typing import Optional

import numpy as np

from phasenoise.beliefs import CandidateSet, normalize_log
from phasenoise.detectors.base_detector import DetectorKind
from phasenoise.detectors.iteration import SmootherDetector

_CHUNK = 512


def _unit_gains(gains: Optional[np.ndarray], n_tx: int, n_rx: int) -> np.ndarray:
    if gains is None:
        return np.ones((n_tx, n_rx), dtype=complex)
    return np.asarray(gains, dtype=complex)


def predicted_samples(theta_hat: np.ndarray, candidates: CandidateSet, gains: np.ndarray) -> np.ndarray:
    """[L, K, N_r] noiseless samples sum_m h c_m e^{j theta_hat} for every candidate"""
    return np.einsum('km,mn,lmn->lkn', candidates.symbols, gains, np.exp(1j * theta_hat))


def euc_map_log_weights(
    samples: np.ndarray,
    theta_hat: np.ndarray,
    n0: float,
    candidates: CandidateSet,
    gains: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    [L, K] log-beliefs -sum_n |r_n - sum_m h c_m e^{j theta_hat_mn}|^2 / N0

    Args:
        samples: [L, N_r] received samples
        theta_hat: [L, N_t, N_r] phase estimates
        n0: Noise variance
        candidates: Joint candidates
        gains: Optional known gains
    """
    samples = np.asarray(samples, dtype=complex)
    length, n_rx = samples.shape
    gains = _unit_gains(gains, candidates.n_tx, n_rx)
    out = np.empty((length, candidates.size))
    for start in range(0, length, _CHUNK):
        stop = min(start + _CHUNK, length)
        predicted = predicted_samples(theta_hat[start:stop], candidates, gains)
        distance = np.abs(samples[start:stop, None, :] - predicted) ** 2
        out[start:stop] = -distance.sum(axis=-1) / n0
    return out


def euc_map_belief(
    r_k: np.ndarray,
    theta_hat_k: np.ndarray,
    n0: float,
    candidates: CandidateSet,
    gains: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Normalized EUC-MAP log-pmf [K] at one time index"""
    samples = np.atleast_1d(np.asarray(r_k, dtype=complex))[None, :]
    theta = np.asarray(theta_hat_k, dtype=float).reshape(1, candidates.n_tx, samples.shape[1])
    return normalize_log(euc_map_log_weights(samples, theta, n0, candidates, gains)[0])


class EucMapDetector(SmootherDetector):
    """Smoother phases plugged into the Euclidean metric"""

    kind = DetectorKind.EUC_MAP

    def log_weights(self, ctx, posterior, iteration, diagnostics):
        return euc_map_log_weights(ctx.samples, posterior.theta_hat, ctx.n0, ctx.candidates, ctx.gains)
