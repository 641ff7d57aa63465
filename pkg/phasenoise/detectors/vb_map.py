"""
VB-MAP Detector
Variational symbol factor: the expected linearized log-likelihood under the
smoother's Gaussian phase factor.
"""

from typing import Optional

import numpy as np

from phasenoise.beliefs import CandidateSet, normalize_log
from phasenoise.detectors.base_detector import DetectorKind
from phasenoise.detectors.euc_map import euc_map_log_weights, predicted_samples
from phasenoise.detectors.iteration import SmootherDetector
from phasenoise.smoother import PhasePosterior

_CHUNK = 512


def vb_log_weights(
    samples: np.ndarray,
    posterior: PhasePosterior,
    n0: float,
    candidates: CandidateSet,
    gains: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    [L, K] exponent -(1/N0) sum_n [ |r_n - sum_m h c_m e^{j theta_hat}|^2 + g_n^H P_n g_n ]

    g_n[m] = h_mn c_m e^{j theta_hat_mn}; the quadratic form runs over all
    ordered (m, l) pairs and is real because P_n is symmetric.
    """
    samples = np.asarray(samples, dtype=complex)
    length, n_rx = samples.shape
    gains = np.ones((candidates.n_tx, n_rx), dtype=complex) if gains is None else np.asarray(gains, dtype=complex)
    out = np.empty((length, candidates.size))
    for start in range(0, length, _CHUNK):
        stop = min(start + _CHUNK, length)
        theta = posterior.theta_hat[start:stop]
        predicted = predicted_samples(theta, candidates, gains)
        distance = (np.abs(samples[start:stop, None, :] - predicted) ** 2).sum(axis=-1)
        rotated = candidates.symbols[None, :, :, None] * gains[None, None] * np.exp(1j * theta)[:, None]  # [B, K, Nt, Nr]
        penalty = np.einsum(
            'bkmn,bnml,bkln->bk', rotated, posterior.covariance[start:stop], np.conj(rotated),
        )
        out[start:stop] = -(distance + np.real(penalty)) / n0
    return out


def vb_belief(
    r_k: np.ndarray,
    theta_hat_k: np.ndarray,
    covariance_k: np.ndarray,
    n0: float,
    candidates: CandidateSet,
    gains: Optional[np.ndarray] = None,
    log_prior: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Normalized VB-MAP log-pmf [K] at one time index: log prior + exponent"""
    samples = np.atleast_1d(np.asarray(r_k, dtype=complex))[None, :]
    n_rx = samples.shape[1]
    posterior = PhasePosterior(
        np.asarray(theta_hat_k, dtype=float).reshape(1, candidates.n_tx, n_rx),
        np.asarray(covariance_k, dtype=float).reshape(1, n_rx, candidates.n_tx, candidates.n_tx),
    )
    weights = vb_log_weights(samples, posterior, n0, candidates, gains)[0]
    if log_prior is not None:
        weights = weights + np.asarray(log_prior, dtype=float)
    return normalize_log(weights)


class VbMapDetector(SmootherDetector):
    """
    Coordinate ascent between the Gaussian phase factor and the symbol factor

    The first pass has no symbol factor yet, so it uses the EUC-MAP rule on the
    pilot-initialized smoother; with n_iters=1 VB-MAP therefore equals EUC-MAP.
    """

    kind = DetectorKind.VB_MAP

    @property
    def strict_measurements(self) -> bool:
        return self.settings.strict_vb

    def log_weights(self, ctx, posterior, iteration, diagnostics):
        if iteration == 1:
            return euc_map_log_weights(ctx.samples, posterior.theta_hat, ctx.n0, ctx.candidates, ctx.gains)
        return vb_log_weights(ctx.samples, posterior, ctx.n0, ctx.candidates, ctx.gains)
