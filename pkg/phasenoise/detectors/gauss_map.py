"""
Gauss-MAP Detector
Symbol beliefs from marginalizing the likelihood against the smoother's
Gaussian phase posterior, mapped to a cosine-variant Tikhonov density.
"""

import math
from typing import Optional

import numpy as np
from loguru import logger

from phasenoise.beliefs import CandidateSet, normalize_log
from phasenoise.circmath import log_bessel_i0
from phasenoise.detectors.base_detector import DetectorKind
from phasenoise.detectors.iteration import SmootherDetector
from phasenoise.diagnostics import DetectorDiagnostics
from phasenoise.errors import DomainError
from phasenoise.smoother import PhasePosterior

GAUSS_CROSS_TERM_MODES = ('projected', 'magnitude')
VARIANCE_FLOOR = 1e-12
RESIDUAL_TOLERANCE = 1e-9


def _u_tilde_closed_form(p11: np.ndarray, p22: np.ndarray, p12: np.ndarray) -> np.ndarray:
    """
    Nonnegative root of P12^2 (1/P11 - u)(1/P22 - u) = u^2

    Written in the cancellation-free form 2qab / (q(a+b) + sqrt(q(q(a-b)^2 + 4ab))).
    """
    a = 1.0 / p11
    b = 1.0 / p22
    q = p12 ** 2
    numerator = 2.0 * q * a * b
    denominator = q * (a + b) + np.sqrt(q * (q * (a - b) ** 2 + 4.0 * a * b))
    with np.errstate(invalid='ignore', divide='ignore'):
        root = np.where(denominator > 0, numerator / denominator, 0.0)
    return root


def u_tilde_residual(p11: float, p22: float, p12: float, u: float) -> float:
    """|P12 + u / sqrt((1/P11 - u)(1/P22 - u))|, the defining equation's residual"""
    product = (1.0 / p11 - u) * (1.0 / p22 - u)
    if product <= 0:
        return math.inf
    return abs(p12 + u / math.sqrt(product))


def solve_u_tilde(p11: float, p22: float, p12: float, diagnostics: Optional[DetectorDiagnostics] = None) -> float:
    """
    Magnitude of the Tikhonov coupling parameter matching a 2x2 phase covariance

    Args:
        p11: Variance of the first link phase
        p22: Variance of the second link phase
        p12: Their covariance; must be <= 0 for a nonnegative root
        diagnostics: Optional counters; positive P12 increments u_tilde_fallbacks

    Returns:
        |u_tilde| in [0, min(1/P11, 1/P22))

    Raises:
        DomainError: If a variance is not positive
    """
    if p11 <= 0 or p22 <= 0:
        raise DomainError(f"Variances must be positive, got P11={p11}, P22={p22}")
    if p12 > 0:
        if diagnostics is not None:
            diagnostics.u_tilde_fallbacks += 1
        logger.debug(f"Positive phase covariance {p12:.3e}; coupling set to 0")
        return 0.0
    if p12 == 0:
        return 0.0
    u = float(_u_tilde_closed_form(np.float64(p11), np.float64(p22), np.float64(p12)))
    residual = u_tilde_residual(p11, p22, p12, u)
    if residual > RESIDUAL_TOLERANCE * max(1.0, abs(p12)):
        logger.warning(f"u_tilde residual {residual:.3e} above tolerance for P=({p11}, {p22}, {p12})")
    return u


def _u_tilde_array(p11: np.ndarray, p22: np.ndarray, p12: np.ndarray, diagnostics: DetectorDiagnostics) -> np.ndarray:
    positive = p12 > 0
    if np.any(positive):
        diagnostics.u_tilde_fallbacks += int(np.count_nonzero(positive))
    root = _u_tilde_closed_form(p11, p22, np.where(positive, 0.0, p12))
    return np.where(positive, 0.0, root)


def gauss_map_log_weights(
    samples: np.ndarray,
    posterior: PhasePosterior,
    n0: float,
    candidates: CandidateSet,
    gains: Optional[np.ndarray] = None,
    cross_term: str = 'projected',
    diagnostics: Optional[DetectorDiagnostics] = None,
) -> np.ndarray:
    """
    [L, K] log-beliefs -sum |h c|^2 / N0 + sum_n ln I0(sum_m |u_mn| - coupling_n)

    u_mn = (2/N0) r_n (h c_m)^* + e^{j theta_hat}/P_mm. The coupling of each
    pair is Re[u~ e^{-j(angle u_m - angle u_l)}] in 'projected' mode and |u~| in
    'magnitude' mode. Negative Bessel arguments are clamped to zero and counted.
    """
    if cross_term not in GAUSS_CROSS_TERM_MODES:
        raise DomainError(f"cross_term must be one of {GAUSS_CROSS_TERM_MODES}, got '{cross_term}'")
    diagnostics = diagnostics if diagnostics is not None else DetectorDiagnostics()
    samples = np.asarray(samples, dtype=complex)
    length, n_rx = samples.shape
    n_tx = candidates.n_tx
    gains = np.ones((n_tx, n_rx), dtype=complex) if gains is None else np.asarray(gains, dtype=complex)

    theta = posterior.theta_hat
    variances = np.maximum(posterior.variances(), VARIANCE_FLOOR)          # [L, Nt, Nr]
    prior_u = np.exp(1j * theta) / variances                                 # [L, Nt, Nr]
    faded = candidates.symbols[:, :, None] * gains[None, :, :]               # [K, Nt, Nr]
    weight = 2.0 / n0

    u = weight * samples[:, None, None, :] * np.conj(faded)[None] + prior_u[:, None]   # [L, K, Nt, Nr]
    argument = np.abs(u).sum(axis=2)                                          # [L, K, Nr]

    for m in range(n_tx):
        for l in range(m + 1, n_tx):
            p_mm = np.maximum(posterior.covariance[:, :, m, m], VARIANCE_FLOOR)   # [L, Nr]
            p_ll = np.maximum(posterior.covariance[:, :, l, l], VARIANCE_FLOOR)
            p_ml = posterior.covariance[:, :, m, l]
            magnitude = _u_tilde_array(p_mm, p_ll, p_ml, diagnostics)
            coupled = magnitude * np.exp(1j * (theta[:, m, :] - theta[:, l, :]))     # [L, Nr]
            u_tilde = weight * faded[None, :, l, :] * np.conj(faded[None, :, m, :]) + coupled[:, None, :]
            if cross_term == 'magnitude':
                argument = argument - np.abs(u_tilde)
            else:
                direction = np.angle(u[:, :, m, :]) - np.angle(u[:, :, l, :])
                argument = argument - np.real(u_tilde * np.exp(-1j * direction))

    negative = argument < 0
    if np.any(negative):
        diagnostics.i0_clamps += int(np.count_nonzero(negative))
        argument = np.where(negative, 0.0, argument)

    energy = -np.sum(np.abs(faded) ** 2, axis=(1, 2)) / n0
    return energy[None, :] + log_bessel_i0(argument).sum(axis=-1)


def gauss_map_belief(
    r_k: np.ndarray,
    theta_hat_k: np.ndarray,
    covariance_k: np.ndarray,
    n0: float,
    candidates: CandidateSet,
    gains: Optional[np.ndarray] = None,
    cross_term: str = 'projected',
    diagnostics: Optional[DetectorDiagnostics] = None,
) -> np.ndarray:
    """
    Normalized Gauss-MAP log-pmf [K] at one time index

    Args:
        r_k: [N_r] received samples
        theta_hat_k: [N_t, N_r] phase estimates
        covariance_k: [N_r, N_t, N_t] covariances
    """
    samples = np.atleast_1d(np.asarray(r_k, dtype=complex))[None, :]
    n_rx = samples.shape[1]
    posterior = PhasePosterior(
        np.asarray(theta_hat_k, dtype=float).reshape(1, candidates.n_tx, n_rx),
        np.asarray(covariance_k, dtype=float).reshape(1, n_rx, candidates.n_tx, candidates.n_tx),
    )
    return normalize_log(gauss_map_log_weights(samples, posterior, n0, candidates, gains, cross_term, diagnostics)[0])


class GaussMapDetector(SmootherDetector):
    """Smoother posterior marginalized through the Tikhonov mapping"""

    kind = DetectorKind.GAUSS_MAP

    def log_weights(self, ctx, posterior, iteration, diagnostics):
        return gauss_map_log_weights(
            ctx.samples, posterior, ctx.n0, ctx.candidates, ctx.gains,
            self.settings.gauss_cross_term, diagnostics,
        )
