"""
Phase Smoother
Extended Kalman filter and Rauch-Tung-Striebel smoother over the link
phases of each receive antenna, driven by soft-symbol pseudo-measurements.
"""

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from numba import njit
from loguru import logger

from phasenoise.beliefs import FrameBeliefs, JointSymbolBelief
from phasenoise.channel import Constellation
from phasenoise.diagnostics import DetectorDiagnostics
from phasenoise.errors import FrameLayoutError, NumericalError

SOFT_VARIANCE_FLOOR = 1e-8
SKIP_THRESHOLD = 1e-6
UNINFORMED_VARIANCE = math.pi ** 2 / 3.0


@dataclass
class ProcessModel:
    """Random-walk transition over the N_t link phases of one receive antenna"""
    transition: np.ndarray
    covariance: np.ndarray


def process_model(n_tx: int, sigma2_t: float, sigma2_r: float) -> ProcessModel:
    """
    Identity transition with Q = sigma2_t I + sigma2_r 11^T

    The receive increment is shared by every link ending at the same antenna.
    """
    covariance = sigma2_t * np.eye(n_tx) + sigma2_r * np.ones((n_tx, n_tx))
    return ProcessModel(transition=np.eye(n_tx), covariance=covariance)


# ====================
# SOFT SYMBOLS
# ====================

@dataclass
class SoftSymbols:
    """
    Per-antenna symbol mean and variance for a frame

    Attributes:
        mean: [L, N_t] complex
        variance: [L, N_t] nonnegative
    """
    mean: np.ndarray
    variance: np.ndarray

    @classmethod
    def pilots_only(cls, symbols: np.ndarray, pilot_mask: np.ndarray, energy: float = 1.0) -> 'SoftSymbols':
        """Exact pilots; data positions carry zero mean and the full symbol energy"""
        mean = np.where(pilot_mask[:, None], symbols, 0.0).astype(complex)
        variance = np.where(pilot_mask[:, None], 0.0, energy) * np.ones(symbols.shape)
        return cls(mean, variance)

    @classmethod
    def exact(cls, symbols: np.ndarray) -> 'SoftSymbols':
        return cls(np.asarray(symbols, dtype=complex), np.zeros(symbols.shape))

    def at(self, k: int, antenna: int) -> tuple:
        return complex(self.mean[k, antenna]), float(self.variance[k, antenna])


def soft_stats(
    belief: Union[FrameBeliefs, JointSymbolBelief, np.ndarray],
    constellation: Constellation,
) -> SoftSymbols:
    """
    Mean and variance of each antenna's marginal pmf

    Args:
        belief: Frame beliefs, a single joint belief, or per-antenna pmfs [..., N_t, M]
        constellation: Signal set

    Returns:
        SoftSymbols with the batch shape of the input
    """
    if isinstance(belief, (FrameBeliefs, JointSymbolBelief)):
        marginals = belief.marginals()
    else:
        marginals = np.asarray(belief, dtype=float)
    mean = marginals @ constellation.points
    energy = marginals @ constellation.energies
    variance = np.clip(energy - np.abs(mean) ** 2, 0.0, None)
    return SoftSymbols(mean=mean, variance=variance)


def prepare_measurements(
    soft: SoftSymbols,
    pilot_mask: np.ndarray,
    strict_vb: bool = False,
    energy: float = 1.0,
) -> SoftSymbols:
    """Floor data-position variances at 1e-8 Es (or zero them for strict VB); pilots stay exact"""
    variance = soft.variance.copy()
    data = ~np.asarray(pilot_mask, dtype=bool)
    if strict_vb:
        variance[data] = 0.0
    else:
        variance[data] = np.maximum(variance[data], SOFT_VARIANCE_FLOOR * energy)
    variance[~data] = 0.0
    return SoftSymbols(soft.mean, variance)


# ====================
# POSTERIORS
# ====================

@dataclass
class FilteredTrack:
    """Predicted and filtered moments, indexed [L, N_r, N_t(, N_t)]"""
    predicted_mean: np.ndarray
    predicted_cov: np.ndarray
    filtered_mean: np.ndarray
    filtered_cov: np.ndarray


@dataclass
class PhasePosterior:
    """
    Gaussian link-phase posterior

    Attributes:
        theta_hat: [L, N_t, N_r] estimated link phases (not wrapped)
        covariance: [L, N_r, N_t, N_t] covariance per receive antenna
    """
    theta_hat: np.ndarray
    covariance: np.ndarray

    @classmethod
    def genie(cls, link_phases: np.ndarray) -> 'PhasePosterior':
        """Exact phases with zero covariance"""
        length, n_tx, n_rx = link_phases.shape
        return cls(np.asarray(link_phases, dtype=float), np.zeros((length, n_rx, n_tx, n_tx)))

    @property
    def length(self) -> int:
        return self.theta_hat.shape[0]

    def variances(self) -> np.ndarray:
        """[L, N_t, N_r] diagonal variances aligned with theta_hat"""
        return np.diagonal(self.covariance, axis1=2, axis2=3).transpose(0, 2, 1)


# ====================
# KERNELS
# ====================

@njit(cache=True)
def _wrap(values):
    return np.mod(values + np.pi, 2.0 * np.pi) - np.pi


@njit(cache=True)
def _ekf_kernel(samples, gains, soft_mean, soft_var, n0, q, x0, p0, start):
    length = samples.shape[0]
    n_tx = q.shape[0]
    x_pred = np.zeros((length, n_tx))
    p_pred = np.zeros((length, n_tx, n_tx))
    x_filt = np.zeros((length, n_tx))
    p_filt = np.zeros((length, n_tx, n_tx))
    identity = np.eye(n_tx)
    repairs = 0
    skipped = 0

    x = x0.copy()
    p = p0.copy()
    for k in range(length):
        if k > 0 and k >= start:
            p = p + q
        x_pred[k] = x
        p_pred[k] = p

        g = gains * soft_mean[k]
        if k < start:
            pass  # summarized by x0, p0
        elif np.max(np.abs(g)) < 1e-6:
            skipped += 1
        else:
            w = g * np.exp(1j * x)
            predicted = np.sum(w)
            h = np.empty((2, n_tx))
            for m in range(n_tx):
                h[0, m] = -w[m].imag
                h[1, m] = w[m].real
            noise = 0.5 * (n0 + np.sum(np.abs(gains) ** 2 * soft_var[k]))
            r = noise * np.eye(2)
            s = h @ p @ h.T + r
            gain = p @ h.T @ np.linalg.inv(s)
            innovation = np.array([samples[k].real - predicted.real, samples[k].imag - predicted.imag])
            x = x + _wrap(gain @ innovation)
            ikh = identity - gain @ h
            p = ikh @ p @ ikh.T + gain @ r @ gain.T

        p = 0.5 * (p + p.T)
        eigenvalues, eigenvectors = np.linalg.eigh(p)
        if eigenvalues[0] < 0.0:
            repairs += 1
            eigenvalues = np.maximum(eigenvalues, 0.0)
            p = eigenvectors @ np.diag(eigenvalues) @ eigenvectors.T
            p = 0.5 * (p + p.T)
        x_filt[k] = x
        p_filt[k] = p
    return x_pred, p_pred, x_filt, p_filt, repairs, skipped


@njit(cache=True)
def _rts_kernel(x_pred, p_pred, x_filt, p_filt):
    length = x_filt.shape[0]
    x_s = x_filt.copy()
    p_s = p_filt.copy()
    for k in range(length - 2, -1, -1):
        c = p_filt[k] @ np.linalg.pinv(p_pred[k + 1])
        x_s[k] = x_filt[k] + c @ _wrap(x_s[k + 1] - x_pred[k + 1])
        p = p_filt[k] + c @ (p_s[k + 1] - p_pred[k + 1]) @ c.T
        p_s[k] = 0.5 * (p + p.T)
    return x_s, p_s


# ====================
# FILTER AND SMOOTHER
# ====================

@dataclass
class SmootherInit:
    """
    Initial mean [N_r, N_t] and covariance [N_r, N_t, N_t] of the filter

    Indices before start hold the initial state without a measurement update;
    a preamble fit already carries those measurements.
    """
    mean: np.ndarray
    covariance: np.ndarray
    start: int = 0


def preamble_init(
    samples: np.ndarray,
    pilot_symbols: np.ndarray,
    preamble_len: int,
    gains: np.ndarray,
    n0: float,
    model: ProcessModel,
) -> SmootherInit:
    """
    Least-squares link-phase fit over the preamble

    The initial covariance is N0 / (2 sum |p|^2) I plus half the preamble's
    accumulated process noise, and the filter resumes updates after the
    preamble. Without a usable preamble the mean is zero, the variance pi^2/3
    and every index is updated.
    """
    samples = np.asarray(samples, dtype=complex)
    n_rx = samples.shape[1]
    n_tx = model.covariance.shape[0]
    mean = np.zeros((n_rx, n_tx))
    covariance = np.repeat((UNINFORMED_VARIANCE * np.eye(n_tx))[None], n_rx, axis=0)
    if preamble_len < n_tx or preamble_len == 0:
        logger.debug("No usable preamble; smoother starts uninformed")
        return SmootherInit(mean, covariance)

    block = np.asarray(pilot_symbols[:preamble_len], dtype=complex)
    energy = np.sum(np.abs(block) ** 2, axis=0)
    for n in range(n_rx):
        fitted, *_ = np.linalg.lstsq(block, samples[:preamble_len, n], rcond=None)
        mean[n] = np.angle(fitted * np.conj(gains[:, n]))
        link_energy = energy * np.abs(gains[:, n]) ** 2
        floor = n0 / (2.0 * np.maximum(link_energy, 1e-12))
        covariance[n] = np.diag(floor) + 0.5 * preamble_len * model.covariance
    return SmootherInit(mean, covariance, start=preamble_len)


def ekf_forward(
    samples: np.ndarray,
    soft: SoftSymbols,
    gains: np.ndarray,
    n0: float,
    model: ProcessModel,
    init: SmootherInit,
    diagnostics: Optional[DetectorDiagnostics] = None,
) -> FilteredTrack:
    """
    Extended Kalman filter per receive antenna on the stacked real/imag measurement

    Indices before init.start are held at the initial state. Measurements
    with every |h c_bar| below 1e-6 are skipped; the state
    correction is wrapped to [-pi, pi) while the state itself stays unwrapped.
    """
    samples = np.asarray(samples, dtype=complex)
    length, n_rx = samples.shape
    n_tx = model.covariance.shape[0]
    if soft.mean.shape != (length, n_tx):
        raise FrameLayoutError(f"Soft symbols must be {(length, n_tx)}, got {soft.mean.shape}")

    predicted_mean = np.zeros((length, n_rx, n_tx))
    predicted_cov = np.zeros((length, n_rx, n_tx, n_tx))
    filtered_mean = np.zeros((length, n_rx, n_tx))
    filtered_cov = np.zeros((length, n_rx, n_tx, n_tx))
    soft_mean = np.ascontiguousarray(soft.mean, dtype=complex)
    soft_var = np.ascontiguousarray(soft.variance, dtype=float)
    q = np.ascontiguousarray(model.covariance, dtype=float)

    for n in range(n_rx):
        x_pred, p_pred, x_filt, p_filt, repairs, skipped = _ekf_kernel(
            np.ascontiguousarray(samples[:, n]), np.ascontiguousarray(gains[:, n], dtype=complex),
            soft_mean, soft_var, float(n0), q,
            np.ascontiguousarray(init.mean[n], dtype=float), np.ascontiguousarray(init.covariance[n], dtype=float),
            int(init.start),
        )
        if repairs:
            logger.warning(f"Covariance repaired {repairs} time(s) on receive antenna {n}")
        if diagnostics is not None:
            diagnostics.psd_repairs += int(repairs)
            diagnostics.skipped_updates += int(skipped)
        predicted_mean[:, n], predicted_cov[:, n] = x_pred, p_pred
        filtered_mean[:, n], filtered_cov[:, n] = x_filt, p_filt

    if not np.all(np.isfinite(filtered_mean)):
        raise NumericalError("Non-finite filtered phase estimate")
    return FilteredTrack(predicted_mean, predicted_cov, filtered_mean, filtered_cov)


def rts_backward(filtered: FilteredTrack) -> PhasePosterior:
    """Rauch-Tung-Striebel pass; returns smoothed means and covariances"""
    length, n_rx, n_tx = filtered.filtered_mean.shape
    theta_hat = np.zeros((length, n_tx, n_rx))
    covariance = np.zeros((length, n_rx, n_tx, n_tx))
    for n in range(n_rx):
        x_s, p_s = _rts_kernel(
            np.ascontiguousarray(filtered.predicted_mean[:, n]),
            np.ascontiguousarray(filtered.predicted_cov[:, n]),
            np.ascontiguousarray(filtered.filtered_mean[:, n]),
            np.ascontiguousarray(filtered.filtered_cov[:, n]),
        )
        theta_hat[:, :, n] = x_s
        covariance[:, n] = p_s
    if not np.all(np.isfinite(theta_hat)):
        raise NumericalError("Non-finite smoothed phase estimate")
    return PhasePosterior(theta_hat, covariance)


def smooth_phases(
    samples: np.ndarray,
    soft: SoftSymbols,
    gains: np.ndarray,
    n0: float,
    model: ProcessModel,
    init: SmootherInit,
    diagnostics: Optional[DetectorDiagnostics] = None,
) -> PhasePosterior:
    """Forward filter followed by the backward smoother"""
    return rts_backward(ekf_forward(samples, soft, gains, n0, model, init, diagnostics))
