"""
SPA-MAP Receiver
Tikhonov-parameterized forward/backward message recursions over the link
phases and the joint-symbol posterior they induce, for any N_t x N_r.
"""

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from numba import njit
from loguru import logger

from phasenoise.beliefs import CandidateSet, FrameBeliefs, SymbolPriors, normalize_log
from phasenoise.channel import Constellation
from phasenoise.circmath import BivariateTikhonovParam, log_bessel_i0, wrap_angle
from phasenoise.diagnostics import DetectorDiagnostics
from phasenoise.errors import DomainError, FrameLayoutError, NumericalError

OVERFLOW_THRESHOLD = 1e8
CROSS_TERM_MODES = ('projected', 'literal')
_POSTERIOR_CHUNK = 256


# ====================
# PRIOR MOMENTS
# ====================

@dataclass
class PriorMoments:
    """
    Moment-matched Gaussian summary of the symbol priors

    Attributes:
        alpha: [..., N_t] mean symbols
        beta: [..., N_t] mean energies
        gamma: [...] (unit gains) or [..., N_r] innovation variances
    """
    alpha: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray


def prior_moments(
    prior: Union[SymbolPriors, np.ndarray],
    constellation: Constellation,
    n0: float,
    gains: Optional[np.ndarray] = None,
) -> PriorMoments:
    """
    Moment matching of per-antenna symbol pmfs

    gamma = sum_m |h_mn|^2 (beta_m - |alpha_m|^2) + N0; with no gains the unit-gain
    form sum_m beta_m + N0 - sum_m |alpha_m|^2 is returned without an N_r axis.

    Args:
        prior: SymbolPriors or pmf array [..., N_t, M]
        constellation: Signal set the pmfs refer to
        n0: Noise variance
        gains: Optional [N_t, N_r] known gains

    Returns:
        PriorMoments
    """
    pmf = prior.pmf if isinstance(prior, SymbolPriors) else np.asarray(prior, dtype=float)
    if pmf.shape[-1] != constellation.size:
        raise FrameLayoutError(f"Prior has {pmf.shape[-1]} points, constellation has {constellation.size}")
    alpha = pmf @ constellation.points
    beta = pmf @ constellation.energies
    spread = np.clip(beta - np.abs(alpha) ** 2, 0.0, None)
    if gains is None:
        gamma = spread.sum(axis=-1) + n0
    else:
        gamma = spread @ (np.abs(np.asarray(gains)) ** 2) + n0
    return PriorMoments(alpha=alpha, beta=beta, gamma=gamma)


# ====================
# LIKELIHOOD PARAMETERS
# ====================

@dataclass
class LikelihoodParams:
    """
    Tikhonov form of the moment-matched likelihood at one time index

    Attributes:
        link: [N_t, N_r] per-link parameters (2/gamma_n) r_n (h_mn alpha_m)^*
        cross: [N_t, N_t] coupling parameters, upper triangle used
    """
    link: np.ndarray
    cross: np.ndarray

    def bivariate(self) -> BivariateTikhonovParam:
        """Triple (x1, x2, x3) of the two-transmit, one-receive case"""
        if self.link.shape != (2, 1):
            raise FrameLayoutError(f"Bivariate form needs a 2x1 link array, got {self.link.shape}")
        return BivariateTikhonovParam.from_magnitude(self.link[0, 0], self.link[1, 0], abs(self.cross[0, 1]))


def _likelihood_increments(
    samples: np.ndarray,
    alpha: np.ndarray,
    gamma: np.ndarray,
    gains: np.ndarray,
) -> tuple:
    """Vectorized link/cross increments for all k: [L, N_t, N_r] and [L, N_t, N_t]"""
    effective = alpha[:, :, None] * gains[None, :, :]
    weight = 2.0 / gamma
    link = weight[:, None, :] * samples[:, None, :] * np.conj(effective)
    cross = np.einsum('kn,kln,kmn->kml', weight, effective, np.conj(effective))
    cross = np.triu(cross, k=1)
    return link, cross


def _broadcast_gamma(gamma: np.ndarray, length: int, n_rx: int) -> np.ndarray:
    gamma = np.asarray(gamma, dtype=float)
    if gamma.ndim == 0:
        gamma = np.full((length, n_rx), float(gamma))
    elif gamma.ndim == 1:
        gamma = np.repeat(gamma[:, None], n_rx, axis=1) if gamma.shape[0] == length else np.broadcast_to(gamma, (length, n_rx))
    if np.any(gamma <= 0):
        raise DomainError("Innovation variance gamma must be positive")
    return gamma


def pd_params(
    r_k: np.ndarray,
    moments: PriorMoments,
    gains: Optional[np.ndarray] = None,
) -> LikelihoodParams:
    """
    Likelihood parameters for one time index

    A zero mean symbol yields exactly zero parameters (uniform direction).

    Args:
        r_k: [N_r] received samples
        moments: Moments with alpha of shape [N_t]
        gains: Optional [N_t, N_r] gains (unit if None)

    Raises:
        DomainError: If gamma is not positive
    """
    r_k = np.atleast_1d(np.asarray(r_k, dtype=complex))
    alpha = np.atleast_1d(np.asarray(moments.alpha, dtype=complex))
    n_tx, n_rx = alpha.size, r_k.size
    gains = np.ones((n_tx, n_rx), dtype=complex) if gains is None else np.asarray(gains, dtype=complex)
    gamma = _broadcast_gamma(np.atleast_1d(moments.gamma), 1, n_rx)
    link, cross = _likelihood_increments(r_k[None, :], alpha[None, :], gamma, gains)
    return LikelihoodParams(link=link[0], cross=cross[0])


# ====================
# MESSAGE RECURSIONS
# ====================

@dataclass
class TikhonovMessageState:
    """
    Forward or backward message at one time index

    Attributes:
        a: [N_t, N_r] per-link Tikhonov parameters
        a_cross: [N_t, N_t] coupling parameters, strict upper triangle used
    """
    a: np.ndarray
    a_cross: np.ndarray

    @classmethod
    def uniform(cls, n_tx: int, n_rx: int) -> 'TikhonovMessageState':
        return cls(np.zeros((n_tx, n_rx), dtype=complex), np.zeros((n_tx, n_tx), dtype=complex))

    def constraint_residual(self) -> float:
        """
        Largest angular deviation of the coupling terms from angle(a_m) - angle(a_l)

        Pairs with a zero parameter are skipped; returns 0 when none remain.
        """
        n_tx = self.a.shape[0]
        worst = 0.0
        for m in range(n_tx):
            for l in range(m + 1, n_tx):
                pair = np.sum(self.a[m] * np.conj(self.a[l]))
                if abs(pair) == 0 or abs(self.a_cross[m, l]) == 0:
                    continue
                worst = max(worst, abs(wrap_angle(np.angle(self.a_cross[m, l]) - np.angle(pair))))
        return float(worst)


@njit(cache=True)
def _message_update(a_prev, cross_prev, link_inc, cross_inc, sigma2_t, sigma2_r):
    n_tx, n_rx = a_prev.shape
    a_bar = a_prev + link_inc
    for n in range(n_rx):
        total = 0.0
        for m in range(n_tx):
            total += abs(a_bar[m, n])
        scale = 1.0 / (1.0 + sigma2_r * total)
        for m in range(n_tx):
            a_bar[m, n] = a_bar[m, n] * scale

    cross_bar = cross_prev + cross_inc
    divisor = np.empty(n_tx)
    for m in range(n_tx):
        link_mag = 0.0
        for n in range(n_rx):
            link_mag += abs(a_bar[m, n])
        cross_mag = 0.0
        for l in range(n_tx):
            if l < m:
                cross_mag += abs(cross_bar[l, m])
            elif l > m:
                cross_mag += abs(cross_bar[m, l])
        divisor[m] = 1.0 + sigma2_t * abs(link_mag - cross_mag)

    a_new = np.empty_like(a_prev)
    for m in range(n_tx):
        for n in range(n_rx):
            a_new[m, n] = a_bar[m, n] / divisor[m]
    cross_new = np.zeros_like(cross_prev)
    for m in range(n_tx):
        for l in range(m + 1, n_tx):
            cross_new[m, l] = cross_bar[m, l] / (divisor[m] * divisor[l])
    return a_new, cross_new


@njit(cache=True)
def _forward_pass(link_inc, cross_inc, sigma2_t, sigma2_r):
    length, n_tx, n_rx = link_inc.shape
    a = np.zeros((length, n_tx, n_rx), dtype=np.complex128)
    cross = np.zeros((length, n_tx, n_tx), dtype=np.complex128)
    for k in range(1, length):
        a_next, cross_next = _message_update(a[k - 1], cross[k - 1], link_inc[k - 1], cross_inc[k - 1], sigma2_t, sigma2_r)
        a[k] = a_next
        cross[k] = cross_next
    return a, cross


def _check_finite(values: np.ndarray, label: str, frame_index: Optional[int]) -> None:
    finite = np.isfinite(values.reshape(values.shape[0], -1)).all(axis=1)
    if not finite.all():
        step = int(np.argmin(finite))
        logger.error(f"Non-finite {label} message at k={step}")
        raise NumericalError(f"Non-finite {label} message", frame_index=frame_index, step=step)


def _step(
    state: TikhonovMessageState,
    r: np.ndarray,
    moments: PriorMoments,
    sigma2_t: float,
    sigma2_r: float,
    gains: Optional[np.ndarray],
    direction: str,
) -> TikhonovMessageState:
    params = pd_params(r, moments, gains)
    a, cross = _message_update(
        state.a.astype(complex), state.a_cross.astype(complex), params.link, params.cross,
        float(sigma2_t), float(sigma2_r),
    )
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(cross))):
        raise NumericalError(f"Non-finite {direction} message")
    return TikhonovMessageState(a, cross)


def forward_step(
    state: TikhonovMessageState,
    r_prev: np.ndarray,
    moments_prev: PriorMoments,
    sigma2_t: float,
    sigma2_r: float,
    gains: Optional[np.ndarray] = None,
) -> TikhonovMessageState:
    """
    Advance the forward message from k-1 to k

    Accumulate the likelihood at k-1, smear by the receive increment (pooled over
    transmit antennas), then by the transmit increment (pooled over receive
    antennas net of the coupling terms).
    """
    return _step(state, r_prev, moments_prev, sigma2_t, sigma2_r, gains, 'forward')


def backward_step(
    state: TikhonovMessageState,
    r_next: np.ndarray,
    moments_next: PriorMoments,
    sigma2_t: float,
    sigma2_r: float,
    gains: Optional[np.ndarray] = None,
) -> TikhonovMessageState:
    """Move the backward message from k+1 to k; the time mirror of forward_step"""
    return _step(state, r_next, moments_next, sigma2_t, sigma2_r, gains, 'backward')


@dataclass
class MessageTrack:
    """Forward and backward messages for a whole frame"""
    forward_a: np.ndarray
    forward_cross: np.ndarray
    backward_a: np.ndarray
    backward_cross: np.ndarray

    def forward(self, k: int) -> TikhonovMessageState:
        return TikhonovMessageState(self.forward_a[k], self.forward_cross[k])

    def backward(self, k: int) -> TikhonovMessageState:
        return TikhonovMessageState(self.backward_a[k], self.backward_cross[k])

    @property
    def combined_a(self) -> np.ndarray:
        return self.forward_a + self.backward_a

    def phase_estimates(self) -> np.ndarray:
        """[L, N_t, N_r] link-phase estimates implied by the combined messages"""
        return np.angle(self.combined_a)


def run_recursions(
    samples: np.ndarray,
    moments: PriorMoments,
    sigma2_t: float,
    sigma2_r: float,
    gains: Optional[np.ndarray] = None,
    frame_index: Optional[int] = None,
) -> MessageTrack:
    """
    Forward and backward passes over a frame, starting from uniform messages

    The backward pass runs the forward kernel on the time-reversed frame.
    """
    samples = np.asarray(samples, dtype=complex)
    length, n_rx = samples.shape
    alpha = np.asarray(moments.alpha, dtype=complex)
    n_tx = alpha.shape[1]
    gains = np.ones((n_tx, n_rx), dtype=complex) if gains is None else np.asarray(gains, dtype=complex)
    gamma = _broadcast_gamma(moments.gamma, length, n_rx)

    link_inc, cross_inc = _likelihood_increments(samples, alpha, gamma, gains)
    link_inc = np.ascontiguousarray(link_inc)
    cross_inc = np.ascontiguousarray(cross_inc)

    fwd_a, fwd_cross = _forward_pass(link_inc, cross_inc, float(sigma2_t), float(sigma2_r))
    rev_a, rev_cross = _forward_pass(
        np.ascontiguousarray(link_inc[::-1]), np.ascontiguousarray(cross_inc[::-1]),
        float(sigma2_t), float(sigma2_r),
    )
    _check_finite(fwd_a, "forward", frame_index)
    _check_finite(rev_a, "backward", frame_index)
    return MessageTrack(fwd_a, fwd_cross, rev_a[::-1].copy(), rev_cross[::-1].copy())


# ====================
# SYMBOL POSTERIOR
# ====================

def _posterior_chunk(
    a_sum: np.ndarray,
    cross_sum: np.ndarray,
    samples: np.ndarray,
    n0: float,
    candidates: CandidateSet,
    gains: np.ndarray,
    cross_term: str,
    diagnostics: DetectorDiagnostics,
) -> np.ndarray:
    """Unnormalized log P_u for a block of time indices, shape [B, K]"""
    faded = candidates.symbols[:, :, None] * gains[None, :, :]            # [K, Nt, Nr]
    weight = 2.0 / n0
    z = a_sum[:, None] + weight * samples[:, None, None, :] * np.conj(faded)[None]  # [B, K, Nt, Nr]
    energy = -np.sum(np.abs(faded) ** 2, axis=(1, 2)) / n0                 # [K]

    magnitude = np.abs(z).sum(axis=2)                                       # [B, K, Nr]
    if not np.all(np.isfinite(magnitude)):
        raise NumericalError("Non-finite posterior parameter")

    # One positive factor per time index scales every parameter of that index
    peak = magnitude.reshape(magnitude.shape[0], -1).max(axis=1, initial=0.0)   # [B]
    scale = np.ones_like(peak)
    over = peak > OVERFLOW_THRESHOLD
    if np.any(over):
        scale[over] = OVERFLOW_THRESHOLD / peak[over]
        count = int(np.count_nonzero(over))
        diagnostics.overflow_rescales += count
        logger.warning(f"Rescaled Tikhonov parameters at {count} indices above {OVERFLOW_THRESHOLD:.0e}")
        z = z * scale[:, None, None, None]
        magnitude = magnitude * scale[:, None, None]
    log_weights = scale[:, None] * energy[None, :] + log_bessel_i0(magnitude).sum(axis=-1)

    n_tx = candidates.n_tx
    for m in range(n_tx):
        for l in range(m + 1, n_tx):
            coupling = np.sum(weight * faded[:, l, :] * np.conj(faded[:, m, :]), axis=-1)   # [K]
            z_cross = scale[:, None] * (cross_sum[:, None, m, l] + coupling[None, :])
            if cross_term == 'literal':
                log_weights = log_weights + log_bessel_i0(np.abs(z_cross))
            else:
                pair = np.sum(z[:, :, m, :] * np.conj(z[:, :, l, :]), axis=-1)
                log_weights = log_weights - np.real(z_cross * np.exp(-1j * np.angle(pair)))
    return log_weights


def posterior_log_weights(
    track: MessageTrack,
    samples: np.ndarray,
    n0: float,
    candidates: CandidateSet,
    gains: Optional[np.ndarray] = None,
    cross_term: str = 'projected',
    diagnostics: Optional[DetectorDiagnostics] = None,
) -> np.ndarray:
    """[L, K] unnormalized log P_u for every time index of a frame"""
    if cross_term not in CROSS_TERM_MODES:
        raise DomainError(f"cross_term must be one of {CROSS_TERM_MODES}, got '{cross_term}'")
    if n0 <= 0:
        raise DomainError(f"N0 must be positive for detection, got {n0}")
    samples = np.asarray(samples, dtype=complex)
    length, n_rx = samples.shape
    gains = np.ones((candidates.n_tx, n_rx), dtype=complex) if gains is None else np.asarray(gains, dtype=complex)
    diagnostics = diagnostics if diagnostics is not None else DetectorDiagnostics()

    a_sum = track.forward_a + track.backward_a
    cross_sum = track.forward_cross + track.backward_cross
    out = np.empty((length, candidates.size))
    for start in range(0, length, _POSTERIOR_CHUNK):
        stop = min(start + _POSTERIOR_CHUNK, length)
        out[start:stop] = _posterior_chunk(
            a_sum[start:stop], cross_sum[start:stop], samples[start:stop], n0,
            candidates, gains, cross_term, diagnostics,
        )
    return out


def joint_symbol_posterior(
    fwd: TikhonovMessageState,
    bwd: TikhonovMessageState,
    r_k: np.ndarray,
    n0: float,
    candidates: CandidateSet,
    gains: Optional[np.ndarray] = None,
    cross_term: str = 'projected',
) -> np.ndarray:
    """
    Normalized log P_u(c) over the joint candidates at one time index

    exp(-sum |h c|^2 / N0) * prod_n I0(sum_m |z_mn|) times the coupling factor,
    z_mn = a_f + a_b + (2/N0) r_n (h_mn c_m)^*.
    """
    track = MessageTrack(fwd.a[None], fwd.a_cross[None], bwd.a[None], bwd.a_cross[None])
    samples = np.atleast_1d(np.asarray(r_k, dtype=complex))[None, :]
    log_weights = posterior_log_weights(track, samples, n0, candidates, gains, cross_term)
    return normalize_log(log_weights[0])


# ====================
# RECEIVER
# ====================

@dataclass
class SpaParams:
    """Phase-noise and evaluation settings of one SPA-MAP run"""
    sigma2_t: float
    sigma2_r: float
    cross_term: str = 'projected'
    frame_index: Optional[int] = None
    diagnostics: DetectorDiagnostics = field(default_factory=DetectorDiagnostics)


def spa_map_run(
    samples: np.ndarray,
    n0: float,
    priors: SymbolPriors,
    candidates: CandidateSet,
    params: SpaParams,
    gains: Optional[np.ndarray] = None,
) -> FrameBeliefs:
    """
    One SPA-MAP iteration: moments, forward pass, backward pass, symbol posteriors

    Prior refresh from a decoder is left to the caller.

    Args:
        samples: [L, N_r] received samples
        n0: Noise variance
        priors: Symbol priors, delta at pilot positions
        candidates: Joint candidate set
        params: Phase-noise settings
        gains: Optional known gains [N_t, N_r]

    Returns:
        FrameBeliefs holding the extrinsic beliefs P_u
    """
    n_rx = np.asarray(samples).shape[1]
    gains_arr = np.ones((candidates.n_tx, n_rx), dtype=complex) if gains is None else np.asarray(gains, dtype=complex)
    moments = prior_moments(priors, candidates.constellation, n0, gains_arr)
    track = run_recursions(samples, moments, params.sigma2_t, params.sigma2_r, gains_arr, params.frame_index)
    log_weights = posterior_log_weights(
        track, samples, n0, candidates, gains_arr, params.cross_term, params.diagnostics,
    )
    logger.debug(f"SPA-MAP pass complete: L={log_weights.shape[0]}, K={candidates.size}")
    return FrameBeliefs(log_weights, candidates)
