"""
Smoother Iteration
Alternation between the phase smoother and a symbol-belief rule, shared by the
EKS-based detectors.
"""

from abc import abstractmethod
from typing import Optional

import numpy as np
from loguru import logger

from phasenoise.beliefs import FrameBeliefs, SymbolPriors
from phasenoise.detectors.base_detector import BaseDetector, DetectionResult, ReceiverContext
from phasenoise.diagnostics import DetectorDiagnostics
from phasenoise.errors import ConfigError
from phasenoise.smoother import (
    PhasePosterior,
    SmootherInit,
    preamble_init,
    prepare_measurements,
    process_model,
    smooth_phases,
    soft_stats,
)

FIXED_POINT_TOLERANCE = 1e-3


class SmootherDetector(BaseDetector):
    """
    Detector that alternates the EKF/RTS phase smoother with a belief rule

    Iteration 1 feeds the smoother soft symbols taken from the priors (exact
    pilots, zero-mean data of energy Es when the priors are uniform); later
    iterations use the soft symbols of the previous posterior. The loop stops
    after n_iters passes or once the largest pmf change drops below 1e-3.
    """

    strict_measurements = False

    @abstractmethod
    def log_weights(
        self,
        ctx: ReceiverContext,
        posterior: PhasePosterior,
        iteration: int,
        diagnostics: DetectorDiagnostics,
    ) -> np.ndarray:
        """[L, K] unnormalized extrinsic log-beliefs given the phase posterior"""

    def phase_posterior(
        self,
        ctx: ReceiverContext,
        soft,
        init: SmootherInit,
        model,
        diagnostics: DetectorDiagnostics,
    ) -> PhasePosterior:
        if self.settings.genie_phases:
            if ctx.true_link_phases is None:
                raise ConfigError("genie_phases requires the true link phases in the receiver context")
            return PhasePosterior.genie(ctx.true_link_phases)
        return smooth_phases(ctx.samples, soft, ctx.gains, ctx.n0, model, init, diagnostics)

    def extrinsic_beliefs(
        self,
        ctx: ReceiverContext,
        priors: SymbolPriors,
        diagnostics: DetectorDiagnostics,
    ) -> DetectionResult:
        if self.settings.n_iters < 1:
            raise ConfigError(f"n_iters must be at least 1, got {self.settings.n_iters}")
        constellation = ctx.candidates.constellation
        energy = float(np.mean(constellation.energies))
        model = process_model(ctx.candidates.n_tx, self.settings.sigma2_t, self.settings.sigma2_r)
        init = preamble_init(ctx.samples, ctx.pilot_symbols, ctx.preamble_len, ctx.gains, ctx.n0, model)
        log_prior = priors.joint_log_prior(ctx.candidates)

        soft = soft_stats(priors.pmf, constellation)
        extrinsic: Optional[FrameBeliefs] = None
        posterior: Optional[FrameBeliefs] = None
        phases: Optional[PhasePosterior] = None
        change = float('inf')
        iterations = 0

        for iteration in range(1, self.settings.n_iters + 1):
            measurements = prepare_measurements(soft, ctx.pilot_mask, self.strict_measurements, energy)
            phases = self.phase_posterior(ctx, measurements, init, model, diagnostics)
            extrinsic = FrameBeliefs(self.log_weights(ctx, phases, iteration, diagnostics), ctx.candidates)
            updated = extrinsic.combine(log_prior)
            change = updated.max_change(posterior) if posterior is not None else float('inf')
            posterior = updated
            iterations = iteration
            logger.debug(f"{self.kind.value} frame {ctx.frame_index}: iteration {iteration}, max change {change:.3e}")
            if change < FIXED_POINT_TOLERANCE:
                break
            soft = soft_stats(posterior, constellation)

        return DetectionResult(
            extrinsic=extrinsic,
            posterior=posterior,
            phase_posterior=phases,
            diagnostics=diagnostics,
            iterations=iterations,
            final_change=change if np.isfinite(change) else 0.0,
        )
