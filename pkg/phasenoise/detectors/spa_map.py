"""
SPA-MAP Detectors
Receivers built on the Tikhonov message recursions, plus the genie-aided
benchmark that runs them with every transmitted symbol known.
"""

from phasenoise.beliefs import SymbolPriors
from phasenoise.detectors.base_detector import BaseDetector, DetectionResult, DetectorKind, ReceiverContext
from phasenoise.diagnostics import DetectorDiagnostics
from phasenoise.errors import ConfigError
from phasenoise.spa import SpaParams, spa_map_run


class SpaMapDetector(BaseDetector):
    """One SPA-MAP pass per call; prior refresh belongs to the caller"""

    kind = DetectorKind.SPA_MAP

    def message_priors(self, ctx: ReceiverContext, priors: SymbolPriors) -> SymbolPriors:
        """Priors that drive the phase messages"""
        return priors

    def extrinsic_beliefs(
        self,
        ctx: ReceiverContext,
        priors: SymbolPriors,
        diagnostics: DetectorDiagnostics,
    ) -> DetectionResult:
        params = SpaParams(
            sigma2_t=self.settings.sigma2_t,
            sigma2_r=self.settings.sigma2_r,
            cross_term=self.settings.cross_term,
            frame_index=ctx.frame_index,
            diagnostics=diagnostics,
        )
        extrinsic = spa_map_run(
            ctx.samples, ctx.n0, self.message_priors(ctx, priors), ctx.candidates, params, ctx.gains,
        )
        posterior = extrinsic.combine(priors.joint_log_prior(ctx.candidates))
        return DetectionResult(extrinsic=extrinsic, posterior=posterior, diagnostics=diagnostics)


class GenieSpaMapDetector(SpaMapDetector):
    """
    Benchmark receiver: messages built from delta priors at the true symbols

    Decisions still combine the extrinsic beliefs with the regular priors, so
    a symbol's own value never leaks into its decision.
    """

    kind = DetectorKind.GENIE_SPA_MAP

    def message_priors(self, ctx: ReceiverContext, priors: SymbolPriors) -> SymbolPriors:
        if ctx.true_symbol_indices is None:
            raise ConfigError("genie-spa-map requires the transmitted symbols in the receiver context")
        return SymbolPriors.delta(ctx.true_symbol_indices, ctx.candidates.constellation.size)
