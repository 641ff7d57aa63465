"""
Base Detector
Common structure for all receivers: detector kinds, per-frame receiver
context, detection results and the abstract detector interface.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from loguru import logger

from phasenoise.beliefs import CandidateSet, FrameBeliefs, SymbolPriors
from phasenoise.channel import Frame, ReceivedFrame
from phasenoise.diagnostics import DetectorDiagnostics
from phasenoise.errors import ConfigError
from phasenoise.smoother import PhasePosterior


class DetectorKind(Enum):
    """Receiver algorithms; the values are the config and CLI vocabulary"""
    SPA_MAP = 'spa-map'
    GAUSS_MAP = 'gauss-map'
    EUC_MAP = 'euc-map'
    VB_MAP = 'vb-map'
    GENIE_SPA_MAP = 'genie-spa-map'

    @classmethod
    def from_name(cls, name: str) -> 'DetectorKind':
        try:
            return cls(name.lower())
        except ValueError:
            raise ConfigError(
                f"Unknown detector '{name}'. Available: {[kind.value for kind in cls]}"
            ) from None

    @property
    def uses_smoother(self) -> bool:
        return self in (DetectorKind.GAUSS_MAP, DetectorKind.EUC_MAP, DetectorKind.VB_MAP)


@dataclass
class DetectorSettings:
    """
    Algorithm switches shared by the detectors

    Attributes:
        sigma2_t: Transmit phase increment variance (rad^2)
        sigma2_r: Receive phase increment variance (rad^2)
        n_iters: Smoother-detector iterations
        cross_term: SPA coupling evaluation, 'projected' or 'literal'
        gauss_cross_term: Gauss-MAP coupling evaluation, 'projected' or 'magnitude'
        strict_vb: Zero the soft-symbol variance fed to the smoother for VB-MAP
        genie_phases: Give smoother-based detectors the true link phases
    """
    sigma2_t: float
    sigma2_r: float
    n_iters: int = 2
    cross_term: str = 'projected'
    gauss_cross_term: str = 'projected'
    strict_vb: bool = False
    genie_phases: bool = False


@dataclass
class ReceiverContext:
    """Everything a receiver knows about one frame"""
    received: ReceivedFrame
    pilot_mask: np.ndarray
    pilot_symbols: np.ndarray
    preamble_len: int
    candidates: CandidateSet
    frame_index: Optional[int] = None
    true_symbol_indices: Optional[np.ndarray] = None
    true_link_phases: Optional[np.ndarray] = None

    @classmethod
    def from_frame(
        cls,
        frame: Frame,
        received: ReceivedFrame,
        candidates: CandidateSet,
        frame_index: Optional[int] = None,
        link_phases: Optional[np.ndarray] = None,
    ) -> 'ReceiverContext':
        """Context with pilot knowledge plus the genie information held by the simulator"""
        pilot_symbols = np.where(frame.pilot_mask[:, None], frame.symbols, 0.0)
        return cls(
            received=received,
            pilot_mask=frame.pilot_mask,
            pilot_symbols=pilot_symbols,
            preamble_len=int(np.argmin(frame.pilot_mask)) if not frame.pilot_mask.all() else frame.length,
            candidates=candidates,
            frame_index=frame_index,
            true_symbol_indices=frame.symbol_indices,
            true_link_phases=link_phases,
        )

    @property
    def samples(self) -> np.ndarray:
        return self.received.samples

    @property
    def n0(self) -> float:
        return self.received.n0

    @property
    def gains(self) -> np.ndarray:
        return self.received.gains

    @property
    def length(self) -> int:
        return self.received.length


@dataclass
class DetectionResult:
    """
    Output of one detector invocation

    Attributes:
        extrinsic: Beliefs excluding the symbol's own prior
        posterior: extrinsic combined with the prior; hard decisions use this
        phase_posterior: Smoother output, when the detector uses one
        diagnostics: Numerical repair counts
        iterations: Smoother-detector iterations performed
        final_change: Largest pmf change in the last iteration
    """
    extrinsic: FrameBeliefs
    posterior: FrameBeliefs
    phase_posterior: Optional[PhasePosterior] = None
    diagnostics: DetectorDiagnostics = field(default_factory=DetectorDiagnostics)
    iterations: int = 1
    final_change: float = 0.0

    def hard_decisions(self) -> np.ndarray:
        return self.posterior.hard_decisions()


class BaseDetector(ABC):
    """
    Base receiver
    Subclasses turn received samples plus symbol priors into symbol beliefs
    """

    kind: DetectorKind

    def __init__(self, settings: DetectorSettings):
        self.settings = settings
        logger.debug(f"{self.__class__.__name__} created: {settings}")

    @abstractmethod
    def extrinsic_beliefs(
        self,
        ctx: ReceiverContext,
        priors: SymbolPriors,
        diagnostics: DetectorDiagnostics,
    ) -> DetectionResult:
        """Compute beliefs for a frame"""

    def detect(self, ctx: ReceiverContext, priors: Optional[SymbolPriors] = None) -> DetectionResult:
        """
        Run the detector on one frame

        Args:
            ctx: Receiver context
            priors: Symbol priors; uniform if None. Pilot deltas are always applied.

        Returns:
            DetectionResult
        """
        size = ctx.candidates.constellation.size
        pilot_indices = self._pilot_indices(ctx)
        priors = SymbolPriors.with_pilots(priors, ctx.pilot_mask, pilot_indices, size)
        diagnostics = DetectorDiagnostics()
        result = self.extrinsic_beliefs(ctx, priors, diagnostics)
        if diagnostics.total:
            logger.debug(f"{self.kind.value} frame {ctx.frame_index}: diagnostics {diagnostics.to_dict()}")
        return result

    @staticmethod
    def _pilot_indices(ctx: ReceiverContext) -> np.ndarray:
        """Constellation indices of the known pilot symbols; data rows are ignored downstream"""
        points = ctx.candidates.constellation.points
        return np.argmin(np.abs(ctx.pilot_symbols[..., None] - points[None, None, :]), axis=-1)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({self.kind.value})"
