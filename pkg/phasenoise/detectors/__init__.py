"""
Detectors
Receiver algorithms keyed by their configuration names
"""

from typing import Dict, Optional, Type, Union

from phasenoise.beliefs import SymbolPriors
from phasenoise.detectors.base_detector import (
    BaseDetector,
    DetectionResult,
    DetectorKind,
    DetectorSettings,
    ReceiverContext,
)
from phasenoise.detectors.euc_map import EucMapDetector, euc_map_belief, euc_map_log_weights
from phasenoise.detectors.gauss_map import GaussMapDetector, gauss_map_belief, gauss_map_log_weights, solve_u_tilde
from phasenoise.detectors.iteration import SmootherDetector
from phasenoise.detectors.spa_map import GenieSpaMapDetector, SpaMapDetector
from phasenoise.detectors.vb_map import VbMapDetector, vb_belief, vb_log_weights
from phasenoise.errors import ConfigError

DETECTORS: Dict[DetectorKind, Type[BaseDetector]] = {
    DetectorKind.SPA_MAP: SpaMapDetector,
    DetectorKind.GENIE_SPA_MAP: GenieSpaMapDetector,
    DetectorKind.GAUSS_MAP: GaussMapDetector,
    DetectorKind.EUC_MAP: EucMapDetector,
    DetectorKind.VB_MAP: VbMapDetector,
}


def create_detector(kind: Union[str, DetectorKind], settings: DetectorSettings) -> BaseDetector:
    """Instantiate the detector registered for kind"""
    if isinstance(kind, str):
        kind = DetectorKind.from_name(kind)
    return DETECTORS[kind](settings)


def iterate(
    ctx: ReceiverContext,
    kind: Union[str, DetectorKind],
    settings: DetectorSettings,
    priors: Optional[SymbolPriors] = None,
) -> DetectionResult:
    """
    Smoother-detector alternation for the EKS-based kinds

    Raises:
        ConfigError: If kind does not use the smoother
    """
    detector = create_detector(kind, settings)
    if not isinstance(detector, SmootherDetector):
        raise ConfigError(f"iterate needs gauss-map, euc-map or vb-map, got '{detector.kind.value}'")
    return detector.detect(ctx, priors)


__all__ = [
    'BaseDetector',
    'DETECTORS',
    'DetectionResult',
    'DetectorKind',
    'DetectorSettings',
    'EucMapDetector',
    'GaussMapDetector',
    'GenieSpaMapDetector',
    'ReceiverContext',
    'SmootherDetector',
    'SpaMapDetector',
    'VbMapDetector',
    'create_detector',
    'euc_map_belief',
    'euc_map_log_weights',
    'gauss_map_belief',
    'gauss_map_log_weights',
    'iterate',
    'solve_u_tilde',
    'vb_belief',
    'vb_log_weights',
]
