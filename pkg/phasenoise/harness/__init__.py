"""
Harness
Monte Carlo sweeps, result files and oracle self-checks
"""

from phasenoise.harness.oracles import ORACLES, OracleCheck, OracleReport, oracle_check
from phasenoise.harness.results import ErrorCounts, ResultRow, SweepResult, wilson_interval
from phasenoise.harness.runner import (
    EBN0_FORMULA,
    PointOutcome,
    git_revision,
    prepare_point,
    run_point,
    run_sweep,
    simulate_frame,
)

__all__ = [
    'EBN0_FORMULA',
    'ErrorCounts',
    'ORACLES',
    'OracleCheck',
    'OracleReport',
    'PointOutcome',
    'ResultRow',
    'SweepResult',
    'git_revision',
    'oracle_check',
    'prepare_point',
    'run_point',
    'run_sweep',
    'simulate_frame',
    'wilson_interval',
]
