"""
Monte Carlo Runner
Seeded frame simulation, per-point stopping rules and the E_b/N_0 x detector
sweep, serial or over a process pool.
"""

import subprocess
import time
from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

from config.settings import SimConfig, runtime
from phasenoise.beliefs import CandidateSet, candidate_set
from phasenoise.channel import (
    EBN0_FORMULA,
    Constellation,
    PilotPattern,
    apply_channel,
    build_frame,
    ebn0_to_n0,
    get_constellation,
    rayleigh_gains,
    sample_phase_trajectories,
    unit_gains,
)
from phasenoise.coding import CodedLayout, LdpcCode, build_coded_frame, load_code, turbo_run
from phasenoise.detectors import BaseDetector, ReceiverContext, create_detector
from phasenoise.diagnostics import DetectorDiagnostics
from phasenoise.harness.results import ErrorCounts, ResultRow, SweepResult
from utils.seeding import frame_rng
from utils.worker_manager import WorkerManager


def git_revision() -> str:
    """Short hash of the checked-out revision, or UNKNOWN outside a git work tree"""
    try:
        return subprocess.check_output(
            ["git", "rev-parse", "--short", "HEAD"], text=True, stderr=subprocess.DEVNULL,
        ).strip()
    except Exception:
        return "UNKNOWN"


@dataclass
class PointSetup:
    """Everything fixed across the frames of one (detector, E_b/N_0) point"""
    config: SimConfig
    detector: BaseDetector
    constellation: Constellation
    pattern: PilotPattern
    candidates: CandidateSet
    layout: Optional[CodedLayout]
    frame_length: int
    n0: float

    @property
    def code_rate(self) -> float:
        return self.layout.code.rate if self.layout else 1.0


_CODE_CACHE: Dict[Tuple[str, str], LdpcCode] = {}
_SETUP_CACHE: Dict[Tuple[str, str, float], PointSetup] = {}


def _load_ldpc(reference: str, codes_dir: str) -> LdpcCode:
    key = (reference, codes_dir)
    if key not in _CODE_CACHE:
        _CODE_CACHE[key] = LdpcCode(load_code(reference, codes_dir))
    return _CODE_CACHE[key]


def coded_layout(config: SimConfig, codes_dir: Optional[str] = None) -> Optional[CodedLayout]:
    """Layout of the configured code over the frame, or None for uncoded runs"""
    if not config.coded:
        return None
    code = _load_ldpc(config.code, codes_dir or runtime.codes_dir)
    return CodedLayout(
        code, get_constellation(config.constellation), config.pilot_pattern, config.n_tx, config.interleaver_seed,
    )


def prepare_point(config: SimConfig, detector_name: str, ebn0_db: float, codes_dir: Optional[str] = None) -> PointSetup:
    """Build (and cache per process) the fixed objects of one sweep point"""
    key = (config.config_hash(), detector_name, float(ebn0_db))
    if key in _SETUP_CACHE:
        return _SETUP_CACHE[key]

    constellation = get_constellation(config.constellation)
    pattern = config.pilot_pattern
    layout = coded_layout(config, codes_dir)
    if layout is not None:
        frame_length = layout.frame_length
        data_fraction = layout.data_fraction
    else:
        frame_length = config.frame_length
        n_data = int(np.count_nonzero(~pattern.mask(frame_length)))
        data_fraction = n_data / frame_length if n_data else 1.0
    code_rate = layout.code.rate if layout else 1.0
    n0 = ebn0_to_n0(ebn0_db, constellation.bits_per_symbol, code_rate, data_fraction)

    setup = PointSetup(
        config=config,
        detector=create_detector(detector_name, config.detector_settings()),
        constellation=constellation,
        pattern=pattern,
        candidates=candidate_set(constellation, config.n_tx),
        layout=layout,
        frame_length=frame_length,
        n0=n0,
    )
    _SETUP_CACHE[key] = setup
    logger.debug(f"Point prepared: {detector_name} @ {ebn0_db} dB, L={frame_length}, N0={n0:.6g}")
    return setup


def simulate_frame(setup: PointSetup, point_index: int, frame_index: int) -> Tuple[ErrorCounts, DetectorDiagnostics]:
    """
    Simulate and detect one frame; errors are counted on data positions only

    The frame generator is seeded from (master seed, frame, point), drawing in
    order the gains, the payload, the phase paths and the noise.
    """
    config = setup.config
    rng = frame_rng(config.seed, frame_index, point_index)
    if config.channel == 'rayleigh-known':
        gains = rayleigh_gains(config.n_tx, config.n_rx, rng)
    else:
        gains = unit_gains(config.n_tx, config.n_rx)

    coded = None
    if setup.layout is not None:
        coded = build_coded_frame(setup.layout, rng, config.pilot_seed)
        frame = coded.frame
    else:
        frame = build_frame(
            None, setup.constellation, setup.pattern, setup.frame_length, config.n_tx,
            rng=rng, pilot_seed=config.pilot_seed,
        )
    trajectory = sample_phase_trajectories(
        frame.length, config.n_tx, config.n_rx, config.sigma2_t, config.sigma2_r, rng,
    )
    received = apply_channel(frame, trajectory, gains, setup.n0, rng)
    ctx = ReceiverContext.from_frame(frame, received, setup.candidates, frame_index, trajectory.link_phases)

    data = frame.data_positions
    if coded is not None:
        outcome = turbo_run(ctx, setup.detector, setup.layout, config.n_global, config.bp_max_iters)
        detection = outcome.detection
        bit_errors = int(np.count_nonzero(outcome.info_bits != coded.info_bits))
        bits = int(coded.info_bits.size)
    else:
        detection = setup.detector.detect(ctx)
        decided_bits = setup.constellation.indices_to_bits(detection.hard_decisions()[data])
        bit_errors = int(np.count_nonzero(decided_bits != frame.bits))
        bits = int(frame.bits.size)

    decided = detection.hard_decisions()[data]
    symbol_errors = int(np.count_nonzero(decided != frame.symbol_indices[data]))
    counts = ErrorCounts(
        bits=bits,
        bit_errors=bit_errors,
        symbols=int(decided.size),
        symbol_errors=symbol_errors,
        frames=1,
        frame_errors=int(bit_errors > 0),
    )
    return counts, detection.diagnostics


def _frame_task(
    config_values: Dict[str, Any],
    detector_name: str,
    ebn0_db: float,
    codes_dir: str,
    point_index: int,
    frame_index: int,
) -> Tuple[ErrorCounts, DetectorDiagnostics]:
    """Pool entry point; workers rebuild the point setup once and reuse it"""
    setup = prepare_point(SimConfig.from_dict(config_values), detector_name, ebn0_db, codes_dir)
    return simulate_frame(setup, point_index, frame_index)


def should_stop(config: SimConfig, counts: ErrorCounts) -> bool:
    """Stop at max_frames, or once min_frames is reached and either error target is met"""
    if counts.frames >= config.max_frames:
        return True
    if counts.frames < config.min_frames:
        return False
    return counts.bit_errors >= config.min_bit_errors or counts.frame_errors >= config.min_frame_errors


@dataclass
class PointOutcome:
    row: ResultRow
    diagnostics: DetectorDiagnostics = field(default_factory=DetectorDiagnostics)
    wall_time: float = 0.0


def run_point(
    config: SimConfig,
    detector_name: str,
    ebn0_db: float,
    point_index: int = 0,
    pool: Optional[Executor] = None,
    codes_dir: Optional[str] = None,
) -> PointOutcome:
    """
    Simulate frames of one point until the stop rule fires

    Frames run in blocks of batch_frames and the stop rule is only checked
    between blocks, so the frame count does not depend on worker count. An
    interrupt returns the completed frames as a partial row.
    """
    codes_dir = codes_dir or runtime.codes_dir
    started = time.perf_counter()
    setup = prepare_point(config, detector_name, ebn0_db, codes_dir)
    counts = ErrorCounts()
    diagnostics = DetectorDiagnostics()
    config_values = config.to_dict()
    partial = False

    try:
        while not should_stop(config, counts):
            remaining = config.max_frames - counts.frames
            frame_indices = range(counts.frames, counts.frames + min(config.batch_frames, remaining))
            if pool is None:
                results = [simulate_frame(setup, point_index, index) for index in frame_indices]
            else:
                futures = [
                    pool.submit(_frame_task, config_values, detector_name, ebn0_db, codes_dir, point_index, index)
                    for index in frame_indices
                ]
                results = [future.result() for future in futures]
            for frame_counts, frame_diagnostics in results:
                counts.add(frame_counts)
                diagnostics.merge(frame_diagnostics)
            logger.debug(
                f"{detector_name} @ {ebn0_db} dB: {counts.frames} frames, "
                f"{counts.bit_errors} bit errors, {counts.frame_errors} frame errors"
            )
    except KeyboardInterrupt:
        logger.warning(f"Interrupted at {detector_name} @ {ebn0_db} dB after {counts.frames} frames")
        partial = True

    row = ResultRow.from_counts(detector_name, ebn0_db, counts, partial=partial)
    elapsed = time.perf_counter() - started
    logger.info(
        f"{detector_name} @ {ebn0_db:g} dB: BER={row.ber:.3e} SER={row.ser:.3e} FER={row.fer:.3e} "
        f"({counts.frames} frames, {elapsed:.1f}s)"
    )
    if diagnostics.total:
        logger.warning(f"{detector_name} @ {ebn0_db:g} dB numerical repairs: {diagnostics.to_dict()}")
    return PointOutcome(row, diagnostics, elapsed)


def sweep_metadata(config: SimConfig) -> Dict[str, Any]:
    """Metadata common to every sweep of a config"""
    layout = coded_layout(config)
    return {
        'config': config.to_dict(),
        'config_hash': config.config_hash(),
        'seed': config.seed,
        'pilot_seed': config.pilot_seed,
        'pilot_pattern': config.pilot_pattern.describe(),
        'git_revision': git_revision(),
        'ebn0_formula': EBN0_FORMULA,
        'coded_layout': layout.describe() if layout else None,
    }


def run_sweep(config: SimConfig, threads: Optional[int] = None) -> SweepResult:
    """
    Run every (detector, E_b/N_0) point of a config

    The point index is the position in the E_b/N_0 grid, so all detectors at
    one E_b/N_0 see the same frames. A failing point is recorded with
    status=failed; an interrupt ends the sweep after flagging the current point
    partial.
    """
    threads = threads or runtime.threads
    logger.info(
        f"Sweep '{config.name}': {len(config.detectors)} detector(s) x {len(config.ebn0_db)} point(s), "
        f"{threads} worker(s)"
    )
    result = SweepResult(metadata=sweep_metadata(config))
    result.metadata.update({'wall_time_s': {}, 'diagnostics': {}, 'threads': threads})

    manager = WorkerManager(threads)
    pool = manager.get_pool() if manager.parallel else None
    started = time.perf_counter()
    try:
        for point_index, ebn0_db in enumerate(config.ebn0_db):
            for detector_name in config.detectors:
                label = f"{detector_name}@{ebn0_db:g}"
                try:
                    outcome = run_point(config, detector_name, ebn0_db, point_index, pool)
                except Exception as exc:
                    logger.error(f"Point {label} failed: {exc}")
                    result.rows.append(ResultRow.failed(detector_name, ebn0_db))
                    continue
                result.rows.append(outcome.row)
                result.metadata['wall_time_s'][label] = round(outcome.wall_time, 3)
                result.metadata['diagnostics'][label] = outcome.diagnostics.to_dict()
                if outcome.row.partial:
                    result.metadata['interrupted'] = True
                    return result
    finally:
        if pool is not None:
            manager.shutdown(cancel_pending=result.metadata.get('interrupted', False))
        result.metadata['total_wall_time_s'] = round(time.perf_counter() - started, 3)
    logger.info(f"Sweep '{config.name}' complete: {len(result.rows)} row(s)")
    return result
