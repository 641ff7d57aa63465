"""
Pytest Configuration and Fixtures
Global test configuration for the phase-noise link simulator
"""

import os
import time
from pathlib import Path

import numpy as np
import pytest
from loguru import logger

from config.settings import SimConfig, runtime
from phasenoise.channel import get_constellation
from phasenoise.coding import LdpcCode, load_alist
from utils.log_setup import LOG_FORMAT
from utils.worker_manager import WorkerManager

DATA_DIR = Path(__file__).parent / 'data'


def pytest_addoption(parser):
    """Add custom command line options"""
    parser.addoption(
        "--slow",
        action="store_true",
        help="Run slow Monte Carlo and grid-oracle tests"
    )
    parser.addoption(
        "--oracle-grid",
        action="store",
        type=int,
        default=64,
        help="Grid points per angle for the grid-oracle tests (acceptance runs use 128)"
    )
    parser.addoption(
        "--smoke-only",
        action="store_true",
        help="Run only smoke tests"
    )


def pytest_configure(config):
    """Configure pytest environment"""
    os.makedirs(runtime.reports_dir, exist_ok=True)
    logger.add(
        f"{runtime.reports_dir}/test_execution.log",
        rotation="10 MB",
        retention="10 days",
        level="DEBUG",
        format=LOG_FORMAT,
    )
    logger.info("=== Test Execution Started ===")
    logger.info(f"Reports directory: {runtime.reports_dir}")
    logger.info(f"Oracle grid: {config.getoption('--oracle-grid')}")


def pytest_collection_modifyitems(config, items):
    """Modify test collection based on command line options"""
    if config.getoption("--smoke-only"):
        items[:] = [item for item in items if "smoke" in item.keywords]

    if not config.getoption("--slow"):
        skip_slow = pytest.mark.skip(reason="Slow test skipped (use --slow to run)")
        for item in items:
            if "slow" in item.keywords:
                item.add_marker(skip_slow)


@pytest.fixture
def rng() -> np.random.Generator:
    """Fresh seeded generator per test"""
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def oracle_grid(request) -> int:
    return request.config.getoption("--oracle-grid")


@pytest.fixture(scope="session")
def bpsk():
    return get_constellation('bpsk')


@pytest.fixture(scope="session")
def qpsk():
    return get_constellation('qpsk')


@pytest.fixture(scope="session")
def qam16():
    return get_constellation('16qam')


@pytest.fixture(scope="session")
def hamming_alist() -> Path:
    return DATA_DIR / 'codes' / 'hamming_7_4.alist'


@pytest.fixture(scope="session")
def hamming_code(hamming_alist) -> LdpcCode:
    """Hamming(7,4) from the alist fixture"""
    return LdpcCode(load_alist(hamming_alist))


@pytest.fixture
def small_config() -> SimConfig:
    """Short uncoded 2x1 BPSK run that finishes in seconds"""
    return SimConfig(
        name='small',
        n_tx=2,
        n_rx=1,
        constellation='bpsk',
        pilots='1/20',
        frame_length=120,
        sigma_t_deg=2.0,
        sigma_r_deg=2.0,
        ebn0_db=[8.0],
        detectors=['spa-map', 'euc-map'],
        min_frames=0,
        max_frames=4,
        batch_frames=2,
        seed=11,
    )


@pytest.hookimpl(tryfirst=True, hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """Log each test outcome"""
    outcome = yield
    report = outcome.get_result()
    report.test_markers = [marker.name for marker in item.iter_markers()]

    if report.when == "call":
        duration = report.duration
        if report.passed:
            logger.info(f"✅ Test passed: {item.name} ({duration:.2f}s)")
        elif report.failed:
            logger.error(f"❌ Test failed: {item.name} ({duration:.2f}s)")
        elif report.skipped:
            logger.warning(f"⏭️  Test skipped: {item.name}")


@pytest.fixture(autouse=True)
def test_timing():
    """Auto-used fixture to log test timing"""
    start_time = time.time()
    yield
    logger.debug(f"Test execution time: {time.time() - start_time:.2f} seconds")


def pytest_sessionstart(session):
    logger.info("=== Test Session Started ===")
    logger.info(f"Pytest version: {pytest.__version__}")


def pytest_sessionfinish(session, exitstatus):
    """Shut down worker pools and log the session summary"""
    WorkerManager.cleanup_all()
    if hasattr(session, 'testscollected'):
        logger.info(f"Tests collected: {session.testscollected}")
    if hasattr(session, 'testsfailed'):
        logger.info(f"Tests failed: {session.testsfailed}")
    logger.info(f"Session exit status: {exitstatus}")
    logger.info("=== Test Session Finished ===")
