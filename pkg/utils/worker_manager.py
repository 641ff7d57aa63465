"""
Worker Manager
Process-pool lifecycle for the Monte Carlo sweep, one pool per thread count
"""

from concurrent.futures import Executor, ProcessPoolExecutor
from typing import Dict, Optional

import numba
from loguru import logger

from config.settings import runtime


def pin_worker_threads() -> None:
    """Pool initializer: one numba thread per worker process"""
    numba.set_num_threads(1)


class WorkerManager:
    """
    Process-pool manager with one shared instance per worker count

    threads == 1 means frames run in the calling process and no pool is created.
    """

    _instances: Dict[int, 'WorkerManager'] = {}

    def __new__(cls, threads: Optional[int] = None):
        threads = threads or runtime.threads
        if threads not in cls._instances:
            cls._instances[threads] = super().__new__(cls)
        return cls._instances[threads]

    def __init__(self, threads: Optional[int] = None):
        if not hasattr(self, 'initialized'):
            self.threads = threads or runtime.threads
            self.pool: Optional[Executor] = None
            self.initialized = True
            logger.debug(f"WorkerManager initialized for {self.threads} worker(s)")

    @property
    def parallel(self) -> bool:
        return self.threads > 1

    def create_pool(self) -> Executor:
        """Start a process pool; numba threading is pinned to one thread per worker"""
        try:
            self.pool = ProcessPoolExecutor(max_workers=self.threads, initializer=pin_worker_threads)
            logger.info(f"Process pool started with {self.threads} worker(s)")
            return self.pool
        except Exception as e:
            logger.error(f"Failed to start process pool: {e}")
            raise

    def get_pool(self) -> Executor:
        if self.pool is None:
            self.pool = self.create_pool()
        return self.pool

    def shutdown(self, cancel_pending: bool = False):
        """Shut the pool down; pending futures are cancelled on request"""
        if self.pool:
            try:
                self.pool.shutdown(wait=not cancel_pending, cancel_futures=cancel_pending)
                logger.info(f"Process pool shut down ({self.threads} worker(s))")
            except Exception as e:
                logger.warning(f"Error shutting down process pool: {e}")
            finally:
                self.pool = None

    @classmethod
    def cleanup_all(cls):
        for instance in cls._instances.values():
            instance.shutdown(cancel_pending=True)
        cls._instances.clear()
        logger.debug("All worker pools cleaned up")
