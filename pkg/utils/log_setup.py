"""
Logging Setup
loguru sinks shared by the CLI, the sweep workers and the test session
"""

import sys
from pathlib import Path
from typing import Optional

from loguru import logger

LOG_FORMAT = "{time:YYYY-MM-DD HH:mm:ss} | {level} | {name}:{function}:{line} | {message}"


def configure_logging(level: str = 'INFO', log_file: Optional[str] = None) -> None:
    """
    Replace the default sink with a stderr sink at level, plus an optional rotating file

    Args:
        level: Minimum level for stderr
        log_file: Optional path of a DEBUG-level file sink
    """
    logger.remove()
    logger.add(sys.stderr, level=level.upper(), format=LOG_FORMAT)
    if log_file:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        logger.add(
            log_file,
            rotation="10 MB",
            retention="10 days",
            level="DEBUG",
            format=LOG_FORMAT,
            enqueue=True,
        )
    logger.debug(f"Logging configured: level={level}, file={log_file}")
