import sys
from pathlib import Path

from loguru import logger

from app.core.config import settings

# Project root, two levels above app/core/
PROJECT_ROOT = Path(__file__).parent.parent.parent

CONSOLE_LEVELS = {
    "dev": "DEBUG",
    "test": "INFO",
    "prod": "WARNING",
}

CONSOLE_FORMAT = "<green>{time:HH:mm:ss}</green> | <level>{level: <7}</level> | <cyan>{name}</cyan>:<cyan>{line}</cyan> | <level>{message}</level>"
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss.SSS} | {level: <7} | {name}:{function}:{line} | {message}"


def _add_file_sinks(log_dir: Path) -> None:
    log_dir.mkdir(parents=True, exist_ok=True)
    # search traces are DEBUG only and get their own file
    logger.add(
        log_dir / "app-debug.log",
        level="DEBUG",
        format=FILE_FORMAT,
        filter=lambda record: record["level"].name == "DEBUG",
        rotation="10 MB",
        retention="10 days",
        compression="zip",
        enqueue=True,
    )
    logger.add(
        log_dir / "app.log",
        level="INFO",
        format=FILE_FORMAT,
        rotation="10 MB",
        retention="1 days",
        compression="zip",
        enqueue=True,
    )


def setup_logging(env: str | None = None) -> None:
    """
    Installs the loguru sinks for a run.

    Reports are written to stdout by the CLI, so the console sink is stderr.
    Calling it again replaces the previous sinks.

    Args:
        env: Logging profile (dev, test or prod); defaults to settings.LOG_ENV.
    """
    env = env or settings.LOG_ENV
    logger.remove()
    logger.add(sys.stderr, level=CONSOLE_LEVELS.get(env, "DEBUG"), format=CONSOLE_FORMAT, colorize=sys.stderr.isatty())
    if settings.LOG_TO_FILE:
        _add_file_sinks(PROJECT_ROOT / settings.LOG_DIR)
    logger.debug(f"Logging configured for profile {env}")
