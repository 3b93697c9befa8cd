"""Run logging for the relcont command.

Logs go to stderr and to one file per run; stdout carries only the report.
The file handler always records DEBUG so per-level residual norms are kept
on disk, while the console follows the configured level.
"""

import os
import sys
import logging
import datetime
import pathlib

from typing import Optional


logger = logging.getLogger(__name__)

LOG_FILE_ENV_KEY = "RELCONT_LOG_PATH"
DEFAULT_LOG_DIR = os.path.join("logs", "cli")
DEFAULT_LOG_PREFIX = "relcont"
DEFAULT_MAX_LOG_FILES = 10
RUN_LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - [%(scenario)s] %(message)s"
NO_SCENARIO = "-"


class ScenarioTagFilter(logging.Filter):
    """Stamp every record with the scenario under check."""

    def __init__(self) -> None:
        super().__init__()
        self.scenario = NO_SCENARIO

    def filter(self, record: logging.LogRecord) -> bool:
        record.scenario = self.scenario
        return True


_SCENARIO_TAG = ScenarioTagFilter()


def tag_scenario(name: Optional[str]) -> None:
    """Set the scenario name shown in subsequent log lines.

    Args:
        name: Scenario name, or None to clear it.
    """

    _SCENARIO_TAG.scenario = name or NO_SCENARIO


def configure_runtime_logging(
    log_dir: str = DEFAULT_LOG_DIR,
    log_prefix: str = DEFAULT_LOG_PREFIX,
    max_files: int = DEFAULT_MAX_LOG_FILES,
    level: int = logging.INFO
) -> str:
    """Log to stderr at ``level`` and to a fresh run file at DEBUG.

    The file path is exported in ``RELCONT_LOG_PATH`` and older run files
    beyond ``max_files`` are removed.

    Args:
        log_dir: Log directory path.
        log_prefix: Log file name prefix.
        max_files: Max log files to retain.
        level: Console level.
    """

    log_path = new_run_log_path(log_dir = log_dir, log_prefix = log_prefix)
    file_handler = logging.FileHandler(log_path, encoding = "utf-8")
    file_handler.setLevel(logging.DEBUG)
    _install_handlers([_console_handler(level), file_handler])

    os.environ[LOG_FILE_ENV_KEY] = log_path
    cleanup_old_log_files(log_dir = log_dir, log_prefix = log_prefix, max_files = max_files)
    logger.info("run log file ready: %s", log_path)
    return log_path


def configure_stream_logging(level: int = logging.INFO) -> None:
    """Log to stderr only, used when the log directory is unusable.

    Args:
        level: Console level.
    """

    _install_handlers([_console_handler(level)])


def new_run_log_path(log_dir: str, log_prefix: str) -> str:
    """Build one per-run log file path ``<prefix>_<timestamp>_<pid>.log``.

    Args:
        log_dir: Log directory path, created when missing.
        log_prefix: Log file name prefix.
    """

    directory = pathlib.Path(log_dir)
    directory.mkdir(parents = True, exist_ok = True)
    timestamp = datetime.datetime.now().strftime("%Y%m%d_%H%M%S_%f")
    return str(directory / f"{log_prefix}_{timestamp}_{os.getpid()}.log")


def cleanup_old_log_files(log_dir: str, log_prefix: str, max_files: int) -> None:
    """Keep the ``max_files`` newest run logs under one prefix; 0 keeps all.

    Args:
        log_dir: Log directory path.
        log_prefix: Log file name prefix.
        max_files: Max log files to retain.
    """

    directory = pathlib.Path(log_dir)
    if max_files < 1 or not directory.is_dir():
        return
    runs = sorted(
        (path for path in directory.glob(f"{log_prefix}_*.log") if path.is_file()),
        key = lambda path: path.stat().st_mtime,
        reverse = True
    )
    for stale in runs[max_files:]:
        try:
            stale.unlink()
        except OSError:
            logger.debug("could not remove stale log file %s", stale)


def _console_handler(level: int) -> logging.Handler:
    handler = logging.StreamHandler(stream = sys.stderr)
    handler.setLevel(level)
    return handler


def _install_handlers(handlers: list) -> None:
    formatter = logging.Formatter(RUN_LOG_FORMAT)
    root_logger = logging.getLogger()
    for handler in list(root_logger.handlers):
        root_logger.removeHandler(handler)
    for handler in handlers:
        handler.setFormatter(formatter)
        handler.addFilter(_SCENARIO_TAG)
        root_logger.addHandler(handler)
    root_logger.setLevel(min(handler.level for handler in handlers) or logging.DEBUG)
