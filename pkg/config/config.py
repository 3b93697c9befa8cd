import os
import pathlib
import logging

from dataclasses import dataclass
from dataclasses import fields
from dataclasses import replace

from dotenv import load_dotenv

from core.exceptions import ValidationError


logger = logging.getLogger(__name__)

DEFAULT_SEED = 20240501
LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL")


@dataclass
class AppConfig:
    """Application runtime configuration.

    Args:
        threads: Maximum number of checks evaluated concurrently.
        log_dir: Directory for per-run log files.
        log_level: Root logger level name.
        max_log_files: Number of per-run log files kept on disk.
        seed: Seed for every randomized check.
    """

    threads: int = 1
    log_dir: str = os.path.join("logs", "cli")
    log_level: str = "INFO"
    max_log_files: int = 10
    seed: int = DEFAULT_SEED

    @classmethod
    def from_env(cls) -> "AppConfig":
        """Build configuration from environment variables.

        Args:
            cls: Class reference used by dataclass factory.
        """

        load_dotenv_if_exists()

        config = cls(
            threads = _env_int("RELCONT_THREADS", 1),
            log_dir = os.getenv("RELCONT_LOG_DIR", os.path.join("logs", "cli")),
            log_level = os.getenv("RELCONT_LOG_LEVEL", "INFO").strip().upper(),
            max_log_files = _env_int("RELCONT_MAX_LOG_FILES", 10),
            seed = _env_int("RELCONT_SEED", DEFAULT_SEED)
        )
        config.validate()
        return config

    def validate(self) -> None:
        """Reject out-of-range settings.

        Args:
            self: AppConfig instance.
        """

        if self.threads < 1:
            raise ValidationError("RELCONT_THREADS must be >= 1")
        if self.max_log_files < 0:
            raise ValidationError("RELCONT_MAX_LOG_FILES must be >= 0")
        if self.log_level not in LOG_LEVELS:
            raise ValidationError(
                f"RELCONT_LOG_LEVEL must be one of {', '.join(LOG_LEVELS)}"
            )

    @property
    def logging_level(self) -> int:
        return getattr(logging, self.log_level)


@dataclass(frozen = True)
class ToleranceConfig:
    """Default tolerance table.

    Args:
        exact: Exact algebraic identities.
        assembly: Agreement between analytic assemblies.
        oracle: Agreement with finite-difference oracles.
        ratio_target: Expected error ratio under one grid halving.
        ratio_band: Relative band accepted around ``ratio_target``.
        zero_floor: Absolute level below which a discretized residual passes
            regardless of its convergence ratio.
    """

    exact: float = 1e-12
    assembly: float = 1e-10
    oracle: float = 1e-5
    ratio_target: float = 4.0
    ratio_band: float = 0.25
    zero_floor: float = 1e-9

    def with_overrides(self, overrides: dict[str, float]) -> "ToleranceConfig":
        """Return a copy with the named class tolerances replaced.

        Args:
            self: ToleranceConfig instance.
            overrides: Mapping of field name to value.
        """

        names = {item.name for item in fields(self)}
        unknown = sorted(set(overrides) - names)
        if unknown:
            raise ValidationError(f"unknown tolerance names: {', '.join(unknown)}")
        for name, value in overrides.items():
            if not value > 0.0:
                raise ValidationError(f"tolerance {name} must be positive")
        return replace(self, **overrides)

    def for_class(self, name: str) -> float:
        """Look up a tolerance class by name.

        Args:
            self: ToleranceConfig instance.
            name: One of exact, assembly, oracle, zero_floor.
        """

        if name not in ("exact", "assembly", "oracle", "zero_floor"):
            raise ValidationError(f"unknown tolerance class: {name}")
        return getattr(self, name)


def get_project_root() -> pathlib.Path:
    """Return project root directory path.

    Args:
        None
    """

    return pathlib.Path(__file__).resolve().parent.parent


def load_dotenv_if_exists(dotenv_path: str = ".env") -> None:
    """Load .env key-values into process env if file exists.

    Variables already present in the environment win.

    Args:
        dotenv_path: .env file path relative to CWD and project root.
    """

    candidate_paths = [
        pathlib.Path(os.getcwd()) / dotenv_path,
        get_project_root() / dotenv_path
    ]

    for env_path in candidate_paths:
        if env_path.exists():
            load_dotenv(dotenv_path = env_path, override = False)


def _env_int(key: str, default: int) -> int:
    raw = os.getenv(key, "").strip()
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError as exc:
        raise ValidationError(f"{key} must be an integer, got {raw!r}") from exc
