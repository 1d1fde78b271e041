import os
from dataclasses import dataclass, asdict
from pathlib import Path
from rich.console import Console
from dotenv import load_dotenv

from src.errors import ConfigurationError

console = Console(stderr=True)

# .env values take precedence over the inherited environment
load_dotenv(override=True)

DEFAULT_TOL = 1e-9
DEFAULT_SEED = 20240917
MAX_DEFAULT_THREADS = 8

# Lazily built settings
_settings = None


@dataclass(frozen=True)
class Settings:
    threads: int
    tol: float
    seed: int
    log_level: str
    output_dir: Path

    def as_dict(self):
        data = asdict(self)
        data["output_dir"] = str(self.output_dir)
        return data


def _default_threads():
    return max(1, min(MAX_DEFAULT_THREADS, os.cpu_count() or 1))


def validate_config():
    """Validate the GAMMAKIT_* environment variables that are present."""
    problems = []

    threads = os.getenv('GAMMAKIT_THREADS')
    if threads is not None and threads.strip() != '':
        try:
            if int(threads) < 1:
                problems.append("GAMMAKIT_THREADS must be at least 1")
        except ValueError:
            problems.append(f"GAMMAKIT_THREADS is not an integer: {threads!r}")

    tol = os.getenv('GAMMAKIT_TOL')
    if tol is not None and tol.strip() != '':
        try:
            if float(tol) < 0:
                problems.append("GAMMAKIT_TOL must be non-negative")
        except ValueError:
            problems.append(f"GAMMAKIT_TOL is not a number: {tol!r}")

    seed = os.getenv('GAMMAKIT_SEED')
    if seed is not None and seed.strip() != '':
        try:
            int(seed)
        except ValueError:
            problems.append(f"GAMMAKIT_SEED is not an integer: {seed!r}")

    level = os.getenv('GAMMAKIT_LOG_LEVEL')
    if level is not None and level.strip() != '':
        if level.strip().upper() not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            problems.append(f"GAMMAKIT_LOG_LEVEL is not a logging level: {level!r}")

    if problems:
        return False, "; ".join(problems)

    return True, None


def get_settings():
    """Get settings with lazy initialization and validation."""
    global _settings

    if _settings is not None:
        return _settings

    config_valid, config_error = validate_config()
    if not config_valid:
        raise ConfigurationError(config_error)

    def _env(name):
        value = os.getenv(name)
        return value.strip() if value is not None and value.strip() != '' else None

    threads = _env('GAMMAKIT_THREADS')
    tol = _env('GAMMAKIT_TOL')
    seed = _env('GAMMAKIT_SEED')

    _settings = Settings(
        threads=int(threads) if threads else _default_threads(),
        tol=float(tol) if tol else DEFAULT_TOL,
        seed=int(seed) if seed else DEFAULT_SEED,
        log_level=(_env('GAMMAKIT_LOG_LEVEL') or 'INFO').upper(),
        output_dir=Path(_env('GAMMAKIT_OUTPUT_DIR') or 'outputs'),
    )
    return _settings


def reset_settings():
    """Forget cached settings so the environment is read again."""
    global _settings
    _settings = None


def check_config_with_friendly_error():
    """Check configuration and display user-friendly error messages."""
    config_valid, config_error = validate_config()
    if config_valid:
        return True

    console.print("❌ Configuration Error", style="bold red")
    for problem in config_error.split("; "):
        console.print(f"   - {problem}", style="yellow")
    console.print("   Please check your .env file or the GAMMAKIT_* environment variables.", style="yellow")
    return False
