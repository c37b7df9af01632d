# settings.py
import os

from dotenv import load_dotenv

# Load environment variables
load_dotenv()

EIGENSOLVER_BACKENDS = ("householder", "lapack")


def _int_from_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError:
        raise RuntimeError(f"{name} must be an integer, got {raw!r}.")
    if value < 1:
        raise RuntimeError(f"{name} must be at least 1, got {value}.")
    return value


DEFAULT_JOBS = _int_from_env("SPECTRAL_COUNT_JOBS", os.cpu_count() or 1)

EIGENSOLVER = (os.getenv("SPECTRAL_COUNT_EIGENSOLVER") or "householder").strip().lower()

if EIGENSOLVER not in EIGENSOLVER_BACKENDS:
    raise RuntimeError(
        f"SPECTRAL_COUNT_EIGENSOLVER must be one of {EIGENSOLVER_BACKENDS}, got {EIGENSOLVER!r}."
    )

LOG_LEVEL = (os.getenv("SPECTRAL_COUNT_LOG_LEVEL") or "INFO").strip().upper()


def resolve_backend(backend: str | None) -> str:
    """
    Pick the eigensolver backend: explicit argument first, then the environment.
    """
    chosen = (backend or EIGENSOLVER).lower()
    if chosen not in EIGENSOLVER_BACKENDS:
        raise ValueError(f"Unknown eigensolver backend {backend!r}; expected one of {EIGENSOLVER_BACKENDS}.")
    return chosen
