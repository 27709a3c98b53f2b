# kinetic/settings.py
import logging
import os
from contextlib import contextmanager
from typing import Iterator, Optional

from dotenv import load_dotenv

load_dotenv()

DEFAULT_DEGREE_CAP = 8

_DEGREE_CAP: Optional[int] = None


def _env_int(name: str, default: str) -> int:
    raw = (os.getenv(name, default) or default).strip()
    try:
        return int(raw)
    except ValueError:
        raise RuntimeError(f"{name} debe ser entero (valor: {raw!r}).")


def get_degree_cap() -> int:
    global _DEGREE_CAP
    if _DEGREE_CAP is None:
        _DEGREE_CAP = _env_int("KINETIC_DEGREE_CAP", str(DEFAULT_DEGREE_CAP))
    return _DEGREE_CAP


def set_degree_cap(cap: Optional[int]) -> None:
    """
    Fija el tope global de grado. None vuelve al valor del entorno.
    """
    global _DEGREE_CAP
    if cap is not None and cap < 0:
        raise ValueError("el tope de grado no puede ser negativo")
    _DEGREE_CAP = cap


@contextmanager
def degree_cap(cap: int) -> Iterator[int]:
    """Tope de grado temporal; restaura el anterior al salir."""
    global _DEGREE_CAP
    previous = _DEGREE_CAP
    set_degree_cap(cap)
    try:
        yield cap
    finally:
        _DEGREE_CAP = previous


def log_level() -> int:
    name = (os.getenv("KINETIC_LOG_LEVEL", "WARNING") or "WARNING").strip().upper()
    return getattr(logging, name, logging.WARNING)


def default_mode() -> str:
    mode = (os.getenv("KINETIC_MODE", "exact") or "exact").strip().lower()
    return mode if mode in ("exact", "float") else "exact"
