# kinetic/errors.py
# Errores del dominio. Cada uno lleva un código (el exit code del CLI) y un detalle corto,
# igual que un HTTPException lleva status_code y detail.
from typing import Any, Optional

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_CONFIG = 2


class KineticError(Exception):
    code: int = EXIT_VIOLATION

    def __init__(self, detail: str, *, payload: Optional[Any] = None):
        super().__init__(detail)
        self.detail = detail
        self.payload = payload


class ConfigError(KineticError):
    code = EXIT_CONFIG


class PolynomialSyntaxError(ConfigError):
    pass


class ArityError(KineticError, ValueError):
    pass


class DegreeOverflowError(KineticError, ArithmeticError):
    pass


class NotInImageError(KineticError):
    pass


class MissingLevelError(KineticError, KeyError):
    def __str__(self) -> str:
        return self.detail


class ResourceCapError(KineticError):
    pass


class NonFiniteStateError(KineticError, FloatingPointError):
    pass
