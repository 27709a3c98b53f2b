# kinetic/dynamics/potentials.py
# Potencial de interacción W: polinomio par (exacto), gaussiana o cero.
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Literal, Optional, Sequence, Union

import numpy as np

from kinetic.errors import ArityError, ConfigError
from kinetic.observables import PhasePoint, Polynomial, Scalar, evaluate, var_index
from kinetic.polyparse import format_polynomial, parse_polynomial

PotentialKind = Literal["polynomial", "gaussian", "zero"]


@dataclass(frozen=True)
class Potential:
    """
    W: R^d → R con W(−x) = W(x). En polinomios guardamos W como observable de nivel 1
    sin dependencia en v; ∇W(0) = 0 sale de la paridad.
    """

    kind: PotentialKind
    d: int = 1
    poly: Optional[Polynomial] = None
    amplitude: float = 1.0
    width: float = 1.0

    @classmethod
    def polynomial(cls, expr: Union[str, Polynomial], d: int = 1) -> "Potential":
        p = parse_polynomial(expr, 1, d, allow_velocity=False) if isinstance(expr, str) else expr
        if p.k != 1 or p.d != d:
            raise ArityError("W se escribe sobre una sola partícula")
        for m in p.terms:
            if any(m[d:]):
                raise ConfigError("W no puede depender de v")
            if sum(m) % 2:
                raise ConfigError(f"W debe ser par (monomio de grado {sum(m)})")
        return cls("polynomial", d, p)

    @classmethod
    def gaussian(cls, amplitude: float = 1.0, width: float = 1.0, d: int = 1) -> "Potential":
        if width <= 0:
            raise ConfigError("el ancho de la gaussiana debe ser positivo")
        return cls("gaussian", d, None, float(amplitude), float(width))

    @classmethod
    def zero(cls, d: int = 1) -> "Potential":
        return cls("zero", d, Polynomial.zero(1, d))

    @classmethod
    def from_spec(cls, spec: str, d: int = 1) -> "Potential":
        """'zero', 'gaussian[:amplitud[:ancho]]' o 'polynomial:<expr>' (p. ej. 'polynomial:x^2')."""
        kind, _, rest = spec.strip().partition(":")
        kind = kind.strip().lower()
        if kind == "zero" and not rest:
            return cls.zero(d)
        if kind == "gaussian":
            parts = [p for p in rest.split(":") if p.strip()] if rest else []
            if len(parts) > 2:
                raise ConfigError(f"gaussiana mal especificada: {spec!r}")
            try:
                nums = [float(p) for p in parts]
            except ValueError:
                raise ConfigError(f"gaussiana mal especificada: {spec!r}")
            return cls.gaussian(*nums, d=d)
        if kind == "polynomial" and rest.strip():
            return cls.polynomial(rest, d)
        raise ConfigError(f"potencial desconocido {spec!r} (zero | gaussian[:A[:w]] | polynomial:<expr>)")

    @property
    def degree(self) -> int:
        return self.poly.degree if self.poly is not None else 0

    @property
    def exact(self) -> bool:
        return self.kind != "gaussian"

    @property
    def at_zero(self) -> Scalar:
        """W(0)."""
        if self.kind == "gaussian":
            return self.amplitude
        return self.poly.constant_term()  # type: ignore[union-attr]

    # -- puntual (exacto si x es racional)
    def value(self, x: Sequence[Scalar]) -> Scalar:
        if self.kind == "gaussian":
            r2 = sum(float(c) ** 2 for c in x)
            return self.amplitude * math.exp(-r2 / (2 * self.width ** 2))
        zeros = tuple(0 for _ in x)
        return evaluate(self.poly, (PhasePoint(tuple(x), zeros),))  # type: ignore[arg-type]

    def gradient(self, x: Sequence[Scalar]) -> List[Scalar]:
        if self.kind == "gaussian":
            w = self.value(x)
            return [-float(c) / self.width ** 2 * w for c in x]
        zeros = tuple(0 for _ in x)
        pt = (PhasePoint(tuple(x), zeros),)
        return [evaluate(self.poly.derivative(1, c, "x"), pt) for c in range(1, self.d + 1)]  # type: ignore[union-attr]

    # -- vectorizado: X con forma (..., d)
    def value_array(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.kind == "gaussian":
            return self.amplitude * np.exp(-np.sum(X ** 2, axis=-1) / (2 * self.width ** 2))
        return _poly_on_array(self.poly, X)  # type: ignore[arg-type]

    def gradient_array(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if self.kind == "gaussian":
            return -X / self.width ** 2 * self.value_array(X)[..., None]
        comps = [_poly_on_array(self.poly.derivative(1, c, "x"), X) for c in range(1, self.d + 1)]  # type: ignore[union-attr]
        return np.stack(comps, axis=-1)

    # -- observables W(x_a − x_b) sobre k partículas
    def _difference_images(self, k: int, a: int, b: int) -> List[Polynomial]:
        images: List[Polynomial] = []
        for kind in ("x", "v"):
            for c in range(1, self.d + 1):
                if kind == "v":
                    images.append(Polynomial.zero(k, self.d))
                else:
                    images.append(Polynomial.variable(a, c, "x", k, self.d) - Polynomial.variable(b, c, "x", k, self.d))
        return images

    def _require_poly(self) -> Polynomial:
        if self.poly is None:
            raise ArityError("sólo los potenciales polinomiales tienen observable exacto")
        return self.poly

    def pair_observable(self, k: int = 2, a: int = 1, b: int = 2) -> Polynomial:
        """W(x_a − x_b) como polinomio de k partículas."""
        return self._require_poly().substitute_linear(self._difference_images(k, a, b))

    def gradient_observable(self, c: int, k: int = 2, a: int = 1, b: int = 2) -> Polynomial:
        """(∂_c W)(x_a − x_b)."""
        dW = self._require_poly().derivative(1, c, "x")
        return dW.substitute_linear(self._difference_images(k, a, b))

    def describe(self) -> str:
        if self.kind == "gaussian":
            return f"gaussian(amplitude={self.amplitude!r}, width={self.width!r})"
        if self.kind == "zero":
            return "zero"
        return f"polynomial({format_polynomial(self.poly)})"  # type: ignore[arg-type]


def _poly_on_array(p: Polynomial, X: np.ndarray) -> np.ndarray:
    out = np.zeros(X.shape[:-1])
    d = p.d
    for m, c in p.terms.items():
        term = np.full(X.shape[:-1], float(c))
        for comp in range(1, d + 1):
            e = m[var_index(1, comp, "x", d)]
            if e:
                term = term * X[..., comp - 1] ** e
        out = out + term
    return out


def convolve_density(grid, W: Potential, gradient: bool = False) -> np.ndarray:
    """
    (W∗ρ)(x_i) = Σ_j W(x_i − x_j) ρ_j dx sobre la grilla periódica (imagen mínima por
    desplazamiento entero de celdas);
    con gradient=True devuelve (∇W∗ρ)(x_i). Cuadratura directa O(Nx²).
    """
    if W.d != 1:
        raise ArityError("la convolución sobre grilla es 1-D")
    rho = grid.density()
    Nx = grid.Nx
    m = np.arange(Nx)
    offsets = np.where(m < Nx / 2, m, m - Nx).astype(float)
    kern = _kernel(W, offsets * grid.dx, gradient)
    if Nx % 2 == 0:
        # a distancia L/2 se promedian las dos imágenes
        kern[Nx // 2] = 0.5 * (kern[Nx // 2] + _kernel(W, np.array([0.5 * grid.L]), gradient)[0])
    circulant = kern[(m[:, None] - m[None, :]) % Nx]
    return circulant @ rho * grid.dx


def _kernel(W: Potential, r: np.ndarray, gradient: bool) -> np.ndarray:
    if gradient:
        return W.gradient_array(r[:, None])[:, 0]
    return W.value_array(r[:, None])
