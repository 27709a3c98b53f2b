# kinetic/observables.py
# Polinomios exactos sobre (R^{2d})^k y observables simétricos (SymObservable).
#
# Orden de variables: x_1^1..x_1^d, v_1^1..v_1^d, x_2^1, ...  (bloque de 2d por partícula).
# Los coeficientes son Fraction; los monomios son tuplas de exponentes de largo 2dk.
from __future__ import annotations

import logging
import math
import operator
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Dict, Iterable, Iterator, List, Literal, Mapping, NamedTuple, Optional, Sequence, Tuple, Union

from sympy.utilities.iterables import multiset_permutations

from kinetic.errors import ArityError, DegreeOverflowError
from kinetic.settings import get_degree_cap

log = logging.getLogger(__name__)

Monomial = Tuple[int, ...]
Scalar = Union[Fraction, int, float]
Kind = Literal["x", "v"]


# ---------- Helpers ----------

def n_vars(k: int, d: int) -> int:
    return 2 * d * k


def var_index(i: int, c: int, kind: Kind, d: int) -> int:
    """Índice 0-based de x_i^c o v_i^c (i, c 1-based)."""
    return (i - 1) * 2 * d + (0 if kind == "x" else d) + (c - 1)


def _as_fraction(c: Scalar) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, bool):
        raise TypeError("coeficiente booleano")
    return Fraction(c)


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return tuple(map(operator.add, a, b))


def _blocks(m: Monomial, k: int, d: int) -> List[Monomial]:
    w = 2 * d
    return [m[a * w:(a + 1) * w] for a in range(k)]


def _flatten(blocks: Iterable[Sequence[int]]) -> Monomial:
    out: List[int] = []
    for b in blocks:
        out.extend(b)
    return tuple(out)


def orbit_key(m: Monomial, k: int, d: int) -> Monomial:
    """Representante canónico de la órbita de m bajo S_k (bloques ordenados)."""
    return _flatten(sorted(_blocks(m, k, d), reverse=True))


def _orbit(m: Monomial, k: int, d: int) -> List[Monomial]:
    return [_flatten(p) for p in multiset_permutations(_blocks(m, k, d))]


def graded_lex_key(m: Monomial) -> Tuple[int, Monomial]:
    return (sum(m), m)


# ---------- Polinomio crudo ----------

class Polynomial:
    """
    Polinomio exacto sobre k partículas en dimensión d.
    No necesariamente simétrico; se trata como inmutable.
    """

    __slots__ = ("k", "d", "terms")

    def __init__(self, k: int, d: int, terms: Optional[Mapping[Monomial, Scalar]] = None):
        if k < 1 or d < 1:
            raise ArityError(f"k y d deben ser positivos (k={k}, d={d})")
        self.k = k
        self.d = d
        nv = n_vars(k, d)
        clean: Dict[Monomial, Fraction] = {}
        for m, c in (terms or {}).items():
            if len(m) != nv:
                raise ArityError(f"monomio de largo {len(m)} en un espacio de {nv} variables")
            q = _as_fraction(c)
            if q != 0:
                clean[tuple(m)] = clean.get(tuple(m), Fraction(0)) + q
        self.terms: Dict[Monomial, Fraction] = {m: c for m, c in clean.items() if c != 0}

    # -- constructores
    @classmethod
    def zero(cls, k: int, d: int) -> "Polynomial":
        return cls(k, d)

    @classmethod
    def constant(cls, c: Scalar, k: int, d: int) -> "Polynomial":
        return cls(k, d, {(0,) * n_vars(k, d): c})

    @classmethod
    def variable(cls, i: int, c: int, kind: Kind, k: int, d: int) -> "Polynomial":
        if not (1 <= i <= k and 1 <= c <= d):
            raise ArityError(f"variable {kind}{i}_{c} fuera de rango (k={k}, d={d})")
        m = [0] * n_vars(k, d)
        m[var_index(i, c, kind, d)] = 1
        return cls(k, d, {tuple(m): 1})

    # -- consultas
    @property
    def degree(self) -> int:
        return max((sum(m) for m in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * n_vars(self.k, self.d), Fraction(0))

    def sorted_terms(self) -> List[Tuple[Monomial, Fraction]]:
        """Términos en orden graded-lex decreciente."""
        return sorted(self.terms.items(), key=lambda t: graded_lex_key(t[0]), reverse=True)

    def is_symmetric(self) -> bool:
        for m, c in self.terms.items():
            for m2 in _orbit(m, self.k, self.d):
                if self.terms.get(m2) != c:
                    return False
        return True

    # -- aritmética
    def _check_same(self, other: "Polynomial") -> None:
        if self.k != other.k or self.d != other.d:
            raise ArityError(
                f"espacios distintos: (k={self.k}, d={self.d}) vs (k={other.k}, d={other.d})"
            )

    def _new(self, terms: Mapping[Monomial, Scalar], other: Optional["Polynomial"] = None) -> "Polynomial":
        if isinstance(self, SymObservable) and (other is None or isinstance(other, SymObservable)):
            return SymObservable._trusted(self.k, self.d, terms)
        return Polynomial(self.k, self.d, terms)

    def __add__(self, other: Union["Polynomial", Scalar]) -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = self._new({(0,) * n_vars(self.k, self.d): _as_fraction(other)})
        self._check_same(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            out[m] = out.get(m, Fraction(0)) + c
        return self._new(out, other)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return self._new({m: -c for m, c in self.terms.items()})

    def __sub__(self, other: Union["Polynomial", Scalar]) -> "Polynomial":
        return self + (-other)

    def __rsub__(self, other: Scalar) -> "Polynomial":
        return (-self) + other

    def scale(self, c: Scalar) -> "Polynomial":
        q = _as_fraction(c)
        return self._new({m: q * v for m, v in self.terms.items()})

    def __mul__(self, other: Union["Polynomial", Scalar]) -> "Polynomial":
        if not isinstance(other, Polynomial):
            return self.scale(other)
        self._check_same(other)
        out: Dict[Monomial, Fraction] = defaultdict(Fraction)
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                out[_mono_mul(m1, m2)] += c1 * c2
        return self._new(out, other)

    def __rmul__(self, other: Scalar) -> "Polynomial":
        return self.scale(other)

    def __pow__(self, n: int) -> "Polynomial":
        if not isinstance(n, int) or n < 0:
            raise ValueError("exponente entero no negativo")
        result = self._new({(0,) * n_vars(self.k, self.d): 1})
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Polynomial):
            return self.k == other.k and self.d == other.d and self.terms == other.terms
        if isinstance(other, (int, Fraction)):
            return self == Polynomial.constant(other, self.k, self.d)
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.k, self.d, frozenset(self.terms.items())))

    def __repr__(self) -> str:
        from kinetic.polyparse import format_polynomial

        name = type(self).__name__
        return f"{name}(k={self.k}, d={self.d}, {format_polynomial(self)!r})"

    # -- cálculo
    def derivative(self, i: int, c: int, kind: Kind) -> "Polynomial":
        if not (1 <= i <= self.k and 1 <= c <= self.d):
            raise ArityError(f"derivada respecto de {kind}{i}_{c} fuera de rango (k={self.k}, d={self.d})")
        idx = var_index(i, c, kind, self.d)
        out: Dict[Monomial, Fraction] = {}
        for m, coef in self.terms.items():
            e = m[idx]
            if e:
                m2 = m[:idx] + (e - 1,) + m[idx + 1:]
                out[m2] = out.get(m2, Fraction(0)) + coef * e
        return Polynomial(self.k, self.d, out)

    def relabel(self, targets: Sequence[int], N: int) -> "Polynomial":
        """
        Coloca la partícula a (1-based) en la partícula targets[a-1] de un espacio de N partículas.
        Admite destinos repetidos (los exponentes se suman).
        """
        if len(targets) != self.k:
            raise ArityError(f"se esperaban {self.k} destinos, llegaron {len(targets)}")
        if any(not (1 <= t <= N) for t in targets):
            raise ArityError(f"destinos {tuple(targets)} fuera de 1..{N}")
        w = 2 * self.d
        out: Dict[Monomial, Fraction] = defaultdict(Fraction)
        for m, coef in self.terms.items():
            new = [0] * (w * N)
            for a, t in enumerate(targets):
                base = (t - 1) * w
                for s in range(w):
                    new[base + s] += m[a * w + s]
            out[tuple(new)] += coef
        return Polynomial(N, self.d, out)

    def pad(self, N: int) -> "Polynomial":
        """f ⊗ 1^{N-k}."""
        return self.relabel(range(1, self.k + 1), N)

    def substitute_linear(self, images: Sequence["Polynomial"]) -> "Polynomial":
        """Reemplaza la variable n-ésima por images[n] (todas en el mismo espacio)."""
        if len(images) != n_vars(self.k, self.d):
            raise ArityError("cantidad de imágenes distinta a la de variables")
        target = images[0]
        result = Polynomial.zero(target.k, target.d)
        for m, coef in self.terms.items():
            term = Polynomial.constant(coef, target.k, target.d)
            for idx, e in enumerate(m):
                if e:
                    term = term * (images[idx] ** e)
            result = result + term
        return result

    def evaluate(self, points: Union["Configuration", Sequence["PhasePoint"]]) -> Scalar:
        return evaluate(self, points)


# ---------- Observable simétrico ----------

class SymObservable(Polynomial):
    """
    Polinomio invariante por permutación de bloques de partícula (elemento de g_k).
    Sólo se construye con sym_canonicalize o desde datos ya simétricos.
    """

    __slots__ = ()

    def __init__(self, k: int, d: int, terms: Optional[Mapping[Monomial, Scalar]] = None):
        raw = Polynomial(k, d, terms)
        canon = sym_canonicalize(raw.terms, k, d)
        super().__init__(k, d, canon.terms)

    @classmethod
    def _trusted(cls, k: int, d: int, terms: Mapping[Monomial, Scalar]) -> "SymObservable":
        obj = cls.__new__(cls)
        Polynomial.__init__(obj, k, d, terms)
        _check_cap(obj)
        return obj

    @classmethod
    def zero(cls, k: int, d: int) -> "SymObservable":
        return cls._trusted(k, d, {})

    @classmethod
    def constant(cls, c: Scalar, k: int, d: int) -> "SymObservable":
        return cls._trusted(k, d, {(0,) * n_vars(k, d): c})


def _check_cap(p: Polynomial) -> None:
    cap = get_degree_cap()
    if p.degree > cap:
        raise DegreeOverflowError(f"grado {p.degree} supera el tope {cap}")


# ---------- Configuración ----------

class PhasePoint(NamedTuple):
    x: Tuple[Scalar, ...]
    v: Tuple[Scalar, ...]


@dataclass(frozen=True)
class Configuration:
    d: int
    points: Tuple[PhasePoint, ...]

    def __post_init__(self) -> None:
        if not self.points:
            raise ArityError("configuración vacía (N >= 1)")
        for p in self.points:
            if len(p.x) != self.d or len(p.v) != self.d:
                raise ArityError(f"punto de dimensión distinta a d={self.d}")

    @classmethod
    def from_pairs(cls, pairs: Sequence[Tuple[Sequence[Scalar], Sequence[Scalar]]]) -> "Configuration":
        pts = tuple(PhasePoint(tuple(x), tuple(v)) for x, v in pairs)
        if not pts:
            raise ArityError("configuración vacía (N >= 1)")
        return cls(len(pts[0].x), pts)

    @classmethod
    def from_arrays(cls, x, v) -> "Configuration":
        """x, v: arrays (N, d) de numpy; coordenadas float."""
        pts = tuple(
            PhasePoint(tuple(float(a) for a in xi), tuple(float(b) for b in vi)) for xi, vi in zip(x, v)
        )
        if not pts:
            raise ArityError("configuración vacía (N >= 1)")
        return cls(len(pts[0].x), pts)

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def exact(self) -> bool:
        return all(isinstance(c, (int, Fraction)) for p in self.points for c in (*p.x, *p.v))

    def as_arrays(self):
        import numpy as np

        x = np.array([[float(c) for c in p.x] for p in self.points])
        v = np.array([[float(c) for c in p.v] for p in self.points])
        return x, v

    def subset(self, indices: Sequence[int]) -> "Configuration":
        """Puntos en las posiciones dadas (1-based)."""
        return Configuration(self.d, tuple(self.points[i - 1] for i in indices))

    def flat(self) -> List[Scalar]:
        out: List[Scalar] = []
        for p in self.points:
            out.extend(p.x)
            out.extend(p.v)
        return out


# ---------- Operaciones ----------

def sym_canonicalize(raw_poly: Mapping[Monomial, Scalar], k: int, d: int) -> SymObservable:
    """(1/k!) Σ_π raw∘π, en forma canónica. Idempotente."""
    out: Dict[Monomial, Fraction] = defaultdict(Fraction)
    orbits: Dict[Monomial, List[Monomial]] = {}
    for m, c in raw_poly.items():
        q = _as_fraction(c)
        if q == 0:
            continue
        key = orbit_key(tuple(m), k, d)
        orbit = orbits.get(key)
        if orbit is None:
            orbit = orbits[key] = _orbit(key, k, d)
        share = q / len(orbit)
        for m2 in orbit:
            out[m2] += share
    return SymObservable._trusted(k, d, out)


def symmetrize(p: Polynomial) -> SymObservable:
    if isinstance(p, SymObservable):
        return p
    return sym_canonicalize(p.terms, p.k, p.d)


def poisson_bracket_standard(f: Polynomial, g: Polynomial) -> Polynomial:
    """Σ_i (∇_{x_i} f · ∇_{v_i} g − ∇_{v_i} f · ∇_{x_i} g)."""
    f._check_same(g)
    acc: Dict[Monomial, Fraction] = defaultdict(Fraction)
    for i in range(1, f.k + 1):
        for c in range(1, f.d + 1):
            for a, b, sign in (
                (f.derivative(i, c, "x"), g.derivative(i, c, "v"), 1),
                (f.derivative(i, c, "v"), g.derivative(i, c, "x"), -1),
            ):
                if a.is_zero() or b.is_zero():
                    continue
                for m1, c1 in a.terms.items():
                    for m2, c2 in b.terms.items():
                        acc[_mono_mul(m1, m2)] += sign * c1 * c2
    if isinstance(f, SymObservable) and isinstance(g, SymObservable):
        return SymObservable._trusted(f.k, f.d, acc)
    return Polynomial(f.k, f.d, acc)


def lie_bracket_gk(f: SymObservable, g: SymObservable) -> SymObservable:
    """[f, g]_{g_k} = k {f, g}."""
    return poisson_bracket_standard(f, g).scale(f.k)


def partial_derivative(f: Polynomial, i: int, c: int, kind: Kind) -> Polynomial:
    return f.derivative(i, c, kind)


def extend_to_tuple(f: Polynomial, j_tuple: Sequence[int], N: int) -> Polynomial:
    """f_{(j_1..j_k)}: f leída en las partículas j_1..j_k de N. Índices distintos."""
    j_tuple = tuple(j_tuple)
    if len(j_tuple) != f.k:
        raise ArityError(f"la tupla {j_tuple} no tiene largo k={f.k}")
    if len(set(j_tuple)) != len(j_tuple):
        raise ArityError(f"índices repetidos en {j_tuple}")
    if any(not (1 <= j <= N) for j in j_tuple):
        raise ArityError(f"índices de {j_tuple} fuera de 1..{N}")
    return f.relabel(j_tuple, N)


def tensor(f: Polynomial, g: Polynomial) -> Polynomial:
    """(f ⊗ g)(z_1..z_{a+b}) = f(z_1..z_a) g(z_{a+1}..z_{a+b})."""
    if f.d != g.d:
        raise ArityError("dimensiones distintas")
    n = f.k + g.k
    return f.relabel(range(1, f.k + 1), n) * g.relabel(range(f.k + 1, n + 1), n)


def _coords(points: Union[Configuration, Sequence[PhasePoint]], k: int, d: int) -> List[Scalar]:
    pts = points.points if isinstance(points, Configuration) else tuple(points)
    if len(pts) != k:
        raise ArityError(f"se esperaban {k} puntos, llegaron {len(pts)}")
    vals: List[Scalar] = []
    for p in pts:
        x, v = p
        if len(x) != d or len(v) != d:
            raise ArityError(f"punto de dimensión distinta a d={d}")
        vals.extend(x)
        vals.extend(v)
    return vals


def evaluate(f: Polynomial, points: Union[Configuration, Sequence[PhasePoint]]) -> Scalar:
    """Valor exacto si todas las coordenadas son racionales; float si alguna es float."""
    vals = _coords(points, f.k, f.d)
    exact = all(isinstance(c, (int, Fraction)) for c in vals)
    total: Scalar = Fraction(0) if exact else 0.0
    for m, coef in f.terms.items():
        term: Scalar = coef if exact else float(coef)
        for idx, e in enumerate(m):
            if e:
                term = term * vals[idx] ** e
        total += term
    return total


# ---------- Bases y generadores ----------

def monomials_up_to(k: int, d: int, degree: int) -> Iterator[Monomial]:
    nv = n_vars(k, d)
    for deg in range(degree + 1):
        for combo in combinations_with_replacement(range(nv), deg):
            m = [0] * nv
            for idx in combo:
                m[idx] += 1
            yield tuple(m)


def symmetric_basis(k: int, d: int, degree: int) -> List[SymObservable]:
    """Base de órbitas del espacio simétrico de grado <= degree (orden graded-lex)."""
    seen: Dict[Monomial, None] = {}
    for m in monomials_up_to(k, d, degree):
        seen.setdefault(orbit_key(m, k, d), None)
    keys = sorted(seen, key=graded_lex_key)
    return [sym_canonicalize({m: 1}, k, d) for m in keys]


def random_sym_observable(rng, k: int, d: int, degree: int, n_terms: int = 3) -> SymObservable:
    """Observable simétrico con coeficientes racionales chicos (rng: numpy Generator)."""
    nv = n_vars(k, d)
    raw: Dict[Monomial, Fraction] = defaultdict(Fraction)
    for _ in range(n_terms):
        deg = int(rng.integers(0, degree + 1))
        m = [0] * nv
        for idx in rng.integers(0, nv, size=deg):
            m[int(idx)] += 1
        num = int(rng.integers(-4, 5)) or 1
        den = int(rng.integers(1, 4))
        raw[tuple(m)] += Fraction(num, den)
    return sym_canonicalize(raw, k, d)


def kinetic_energy(k: int, d: int) -> SymObservable:
    """Σ_a ½|v_a|² sobre k partículas."""
    acc = Polynomial.zero(k, d)
    for a in range(1, k + 1):
        for c in range(1, d + 1):
            acc = acc + Polynomial.variable(a, c, "v", k, d) ** 2 * Fraction(1, 2)
    return symmetrize(acc)


def n_perm(n: int, k: int) -> int:
    """|P_k^n| = n!/(n-k)!."""
    return math.perm(n, k)
