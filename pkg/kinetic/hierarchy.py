# kinetic/hierarchy.py
# Embeddings ε_{k,N}, contracciones ∧_r, coeficientes C_{ℓjNr} y los corchetes de jerarquías
# [·,·]_{G_N} y [·,·]_{G_∞}.
from __future__ import annotations

import logging
import math
from collections import defaultdict
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations
from typing import Dict, Iterator, List, Literal, Mapping, Optional, Sequence, Tuple

import sympy

from kinetic.errors import ArityError, NotInImageError
from kinetic.observables import (
    Monomial,
    Polynomial,
    Scalar,
    SymObservable,
    _blocks,
    _flatten,
    extend_to_tuple,
    lie_bracket_gk,
    monomials_up_to,
    n_perm,
    orbit_key,
    sym_canonicalize,
    symmetric_basis,
    symmetrize,
)

log = logging.getLogger(__name__)

EmbedMethod = Literal["orbit", "tuples", "subsets"]


# ---------- Jerarquía de observables ----------

class ObservableHierarchy:
    """
    Sucesión finitamente soportada (f^{(k)})_k.
    max_level = N para elementos de G_N; None para G_∞.
    """

    __slots__ = ("d", "levels", "max_level")

    def __init__(self, d: int, levels: Optional[Mapping[int, Polynomial]] = None, max_level: Optional[int] = None):
        self.d = d
        self.max_level = max_level
        clean: Dict[int, SymObservable] = {}
        for k, f in (levels or {}).items():
            if k < 1:
                raise ArityError(f"nivel {k} inválido (k >= 1)")
            if max_level is not None and k > max_level:
                raise ArityError(f"nivel {k} supera N={max_level}")
            if f.k != k or f.d != d:
                raise ArityError(f"el nivel {k} trae un observable con k={f.k}, d={f.d}")
            if not f.is_zero():
                clean[k] = symmetrize(f)
        self.levels: Dict[int, SymObservable] = dict(sorted(clean.items()))

    @classmethod
    def single(cls, f: Polynomial, max_level: Optional[int] = None) -> "ObservableHierarchy":
        return cls(f.d, {f.k: f}, max_level)

    def support(self) -> List[int]:
        return list(self.levels)

    @property
    def top(self) -> int:
        return max(self.levels, default=0)

    def level(self, k: int) -> SymObservable:
        f = self.levels.get(k)
        return f if f is not None else SymObservable.zero(k, self.d)

    def items(self):
        return self.levels.items()

    def is_zero(self) -> bool:
        return not self.levels

    def with_max_level(self, N: Optional[int]) -> "ObservableHierarchy":
        return ObservableHierarchy(self.d, self.levels, N)

    def _combine(self, other: "ObservableHierarchy", sign: int) -> "ObservableHierarchy":
        if self.d != other.d:
            raise ArityError("jerarquías de dimensión distinta")
        out: Dict[int, Polynomial] = dict(self.levels)
        for k, g in other.levels.items():
            out[k] = out[k] + g.scale(sign) if k in out else g.scale(sign)
        cap = None
        if self.max_level is not None and other.max_level is not None:
            cap = max(self.max_level, other.max_level)
        return ObservableHierarchy(self.d, out, cap)

    def __add__(self, other: "ObservableHierarchy") -> "ObservableHierarchy":
        return self._combine(other, 1)

    def __sub__(self, other: "ObservableHierarchy") -> "ObservableHierarchy":
        return self._combine(other, -1)

    def __neg__(self) -> "ObservableHierarchy":
        return self.scale(-1)

    def scale(self, c: Scalar) -> "ObservableHierarchy":
        return ObservableHierarchy(self.d, {k: f.scale(c) for k, f in self.levels.items()}, self.max_level)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ObservableHierarchy):
            return NotImplemented
        return self.d == other.d and self.levels == other.levels

    def __hash__(self) -> int:
        return hash((self.d, tuple(self.levels.items())))

    def __repr__(self) -> str:
        return f"ObservableHierarchy(d={self.d}, levels={list(self.levels)}, N={self.max_level})"


def zero_hierarchy(d: int, max_level: Optional[int] = None) -> ObservableHierarchy:
    return ObservableHierarchy(d, {}, max_level)


# ---------- Inyección de fallas (hook de prueba) ----------

_FAULT: Optional[Tuple[int, int, int, Fraction]] = None


@contextmanager
def corrupted_coefficient(l: int, j: int, r: int, factor: Scalar = 2) -> Iterator[None]:
    """Multiplica C_{ℓjNr} (y su límite en G_∞) por factor mientras dure el bloque."""
    global _FAULT
    previous = _FAULT
    _FAULT = (l, j, r, Fraction(factor))
    try:
        yield
    finally:
        _FAULT = previous


def _fault_factor(l: int, j: int, r: int) -> Fraction:
    if _FAULT is not None and _FAULT[:3] == (l, j, r):
        return _FAULT[3]
    return Fraction(1)


# ---------- Coeficientes ----------

def r_min(l: int, j: int, N: int) -> int:
    return max(1, l + j - N)


def target_level(l: int, j: int, N: Optional[int]) -> int:
    """k = min(ℓ+j−1, N) (sin tope en G_∞)."""
    k = l + j - 1
    return k if N is None else min(k, N)


@dataclass(frozen=True)
class BracketCoefficient:
    l: int
    j: int
    N: int
    r: int
    value: Fraction

    @classmethod
    def of(cls, l: int, j: int, N: int, r: int) -> "BracketCoefficient":
        return cls(l, j, N, r, bracket_coefficient(l, j, N, r))

    @property
    def r0(self) -> int:
        return r_min(self.l, self.j, self.N)

    @property
    def k(self) -> int:
        return target_level(self.l, self.j, self.N)

    @property
    def scaled(self) -> Fraction:
        """N^{r−1}·C, que tiende a 1 cuando N → ∞."""
        return Fraction(self.N) ** (self.r - 1) * self.value

    @classmethod
    def row(cls, l: int, j: int, N: int) -> List["BracketCoefficient"]:
        return [cls.of(l, j, N, r) for r in range(r_min(l, j, N), min(l, j) + 1)]


def bracket_coefficient(l: int, j: int, N: int, r: int) -> Fraction:
    """C_{ℓjNr} = (N−ℓ)!(N−j)! / ((N−1)!(N−ℓ−j+r)!), vía cocientes de permutaciones."""
    if not (1 <= l <= N and 1 <= j <= N):
        raise ArityError(f"ℓ={l}, j={j} fuera de 1..{N}")
    if not (r_min(l, j, N) <= r <= min(l, j)):
        raise ArityError(f"r={r} fuera de [{r_min(l, j, N)}, {min(l, j)}] para ℓ={l}, j={j}, N={N}")
    value = Fraction(math.perm(N - l, j - r), math.perm(N - 1, j - 1))
    return value * _fault_factor(l, j, r)


def level_partition(
    levels_f: Sequence[int], levels_g: Sequence[int], N: Optional[int]
) -> Dict[int, List[Tuple[int, int]]]:
    """Partición de la grilla (ℓ, j) según k = min(ℓ+j−1, N)."""
    out: Dict[int, List[Tuple[int, int]]] = defaultdict(list)
    for l in levels_f:
        for j in levels_g:
            out[target_level(l, j, N)].append((l, j))
    return dict(sorted(out.items()))


# ---------- ε_{k,N} ----------

def epsilon_embed(f: SymObservable, N: int, method: EmbedMethod = "orbit") -> SymObservable:
    """ε_{k,N}(f) = (1/|P_k^N|) Σ_{tuplas} f_{(j_1..j_k)}."""
    k = f.k
    if k > N:
        raise ArityError(f"no se puede embeber nivel {k} en N={N}")
    if k == N:
        return symmetrize(f)
    if method == "orbit":
        return sym_canonicalize(f.pad(N).terms, N, f.d)
    if method == "tuples":
        acc = Polynomial.zero(N, f.d)
        for tup in permutations(range(1, N + 1), k):
            acc = acc + extend_to_tuple(f, tup, N)
        return symmetrize(acc.scale(Fraction(1, n_perm(N, k))))
    if method == "subsets":
        acc = Polynomial.zero(N, f.d)
        for subset in combinations(range(1, N + 1), k):
            acc = acc + extend_to_tuple(f, subset, N)
        return symmetrize(acc.scale(Fraction(1, math.comb(N, k))))
    raise ValueError(f"método desconocido {method!r}")


def _to_sympy(q: Fraction) -> sympy.Rational:
    return sympy.Rational(q.numerator, q.denominator)


def _from_sympy(x) -> Fraction:
    q = sympy.Rational(x)
    return Fraction(int(q.p), int(q.q))


def epsilon_invert(g: SymObservable, k: int, N: int) -> SymObservable:
    """
    f simétrica de nivel k con ε_{k,N}(f) = g, resolviendo el sistema lineal exacto
    sobre la base de órbitas. NotInImageError si el sistema es inconsistente.
    """
    if g.k != N:
        raise ArityError(f"g debe ser de nivel N={N} (llegó k={g.k})")
    if not (1 <= k <= N):
        raise ArityError(f"nivel destino {k} fuera de 1..{N}")
    if g.is_zero():
        return SymObservable.zero(k, g.d)
    d = g.d
    w = 2 * d
    zero_block = (0,) * w

    # filas: una por órbita presente en g
    rows: Dict[Monomial, int] = {}
    for m in g.terms:
        rows.setdefault(orbit_key(m, N, d), len(rows))

    # columnas: elementos Sym_k(m) cuya imagen cae en alguna fila.
    # Las imágenes de órbitas distintas tienen soportes disjuntos; el resto de la base queda en cero.
    cols: List[SymObservable] = []
    images: List[SymObservable] = []
    for key in rows:
        blocks = _blocks(key, N, d)
        nonzero = [b for b in blocks if b != zero_block]
        if len(nonzero) > k:
            continue
        m = _flatten(nonzero + [zero_block] * (k - len(nonzero)))
        basis = sym_canonicalize({m: 1}, k, d)
        cols.append(basis)
        images.append(epsilon_embed(basis, N))

    A = sympy.zeros(len(rows), max(len(cols), 1))
    b = sympy.zeros(len(rows), 1)
    for key, row in rows.items():
        b[row, 0] = _to_sympy(g.terms[key])
        for col, img in enumerate(images):
            coef = img.terms.get(key)
            if coef:
                A[row, col] = _to_sympy(coef)
    try:
        sol, params = A.gauss_jordan_solve(b)
    except ValueError:
        raise NotInImageError(f"g no está en la imagen de ε_{{{k},{N}}}")
    if params.shape[0]:
        sol = sol.subs({p: 0 for p in params})
    out = SymObservable.zero(k, d)
    for col, basis in enumerate(cols):
        coef = _from_sympy(sol[col, 0])
        if coef:
            out = out + basis.scale(coef)
    return out


def epsilon_compose_check(a: int, b: int, N: int, f: SymObservable) -> bool:
    """ε_{a,N}(f) == ε_{b,N}(ε_{a,b}(f))."""
    if not (1 <= a <= b <= N):
        raise ArityError(f"se requiere 1 <= a <= b <= N (a={a}, b={b}, N={N})")
    if f.k != a:
        raise ArityError(f"f debe ser de nivel a={a}")
    return epsilon_embed(f, N) == epsilon_embed(epsilon_embed(f, b), N)


def epsilon_matrix(k: int, N: int, d: int, degree: int) -> sympy.Matrix:
    """Matriz exacta de ε_{k,N} en la base de órbitas de grado <= degree (filas: monomios de N partículas)."""
    basis = symmetric_basis(k, d, degree)
    rows = {m: i for i, m in enumerate(monomials_up_to(N, d, degree))}
    M = sympy.zeros(len(rows), len(basis))
    for col, bvec in enumerate(basis):
        for m, c in epsilon_embed(bvec, N).terms.items():
            M[rows[m], col] = _to_sympy(c)
    return M


def epsilon_rank(k: int, N: int, d: int, degree: int) -> Tuple[int, int]:
    """(rango, dimensión del dominio); ε_{k,N} es inyectiva si coinciden."""
    M = epsilon_matrix(k, N, d, degree)
    return M.rank(), M.shape[1]


def iota_epsilon(F: ObservableHierarchy, N: int) -> SymObservable:
    """ι_ε(F) = Σ_k ε_{k,N}(f^{(k)}) ∈ g_N."""
    if F.top > N:
        raise ArityError(f"la jerarquía tiene soporte hasta {F.top} > N={N}")
    acc = SymObservable.zero(N, F.d)
    for k, f in F.items():
        acc = acc + epsilon_embed(f, N)
    return acc


# ---------- ∧_r ----------

def wedge_r(f: Polynomial, g: Polynomial, r: int) -> Polynomial:
    """
    f ∧_r g sobre ℓ+j−r partículas:
    C(ℓ,r) C(j,r) r! Σ_{i<=r} (∇x_i f(z_1..z_ℓ)·∇v_i g(z_1..z_r, z_{ℓ+1}..) − ∇x_i g(z_1..z_j)·∇v_i f(z_1..z_r, z_{j+1}..)).
    """
    l, j = f.k, g.k
    if f.d != g.d:
        raise ArityError("dimensiones distintas")
    if not (1 <= r <= min(l, j)):
        raise ArityError(f"r={r} fuera de 1..{min(l, j)}")
    n = l + j - r
    d = f.d
    shared = list(range(1, r + 1))
    f_first = f.relabel(range(1, l + 1), n)
    g_after_f = g.relabel(shared + list(range(l + 1, n + 1)), n)
    g_first = g.relabel(range(1, j + 1), n)
    f_after_g = f.relabel(shared + list(range(j + 1, n + 1)), n)

    acc = Polynomial.zero(n, d)
    for i in shared:
        for c in range(1, d + 1):
            acc = acc + f_first.derivative(i, c, "x") * g_after_f.derivative(i, c, "v")
            acc = acc - g_first.derivative(i, c, "x") * f_after_g.derivative(i, c, "v")
    return acc.scale(math.comb(l, r) * math.comb(j, r) * math.factorial(r))


# ---------- Corchetes ----------

def _check_support(F: ObservableHierarchy, N: int) -> None:
    if F.top > N:
        raise ArityError(f"soporte hasta el nivel {F.top} excede N={N}")


def filtration_h(f: SymObservable, g: SymObservable, N: int) -> SymObservable:
    """h^{(k)}, k = min(ℓ+j−1, N), con ε_{k,N}(h) = [ε_{ℓ,N} f, ε_{j,N} g]_{g_N}."""
    l, j = f.k, g.k
    if not (1 <= l <= N and 1 <= j <= N):
        raise ArityError(f"niveles ℓ={l}, j={j} fuera de 1..{N}")
    k = target_level(l, j, N)
    acc = SymObservable.zero(k, f.d)
    for r in range(r_min(l, j, N), min(l, j) + 1):
        C = bracket_coefficient(l, j, N, r)
        wedge = symmetrize(wedge_r(f, g, r))
        acc = acc + epsilon_embed(wedge, k).scale(C)
    return acc


def bracket_GN(F: ObservableHierarchy, G: ObservableHierarchy, N: int) -> ObservableHierarchy:
    """[F, G]_{G_N} por la fórmula explícita (suma sobre ℓ, j, r)."""
    _check_support(F, N)
    _check_support(G, N)
    if F.d != G.d:
        raise ArityError("jerarquías de dimensión distinta")
    out: Dict[int, Polynomial] = {}
    for k, pairs in level_partition(F.support(), G.support(), N).items():
        acc = SymObservable.zero(k, F.d)
        for l, j in pairs:
            acc = acc + filtration_h(F.levels[l], G.levels[j], N)
        out[k] = acc
    return ObservableHierarchy(F.d, out, N)


def bracket_GN_by_definition(F: ObservableHierarchy, G: ObservableHierarchy, N: int) -> ObservableHierarchy:
    """[F, G]^{(k)} = ε_{k,N}^{-1}(Σ_{min(ℓ+j−1,N)=k} [ε_{ℓ,N} f, ε_{j,N} g]_{g_N}); oráculo."""
    _check_support(F, N)
    _check_support(G, N)
    out: Dict[int, Polynomial] = {}
    for k, pairs in level_partition(F.support(), G.support(), N).items():
        acc = SymObservable.zero(N, F.d)
        for l, j in pairs:
            acc = acc + lie_bracket_gk(epsilon_embed(F.levels[l], N), epsilon_embed(G.levels[j], N))
        out[k] = epsilon_invert(acc, k, N)
    return ObservableHierarchy(F.d, out, N)


def bracket_Ginf(F: ObservableHierarchy, G: ObservableHierarchy) -> ObservableHierarchy:
    """[F, G]^{(k)}_{G_∞} = Σ_{ℓ+j−1=k} Sym_k(f^{(ℓ)} ∧_1 g^{(j)})."""
    if F.d != G.d:
        raise ArityError("jerarquías de dimensión distinta")
    out: Dict[int, Polynomial] = {}
    for k, pairs in level_partition(F.support(), G.support(), None).items():
        acc = SymObservable.zero(k, F.d)
        for l, j in pairs:
            wedge = symmetrize(wedge_r(F.levels[l], G.levels[j], 1))
            acc = acc + wedge.scale(_fault_factor(l, j, 1))
        out[k] = acc
    return ObservableHierarchy(F.d, out, None)


def coefficient_gap(F: ObservableHierarchy, G: ObservableHierarchy, N: int, k: int) -> Fraction:
    """max |coef| de bracket_GN(F,G,N)^{(k)} − bracket_Ginf(F,G)^{(k)}."""
    diff = bracket_GN(F, G, N).level(k) - bracket_Ginf(F, G).level(k)
    return max((abs(c) for c in diff.terms.values()), default=Fraction(0))


def random_hierarchy(rng, d: int, levels: Sequence[int], degree: int, max_level: Optional[int] = None,
                     n_terms: int = 3) -> ObservableHierarchy:
    from kinetic.observables import random_sym_observable

    return ObservableHierarchy(
        d, {k: random_sym_observable(rng, k, d, degree, n_terms) for k in levels}, max_level
    )
